#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "capfuse/types.hpp"

namespace capfuse {

// Phrase bank: N phrases paired with row-normalized f32 embeddings, plus
// exact top-k cosine retrieval over them.
//
// File format EMBK v1, little-endian:
//   magic 'EMBK' | u32 version=1 | u32 N | u32 D
//   N*D f32, row-major
//   N phrases, each u32 byte length + UTF-8 bytes
// The f32 payload round-trips bit-exactly.
class PhraseBank {
 public:
  // matrix is row-major N*D. Every row must be unit-norm within 1e-5.
  // categories are optional side information (one tag per phrase, unused by
  // ranking and not serialized).
  PhraseBank(std::vector<std::string> phrases, std::vector<float> matrix, std::size_t dim,
             std::vector<std::string> categories = {});

  std::size_t size() const { return phrases_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& phrases() const { return phrases_; }
  const std::string& phrase(std::size_t row) const { return phrases_[row]; }
  std::span<const float> row(std::size_t i) const;
  const std::vector<float>& matrix() const { return matrix_; }
  const std::vector<std::string>& categories() const { return categories_; }

 private:
  std::vector<std::string> phrases_;
  std::vector<float> matrix_;
  std::size_t dim_;
  std::vector<std::string> categories_;
};

struct ScoredPhrase {
  std::uint32_t index = 0;  // bank row
  std::string phrase;
  double score = 0.0;  // cosine similarity

  bool operator==(const ScoredPhrase&) const = default;
};

void bank_write(const PhraseBank& bank, const std::filesystem::path& path);
PhraseBank bank_read(const std::filesystem::path& path);

// Exact top-k by cosine similarity: k results sorted by score descending,
// ties broken by ascending row index. The query is normalized internally if
// it is not already unit-length. Scores accumulate in f64.
std::vector<ScoredPhrase> top_k(const EmbeddingVector& query, const PhraseBank& bank,
                                std::size_t k);

// Same results for every shard count: rows are partitioned across workers,
// per-shard candidates are merged under the (score desc, index asc) total
// order.
std::vector<ScoredPhrase> top_k_sharded(const EmbeddingVector& query, const PhraseBank& bank,
                                        std::size_t k, std::size_t shards);

}  // namespace capfuse
