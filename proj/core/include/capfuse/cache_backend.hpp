#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "capfuse/backend.hpp"

namespace capfuse {

// Precomputed model outputs on disk. Layout of a cache directory:
//   captions.tsv       id<TAB>caption (optional)
//   image.*.embk       image embeddings in bank format, phrases hold ids
//   text.embk          text embeddings in bank format, phrases hold the
//                      exact source texts (optional)
// Everything is read-only after open; lookups for missing entries are
// errors, never silent skips.
class CacheStore {
 public:
  static std::shared_ptr<CacheStore> open(const std::filesystem::path& dir,
                                          std::optional<std::size_t> expected_dim = {});

  const std::filesystem::path& dir() const { return dir_; }
  std::size_t dim() const { return dim_; }
  bool has_captions() const { return !captions_.empty(); }
  bool has_image_embeddings() const { return !image_rows_.empty(); }
  bool has_text_embeddings() const { return !text_rows_.empty(); }

  std::string caption_for(const std::string& id) const;
  EmbeddingVector image_embedding(const std::string& id) const;
  EmbeddingVector text_embedding(const std::string& text) const;

 private:
  CacheStore() = default;

  std::filesystem::path dir_;
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::string> captions_;
  std::unordered_map<std::string, std::vector<float>> image_rows_;
  std::unordered_map<std::string, std::vector<float>> text_rows_;
};

std::unique_ptr<CaptionProvider> cache_captioner(std::shared_ptr<CacheStore> store);
std::unique_ptr<ImageEmbedder> cache_image_embedder(std::shared_ptr<CacheStore> store);
std::unique_ptr<TextEmbedder> cache_text_embedder(std::shared_ptr<CacheStore> store);

// Writer-side helper for building caches (id -> caption).
void write_caption_cache(const std::filesystem::path& dir,
                         const std::vector<std::pair<std::string, std::string>>& captions);

}  // namespace capfuse
