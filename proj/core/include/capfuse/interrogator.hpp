#pragma once

#include <string>
#include <vector>

#include "capfuse/backend.hpp"
#include "capfuse/bank.hpp"
#include "capfuse/types.hpp"

namespace capfuse {

// Greedy caption enrichment over a phrase bank. Starting from a base
// caption, repeatedly appends the pool phrase that most improves the
// cosine similarity between the image embedding and the re-embedded full
// caption, until no candidate gains more than min_gain, the pool is
// exhausted, or max_phrases is reached. This is a reconstruction of the
// published tool's visible behavior, not a replica: the candidate pool is
// pre-filtered by image-phrase similarity, and the full concatenation is
// re-embedded at every step.
struct InterrogationConfig {
  std::size_t candidate_pool_k = 1024;
  std::size_t max_phrases = 16;
  double min_gain = 0.0;  // accept a phrase only if gain > min_gain
  std::string separator = ", ";
};

struct InterrogationResult {
  std::string final_caption;
  std::vector<ScoredPhrase> selected;     // in acceptance order; score is the
                                          // caption similarity after the accept
  std::vector<double> similarity_trace;   // similarity after each accepted phrase
};

// Candidate pool: top-k bank phrases by image similarity (delegates to top_k).
std::vector<ScoredPhrase> rank_candidates(const EmbeddingVector& image_embedding,
                                          const PhraseBank& bank, std::size_t k);

// Greedy chain selection. Ties between candidates break toward pool order,
// so the result is deterministic for a deterministic embedder.
InterrogationResult chain_select(const std::string& base_caption,
                                 const EmbeddingVector& image_embedding,
                                 const std::vector<ScoredPhrase>& pool, TextEmbedder& embedder,
                                 const InterrogationConfig& cfg);

// rank_candidates + chain_select in one call; pool k is clamped to the bank size.
InterrogationResult interrogate(const std::string& base_caption,
                                const EmbeddingVector& image_embedding, const PhraseBank& bank,
                                TextEmbedder& embedder, const InterrogationConfig& cfg);

}  // namespace capfuse
