#include "capfuse/interrogator.hpp"

#include <algorithm>

#include "capfuse/error.hpp"

namespace capfuse {

namespace {

double caption_similarity(const EmbeddingVector& image_unit, TextEmbedder& embedder,
                          const std::string& caption) {
  const EmbeddingVector text = embedder.embed(caption);
  return dot(image_unit, normalize(text));
}

}  // namespace

std::vector<ScoredPhrase> rank_candidates(const EmbeddingVector& image_embedding,
                                          const PhraseBank& bank, std::size_t k) {
  return top_k(image_embedding, bank, k);
}

InterrogationResult chain_select(const std::string& base_caption,
                                 const EmbeddingVector& image_embedding,
                                 const std::vector<ScoredPhrase>& pool, TextEmbedder& embedder,
                                 const InterrogationConfig& cfg) {
  if (pool.empty() && cfg.max_phrases > 0) {
    fail(Errc::invalid_input, "empty candidate pool with max_phrases > 0");
  }
  if (embedder.dim() != image_embedding.dim()) {
    fail(Errc::dimension_mismatch, "text embedder dim " + std::to_string(embedder.dim()) +
                                       " vs image embedding dim " +
                                       std::to_string(image_embedding.dim()));
  }

  const EmbeddingVector image_unit = normalize(image_embedding);
  InterrogationResult result;
  result.final_caption = base_caption;

  double current;
  try {
    current = caption_similarity(image_unit, embedder, base_caption);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("base caption: ") + e.what());
  }
  std::vector<bool> used(pool.size(), false);

  while (result.selected.size() < cfg.max_phrases) {
    double best_score = 0.0;
    std::size_t best = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (used[i]) continue;
      double score;
      try {
        score = caption_similarity(image_unit, embedder,
                                   result.final_caption + cfg.separator + pool[i].phrase);
      } catch (const Error& e) {
        throw Error(e.code(), "candidate \"" + pool[i].phrase + "\": " + e.what());
      }
      // Strictly greater keeps the earliest candidate on ties (pool order).
      if (best == pool.size() || score > best_score) {
        best = i;
        best_score = score;
      }
    }
    if (best == pool.size()) break;  // pool exhausted
    if (!(best_score - current > cfg.min_gain)) break;

    used[best] = true;
    result.final_caption += cfg.separator + pool[best].phrase;
    current = best_score;
    result.selected.push_back(ScoredPhrase{pool[best].index, pool[best].phrase, best_score});
    result.similarity_trace.push_back(best_score);
  }
  return result;
}

InterrogationResult interrogate(const std::string& base_caption,
                                const EmbeddingVector& image_embedding, const PhraseBank& bank,
                                TextEmbedder& embedder, const InterrogationConfig& cfg) {
  const std::size_t k = std::min(cfg.candidate_pool_k, bank.size());
  const auto pool = rank_candidates(image_embedding, bank, std::max<std::size_t>(k, 1));
  return chain_select(base_caption, image_embedding, pool, embedder, cfg);
}

}  // namespace capfuse
