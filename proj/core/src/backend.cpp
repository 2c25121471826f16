#include "capfuse/backend.hpp"

#include <cmath>

#include "capfuse/error.hpp"
#include "capfuse/hash.hpp"
#include "capfuse/types.hpp"

namespace capfuse {

std::vector<std::string> CaptionProvider::caption_batch(const std::vector<std::string>& refs) {
  std::vector<std::string> out;
  out.reserve(refs.size());
  for (const auto& r : refs) out.push_back(caption(r));
  return out;
}

std::vector<EmbeddingVector> TextEmbedder::embed_batch(const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

std::vector<EmbeddingVector> ImageEmbedder::embed_batch(const std::vector<std::string>& refs) {
  std::vector<EmbeddingVector> out;
  out.reserve(refs.size());
  for (const auto& r : refs) out.push_back(embed(r));
  return out;
}

MockEmbedder::MockEmbedder(std::size_t dim, std::map<std::string, double> token_weights,
                           std::uint64_t seed)
    : dim_(dim), token_weights_(std::move(token_weights)), seed_(seed) {
  if (dim_ < 8) fail(Errc::invalid_input, "mock embedder dimension must be >= 8");
}

BackendInfo MockEmbedder::info() const { return {"mock-embedder", "1"}; }

EmbeddingVector MockEmbedder::embed(const std::string& text) {
  std::vector<double> acc(dim_, 0.0);
  for (const std::string& token : tokenize(text)) {
    const std::uint64_t h = fnv1a64(token, kFnvOffset ^ seed_);
    const std::size_t index = static_cast<std::size_t>(h % dim_);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    const auto it = token_weights_.find(token);
    const double weight = it == token_weights_.end() ? 1.0 : it->second;
    acc[index] += sign * weight;
  }
  double sq = 0.0;
  for (double x : acc) sq += x * x;
  if (sq == 0.0) {
    // Zero-signal fallback: constant basis vector e0.
    acc.assign(dim_, 0.0);
    acc[0] = 1.0;
    return EmbeddingVector(std::move(acc));
  }
  const double n = std::sqrt(sq);
  for (double& x : acc) x /= n;
  return EmbeddingVector(std::move(acc));
}

BackendInfo MockCaptioner::info() const { return {"mock-captioner", "1"}; }

std::string MockCaptioner::caption(const std::string& image_ref) {
  return "a photo tagged " + hex64(fnv1a64(image_ref, kFnvOffset ^ seed_)).substr(0, 8);
}

BackendInfo MockImageEmbedder::info() const { return {"mock-image-embedder", "1"}; }

EmbeddingVector MockImageEmbedder::embed(const std::string& image_ref) {
  return inner_.embed(image_ref);
}

}  // namespace capfuse
