#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "capfuse/types.hpp"

namespace capfuse {

struct BackendInfo {
  std::string name;
  std::string version;
};

// Produces a caption for an opaque image reference. Cache and mock
// implementations are deterministic per (backend, image_ref).
class CaptionProvider {
 public:
  virtual ~CaptionProvider() = default;
  virtual BackendInfo info() const = 0;
  virtual std::string caption(const std::string& image_ref) = 0;
  virtual std::vector<std::string> caption_batch(const std::vector<std::string>& image_refs);
};

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual BackendInfo info() const = 0;
  virtual std::size_t dim() const = 0;
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts);
};

class ImageEmbedder {
 public:
  virtual ~ImageEmbedder() = default;
  virtual BackendInfo info() const = 0;
  virtual std::size_t dim() const = 0;
  virtual EmbeddingVector embed(const std::string& image_ref) = 0;
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& image_refs);
};

// Deterministic hashed text embedder. Each token maps to a signed basis
// direction via FNV-1a (index from the low bits mod dim, sign from bit 63);
// the embedding is the token-weighted sum over occurrences, L2-normalized.
// Texts whose tokens sum to zero (including empty text) fall back to the
// constant basis vector e0. Platform-independent by construction.
class MockEmbedder final : public TextEmbedder {
 public:
  explicit MockEmbedder(std::size_t dim, std::map<std::string, double> token_weights = {},
                        std::uint64_t seed = 0);

  BackendInfo info() const override;
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed(const std::string& text) override;

 private:
  std::size_t dim_;
  std::map<std::string, double> token_weights_;
  std::uint64_t seed_;
};

// Deterministic caption stub: a fixed template around the hashed ref.
class MockCaptioner final : public CaptionProvider {
 public:
  explicit MockCaptioner(std::uint64_t seed = 0) : seed_(seed) {}
  BackendInfo info() const override;
  std::string caption(const std::string& image_ref) override;

 private:
  std::uint64_t seed_;
};

// Embeds the tokens of the image reference itself; useful wherever a
// deterministic image-side vector is needed without real image data.
class MockImageEmbedder final : public ImageEmbedder {
 public:
  explicit MockImageEmbedder(std::size_t dim, std::uint64_t seed = 0)
      : inner_(dim, {}, seed) {}
  BackendInfo info() const override;
  std::size_t dim() const override { return inner_.dim(); }
  EmbeddingVector embed(const std::string& image_ref) override;

 private:
  MockEmbedder inner_;
};

}  // namespace capfuse
