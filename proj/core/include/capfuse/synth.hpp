#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "capfuse/manifest.hpp"

namespace capfuse {

// Seeded synthetic dataset: class-conditional Gaussian embedding clusters in
// the mock-embedder space, plus template captions ("a scene with
// {class_token} and {distractor}") whose class token is informative with
// probability 1 - noise. At noise = 0 the captions are linearly separable
// for the hashed featurizer; at noise = 1 they carry no label signal.
struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t classes = 3;        // C >= 2
  std::size_t per_class = 100;    // train examples per class
  double noise = 0.0;             // in [0, 1]
  std::size_t dim = 64;           // embedding dimension
  double spread = 0.7;            // expected norm of the Gaussian cluster noise
  std::string task = "synth";

  std::size_t dev_per_class() const { return per_class / 5 > 0 ? per_class / 5 : 1; }
  std::size_t test_per_class() const { return per_class; }
};

struct SynthResult {
  Manifest manifest;                    // captions left empty; the cache holds them
  std::filesystem::path labels_file;
  std::filesystem::path cache_dir;      // captions.tsv + image.<split>.embk
  std::filesystem::path bank_file;      // phrase bank for interrogation
};

// Writes manifests, labels, caption/embedding caches, and a phrase bank under
// out_dir. Deterministic: a fixed seed reproduces every output byte.
SynthResult synth_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace capfuse
