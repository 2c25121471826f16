#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "capfuse/types.hpp"

namespace capfuse {

// Sparse feature vector over a fixed dimension. Entries are sorted by index
// and unique; dense vectors (e.g. embeddings used as features) are stored as
// one entry per coordinate.
struct FeatureVector {
  std::uint32_t dim = 0;
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool zero() const { return entries.empty(); }
  static FeatureVector dense(std::span<const double> values);
};

// Signed hashed bag of word unigrams and bigrams, L2-normalized.
// F must be a power of two >= 256 (default 32768). Deterministic and
// platform-independent. Empty text yields the zero vector.
FeatureVector featurize_text(std::string_view text, std::uint32_t feature_dim);
inline constexpr std::uint32_t kDefaultFeatureDim = 32768;

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 128;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

// Softmax linear layer over fixed features: the trainable head of both
// branches.
struct LinearProbe {
  LabelSpace labels;
  std::uint32_t feature_dim = 0;
  std::vector<double> weights;  // C x F, row-major
  std::vector<double> bias;     // C

  static LinearProbe zeros(LabelSpace labels, std::uint32_t feature_dim);
  Logits logits(const FeatureVector& x) const;
  ProbabilityVector forward(const FeatureVector& x) const;
};

struct TrainExample {
  FeatureVector x;
  std::size_t y = 0;
};
using Dataset = std::vector<TrainExample>;

struct EpochMetrics {
  double train_loss = 0.0;
  std::optional<double> dev_accuracy;
};

struct TrainResult {
  LinearProbe probe;
  std::vector<EpochMetrics> epochs;
  double final_train_accuracy = 0.0;
};

// Mini-batch Adam on mean cross-entropy, zero init, per-epoch seeded
// shuffle, last partial batch kept. Deterministic for a fixed seed.
// Throws Errc::divergence (with epoch/batch location) if the loss goes
// non-finite.
TrainResult train(const Dataset& data, const LabelSpace& labels, const TrainConfig& cfg,
                  const Dataset* dev = nullptr);

double mean_cross_entropy(const LinearProbe& probe, const Dataset& data);
double dataset_accuracy(const LinearProbe& probe, const Dataset& data);

// Analytic loss gradient for one batch: dW is C x F row-major, db length C.
void loss_gradient(const LinearProbe& probe, const Dataset& batch, std::vector<double>& grad_w,
                   std::vector<double>& grad_b);

// Max relative error between the analytic gradient and central finite
// differences with step h, over every parameter.
double grad_check(const LinearProbe& probe, const Dataset& batch, double h = 1e-5);

// Probe file: magic 'LPRB' | u32 version=1 | u32 json header length | JSON
// header (classes, feature_dim, labels, train config, seed) | f32 W | f32 b.
// The f32 payload round-trips bit-exactly.
void probe_save(const LinearProbe& probe, const TrainConfig& cfg,
                const std::filesystem::path& path);
std::pair<LinearProbe, TrainConfig> probe_load(const std::filesystem::path& path);

}  // namespace capfuse
