#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "capfuse/scores.hpp"
#include "capfuse/types.hpp"

namespace capfuse {

// Score-level fusion: y = (1-w) * y_img + w * y_txt, elementwise. The result
// stays on the simplex by convexity; no renormalization happens, so w=0 and
// w=1 reproduce the inputs bit-exactly.
ProbabilityVector fuse(const ProbabilityVector& y_img, const ProbabilityVector& y_txt, double w);

double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> gold);

// Inclusive grid over [start, stop]; the endpoints are hit exactly.
// Defaults produce the 21-point grid 0, 0.05, ..., 1.
std::vector<double> weight_grid(double start = 0.0, double stop = 1.0, double step = 0.05);

struct SweepPoint {
  double w = 0.0;
  double accuracy = 0.0;
};

// Fused accuracy per grid point. Both score tables must list the same ids in
// the same order as `gold`; misalignment reports the offending ids.
std::vector<SweepPoint> sweep(const ScoreTable& img, const ScoreTable& txt,
                              std::span<const std::size_t> gold, std::span<const double> grid);

// Index of the best weight, ties broken toward lower w.
std::size_t best_weight_index(std::span<const SweepPoint> curve);

struct TrialStats {
  std::vector<double> per_trial;
  double mean = 0.0;
  std::optional<double> stddev;  // sample std (n-1); absent when n == 1
};

TrialStats trial_stats(std::vector<double> values);

// Runs `run(seed)` with seeds base_seed, base_seed+1, ... and aggregates.
TrialStats multi_trial(const std::function<double(std::uint64_t)>& run, std::size_t n_trials,
                       std::uint64_t base_seed);

}  // namespace capfuse
