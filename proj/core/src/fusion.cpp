#include "capfuse/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "capfuse/error.hpp"

namespace capfuse {

ProbabilityVector fuse(const ProbabilityVector& y_img, const ProbabilityVector& y_txt,
                       double w) {
  if (y_img.size() != y_txt.size()) {
    fail(Errc::dimension_mismatch, "fusing length " + std::to_string(y_img.size()) + " with " +
                                       std::to_string(y_txt.size()));
  }
  if (!(w >= 0.0 && w <= 1.0)) {
    fail(Errc::out_of_range, "fusion weight " + std::to_string(w) + " outside [0,1]");
  }
  std::vector<double> out(y_img.size());
  const double wi = 1.0 - w;
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = wi * y_img[c] + w * y_txt[c];
  }
  return ProbabilityVector::exact(std::move(out));
}

double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> gold) {
  if (predictions.size() != gold.size()) {
    fail(Errc::count_mismatch, "predictions count " + std::to_string(predictions.size()) +
                                   " vs gold count " + std::to_string(gold.size()));
  }
  if (predictions.empty()) fail(Errc::invalid_input, "accuracy of zero examples");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == gold[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

std::vector<double> weight_grid(double start, double stop, double step) {
  if (!(start >= 0.0 && stop <= 1.0 && start <= stop)) {
    fail(Errc::out_of_range, "grid must lie within [0,1]");
  }
  if (step <= 0.0) fail(Errc::invalid_input, "grid step must be > 0");
  std::vector<double> grid;
  const std::size_t steps = static_cast<std::size_t>(std::round((stop - start) / step));
  for (std::size_t i = 0; i <= steps; ++i) {
    double w = start + static_cast<double>(i) * step;
    grid.push_back(std::min(w, stop));
  }
  grid.front() = start;
  grid.back() = stop;  // endpoints exact regardless of step rounding
  return grid;
}

std::vector<SweepPoint> sweep(const ScoreTable& img, const ScoreTable& txt,
                              std::span<const std::size_t> gold, std::span<const double> grid) {
  if (img.ids.size() != txt.ids.size() || img.ids.size() != gold.size()) {
    fail(Errc::count_mismatch, "score tables hold " + std::to_string(img.ids.size()) + " / " +
                                   std::to_string(txt.ids.size()) + " rows vs " +
                                   std::to_string(gold.size()) + " gold labels");
  }
  std::string mismatched;
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < img.ids.size(); ++i) {
    if (img.ids[i] != txt.ids[i]) {
      ++mismatches;
      if (mismatches <= 5) {
        mismatched += " [" + std::to_string(i) + "] \"" + img.ids[i] + "\" vs \"" + txt.ids[i] + "\"";
      }
    }
  }
  if (mismatches > 0) {
    fail(Errc::misaligned_ids, std::to_string(mismatches) + " rows disagree on example ids:" +
                                   mismatched + (mismatches > 5 ? " ..." : ""));
  }
  if (img.ids.empty()) fail(Errc::invalid_input, "sweep over zero examples");

  std::vector<SweepPoint> curve;
  curve.reserve(grid.size());
  std::vector<std::size_t> predictions(img.ids.size());
  for (double w : grid) {
    for (std::size_t i = 0; i < img.ids.size(); ++i) {
      predictions[i] = argmax(fuse(img.rows[i], txt.rows[i], w));
    }
    curve.push_back(SweepPoint{w, accuracy(predictions, gold)});
  }
  return curve;
}

std::size_t best_weight_index(std::span<const SweepPoint> curve) {
  if (curve.empty()) fail(Errc::invalid_input, "empty sweep curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].accuracy > curve[best].accuracy) best = i;  // ties keep lower w
  }
  return best;
}

TrialStats trial_stats(std::vector<double> values) {
  if (values.empty()) fail(Errc::invalid_input, "no trial values");
  TrialStats stats;
  stats.per_trial = std::move(values);
  double sum = 0.0;
  for (double v : stats.per_trial) sum += v;
  stats.mean = sum / static_cast<double>(stats.per_trial.size());
  if (stats.per_trial.size() > 1) {
    double sq = 0.0;
    for (double v : stats.per_trial) sq += (v - stats.mean) * (v - stats.mean);
    stats.stddev = std::sqrt(sq / static_cast<double>(stats.per_trial.size() - 1));
  }
  return stats;
}

TrialStats multi_trial(const std::function<double(std::uint64_t)>& run, std::size_t n_trials,
                       std::uint64_t base_seed) {
  if (n_trials < 1) fail(Errc::invalid_input, "n_trials must be >= 1");
  std::vector<double> values;
  values.reserve(n_trials);
  for (std::size_t t = 0; t < n_trials; ++t) {
    values.push_back(run(base_seed + t));
  }
  return trial_stats(std::move(values));
}

}  // namespace capfuse
