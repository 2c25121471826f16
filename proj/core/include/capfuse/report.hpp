#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "capfuse/fusion.hpp"
#include "capfuse/scores.hpp"
#include "capfuse/types.hpp"

namespace capfuse {

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);

  void add(std::size_t gold, std::size_t predicted, std::uint64_t count = 1);
  std::size_t classes() const { return classes_; }
  std::uint64_t at(std::size_t gold, std::size_t predicted) const;
  std::uint64_t total() const;
  std::uint64_t support(std::size_t gold) const;  // row sum
  double accuracy() const;                        // diagonal / total
  double precision(std::size_t c) const;
  double recall(std::size_t c) const;

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;  // gold-major
};

// Everything the evaluation protocol reports for one task: single-system
// accuracies, the fused weight-sweep curve with per-trial numbers, the best
// dev weight, and the test confusion at that weight.
struct EvalReport {
  std::string task;
  std::vector<std::string> labels;
  std::size_t trials = 0;
  std::vector<std::uint64_t> image_seeds;
  std::vector<std::uint64_t> text_seeds;

  TrialStats image_test;  // w = 0 endpoint
  TrialStats text_test;   // w = 1 endpoint

  std::vector<double> grid;
  std::vector<TrialStats> dev_curve;   // per grid point
  std::vector<TrialStats> test_curve;  // per grid point

  double best_w = 0.0;  // argmax of mean dev accuracy, ties toward w = 0
  TrialStats test_at_best;

  ConfusionMatrix confusion{1};  // test split at best_w, summed over trials
};

// Per-trial inputs for one system: score tables aligned to the split's
// manifest order.
struct SystemScores {
  std::vector<ScoreTable> dev;   // one per trial
  std::vector<ScoreTable> test;  // one per trial
  std::vector<std::uint64_t> seeds;
};

EvalReport build_report(const std::string& task, const LabelSpace& labels,
                        const SystemScores& image, const SystemScores& text,
                        std::span<const std::size_t> dev_gold,
                        std::span<const std::size_t> test_gold, std::span<const double> grid);

void report_write_json(const EvalReport& report, const std::filesystem::path& path);

// CSV of the test curve: `w,accuracy_mean,accuracy_std` (std empty for a
// single trial).
void report_write_curve_csv(const EvalReport& report, const std::filesystem::path& path);

// Plain-text accuracy table (percent, mean over trials with std).
std::string report_render_table(const EvalReport& report);

}  // namespace capfuse
