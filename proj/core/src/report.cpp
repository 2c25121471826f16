#include "capfuse/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "capfuse/binio.hpp"
#include "capfuse/error.hpp"

#include <nlohmann/json.hpp>

namespace capfuse {

namespace {

std::string percent(double value, std::optional<double> std_dev) {
  char buf[64];
  if (std_dev) {
    std::snprintf(buf, sizeof(buf), "%6.2f +/- %.2f", value * 100.0, *std_dev * 100.0);
  } else {
    std::snprintf(buf, sizeof(buf), "%6.2f", value * 100.0);
  }
  return buf;
}

nlohmann::json stats_json(const TrialStats& s) {
  nlohmann::json j{{"per_trial", s.per_trial}, {"mean", s.mean}};
  if (s.stddev) {
    j["std"] = *s.stddev;
  } else {
    j["std"] = nullptr;
  }
  return j;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t classes)
    : classes_(classes), counts_(classes * classes, 0) {
  if (classes == 0) fail(Errc::invalid_input, "confusion matrix needs >= 1 class");
}

void ConfusionMatrix::add(std::size_t gold, std::size_t predicted, std::uint64_t count) {
  if (gold >= classes_ || predicted >= classes_) {
    fail(Errc::out_of_range, "confusion cell (" + std::to_string(gold) + ", " +
                                 std::to_string(predicted) + ") with C = " +
                                 std::to_string(classes_));
  }
  counts_[gold * classes_ + predicted] += count;
}

std::uint64_t ConfusionMatrix::at(std::size_t gold, std::size_t predicted) const {
  return counts_[gold * classes_ + predicted];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::support(std::size_t gold) const {
  std::uint64_t t = 0;
  for (std::size_t p = 0; p < classes_; ++p) t += at(gold, p);
  return t;
}

double ConfusionMatrix::accuracy() const {
  const std::uint64_t all = total();
  if (all == 0) return 0.0;
  std::uint64_t diag = 0;
  for (std::size_t c = 0; c < classes_; ++c) diag += at(c, c);
  return static_cast<double>(diag) / static_cast<double>(all);
}

double ConfusionMatrix::precision(std::size_t c) const {
  std::uint64_t predicted = 0;
  for (std::size_t g = 0; g < classes_; ++g) predicted += at(g, c);
  return predicted == 0 ? 0.0 : static_cast<double>(at(c, c)) / static_cast<double>(predicted);
}

double ConfusionMatrix::recall(std::size_t c) const {
  const std::uint64_t sup = support(c);
  return sup == 0 ? 0.0 : static_cast<double>(at(c, c)) / static_cast<double>(sup);
}

EvalReport build_report(const std::string& task, const LabelSpace& labels,
                        const SystemScores& image, const SystemScores& text,
                        std::span<const std::size_t> dev_gold,
                        std::span<const std::size_t> test_gold, std::span<const double> grid) {
  if (image.dev.size() != image.test.size() || text.dev.size() != text.test.size() ||
      image.dev.size() != text.dev.size() || image.dev.empty()) {
    fail(Errc::count_mismatch, "image and text systems must supply the same nonzero trial count");
  }
  const std::size_t trials = image.dev.size();

  EvalReport report;
  report.task = task;
  report.labels = labels.names();
  report.trials = trials;
  report.image_seeds = image.seeds;
  report.text_seeds = text.seeds;
  report.grid.assign(grid.begin(), grid.end());

  // Per-trial sweeps on both splits; trial t pairs image trial t with text trial t.
  std::vector<std::vector<SweepPoint>> dev_curves, test_curves;
  for (std::size_t t = 0; t < trials; ++t) {
    dev_curves.push_back(sweep(image.dev[t], text.dev[t], dev_gold, grid));
    test_curves.push_back(sweep(image.test[t], text.test[t], test_gold, grid));
  }

  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    std::vector<double> dev_vals, test_vals;
    for (std::size_t t = 0; t < trials; ++t) {
      dev_vals.push_back(dev_curves[t][gi].accuracy);
      test_vals.push_back(test_curves[t][gi].accuracy);
    }
    report.dev_curve.push_back(trial_stats(std::move(dev_vals)));
    report.test_curve.push_back(trial_stats(std::move(test_vals)));
  }

  // Single-modal systems are the sweep endpoints when the grid covers [0,1];
  // compute them directly so they are exact regardless of the grid.
  std::vector<double> img_accs, txt_accs;
  const std::array<double, 1> w0{0.0}, w1{1.0};
  for (std::size_t t = 0; t < trials; ++t) {
    img_accs.push_back(sweep(image.test[t], text.test[t], test_gold, w0)[0].accuracy);
    txt_accs.push_back(sweep(image.test[t], text.test[t], test_gold, w1)[0].accuracy);
  }
  report.image_test = trial_stats(std::move(img_accs));
  report.text_test = trial_stats(std::move(txt_accs));

  // Best w on mean dev accuracy, ties toward lower w.
  std::size_t best = 0;
  for (std::size_t gi = 1; gi < grid.size(); ++gi) {
    if (report.dev_curve[gi].mean > report.dev_curve[best].mean) best = gi;
  }
  report.best_w = report.grid[best];
  std::vector<double> at_best;
  for (std::size_t t = 0; t < trials; ++t) at_best.push_back(test_curves[t][best].accuracy);
  report.test_at_best = trial_stats(std::move(at_best));

  // Test confusion at best_w, summed over trials.
  report.confusion = ConfusionMatrix(labels.size());
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < test_gold.size(); ++i) {
      const auto fused = fuse(image.test[t].rows[i], text.test[t].rows[i], report.best_w);
      report.confusion.add(test_gold[i], argmax(fused));
    }
  }
  return report;
}

void report_write_json(const EvalReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  j["task"] = report.task;
  j["labels"] = report.labels;
  j["trials"] = report.trials;
  j["seeds"] = {{"image", report.image_seeds}, {"text", report.text_seeds}};
  j["systems"] = {{"image_test", stats_json(report.image_test)},
                  {"text_test", stats_json(report.text_test)}};
  j["sweep"] = nlohmann::json::array();
  for (std::size_t gi = 0; gi < report.grid.size(); ++gi) {
    j["sweep"].push_back({{"w", report.grid[gi]},
                          {"dev", stats_json(report.dev_curve[gi])},
                          {"test", stats_json(report.test_curve[gi])}});
  }
  j["best_w"] = report.best_w;
  j["test_at_best_w"] = stats_json(report.test_at_best);

  nlohmann::json matrix = nlohmann::json::array();
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t g = 0; g < report.confusion.classes(); ++g) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t p = 0; p < report.confusion.classes(); ++p) {
      row.push_back(report.confusion.at(g, p));
    }
    matrix.push_back(row);
    per_class.push_back({{"label", report.labels[g]},
                         {"precision", report.confusion.precision(g)},
                         {"recall", report.confusion.recall(g)},
                         {"support", report.confusion.support(g)}});
  }
  j["confusion"] = {{"rows_are_gold", true}, {"matrix", matrix}};
  j["per_class"] = per_class;
  binio::write_file_atomic(path, j.dump(2) + "\n");
}

void report_write_curve_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::string out = "w,accuracy_mean,accuracy_std\n";
  char buf[96];
  for (std::size_t gi = 0; gi < report.grid.size(); ++gi) {
    const TrialStats& s = report.test_curve[gi];
    if (s.stddev) {
      std::snprintf(buf, sizeof(buf), "%.6g,%.17g,%.17g\n", report.grid[gi], s.mean, *s.stddev);
    } else {
      std::snprintf(buf, sizeof(buf), "%.6g,%.17g,\n", report.grid[gi], s.mean);
    }
    out += buf;
  }
  binio::write_file_atomic(path, out);
}

std::string report_render_table(const EvalReport& report) {
  std::string out;
  out += "Task: " + report.task + "  (" + std::to_string(report.trials) + " trials)\n";
  out += "System                     Accuracy (%)\n";
  out += "--------------------------------------\n";
  out += "Image-based                " + percent(report.image_test.mean, report.image_test.stddev) + "\n";
  out += "Text-based                 " + percent(report.text_test.mean, report.text_test.stddev) + "\n";
  out += "Fused (w = " + std::to_string(report.best_w).substr(0, 4) + ", dev-chosen) " +
         percent(report.test_at_best.mean, report.test_at_best.stddev) + "\n";
  return out;
}

}  // namespace capfuse
