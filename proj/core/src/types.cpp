#include "capfuse/types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "capfuse/error.hpp"

namespace capfuse {

LabelSpace::LabelSpace(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) {
    fail(Errc::invalid_input, "label space needs >= 2 classes, got " +
                                  std::to_string(names_.size()));
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& n : names_) {
    if (n.empty()) fail(Errc::invalid_input, "empty class name");
    if (n.find('\t') != std::string::npos || n.find('\n') != std::string::npos) {
      fail(Errc::invalid_input, "class name contains tab or newline: " + n);
    }
    if (!seen.insert(n).second) fail(Errc::invalid_input, "duplicate class name: " + n);
  }
}

const std::string& LabelSpace::name(std::size_t index) const {
  if (index >= names_.size()) {
    fail(Errc::out_of_range, "class index " + std::to_string(index) + " with C = " +
                                 std::to_string(names_.size()));
  }
  return names_[index];
}

std::optional<std::size_t> LabelSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

void ProbabilityVector::check(const std::vector<double>& v) {
  if (v.empty()) fail(Errc::invalid_input, "empty probability vector");
  double sum = 0.0;
  for (double p : v) {
    if (!std::isfinite(p)) fail(Errc::invalid_input, "non-finite probability");
    if (p < 0.0 || p > 1.0) {
      fail(Errc::invalid_input, "probability outside [0,1]: " + std::to_string(p));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTol) {
    fail(Errc::invalid_input, "entries sum to " + std::to_string(sum) +
                                  ", outside simplex tolerance");
  }
}

ProbabilityVector ProbabilityVector::normalized(std::vector<double> values) {
  check(values);
  double sum = 0.0;
  for (double p : values) sum += p;
  if (sum != 1.0) {
    for (double& p : values) p /= sum;
  }
  return ProbabilityVector(std::move(values));
}

ProbabilityVector ProbabilityVector::exact(std::vector<double> values) {
  check(values);
  return ProbabilityVector(std::move(values));
}

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  for (double x : values_) {
    if (!std::isfinite(x)) fail(Errc::invalid_input, "non-finite embedding entry");
  }
}

ProbabilityVector softmax(const Logits& logits) {
  if (logits.size() < 2) fail(Errc::invalid_input, "softmax needs >= 2 logits");
  double max_logit = logits[0];
  for (double z : logits) {
    if (!std::isfinite(z)) fail(Errc::invalid_input, "non-finite logit");
    max_logit = std::max(max_logit, z);
  }
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return ProbabilityVector::normalized(std::move(out));
}

double norm(const EmbeddingVector& v) {
  double s = 0.0;
  for (double x : v.values()) s += x * x;
  return std::sqrt(s);
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    fail(Errc::dimension_mismatch, "dot of dim " + std::to_string(a.dim()) + " vs " +
                                       std::to_string(b.dim()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

EmbeddingVector normalize(const EmbeddingVector& v) {
  if (v.dim() == 0) fail(Errc::degenerate_vector, "cannot normalize an empty vector");
  const double n = norm(v);
  if (n == 0.0) fail(Errc::degenerate_vector, "cannot normalize the zero vector");
  std::vector<double> out(v.values());
  for (double& x : out) x /= n;
  return EmbeddingVector(std::move(out));
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) fail(Errc::invalid_input, "argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t argmax(const ProbabilityVector& p) { return argmax(std::span(p.values())); }

}  // namespace capfuse
