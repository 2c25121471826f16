#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace capfuse {

// Ordered class names for one task. The index of a name is stable for the
// lifetime of the task.
class LabelSpace {
 public:
  explicit LabelSpace(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t index) const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const LabelSpace&) const = default;

 private:
  std::vector<std::string> names_;
};

// Pre-softmax classifier output.
using Logits = std::vector<double>;

// Point on the C-simplex: entries in [0,1] summing to 1 within kSimplexTol.
// `normalized` rescales inputs whose sum drifted within tolerance;
// `exact` keeps the entries bit-for-bit. Both reject anything further out,
// so drift cannot accumulate silently through fusion chains.
class ProbabilityVector {
 public:
  static constexpr double kSimplexTol = 1e-9;

  static ProbabilityVector normalized(std::vector<double> values);
  static ProbabilityVector exact(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const ProbabilityVector&) const = default;

 private:
  explicit ProbabilityVector(std::vector<double> v) : values_(std::move(v)) {}
  static void check(const std::vector<double>& v);

  std::vector<double> values_;
};

// Fixed-dimension real vector in the shared image/text similarity space.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

// Numerically stable softmax (max subtraction). Requires >= 2 finite logits.
ProbabilityVector softmax(const Logits& logits);

double norm(const EmbeddingVector& v);
double dot(const EmbeddingVector& a, const EmbeddingVector& b);

// Unit-scales v. Throws Errc::degenerate_vector on the zero vector.
EmbeddingVector normalize(const EmbeddingVector& v);

// Smallest index attaining the maximum (deterministic tie-break).
std::size_t argmax(std::span<const double> values);
std::size_t argmax(const ProbabilityVector& p);

}  // namespace capfuse
