#include "capfuse/bank.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "capfuse/binio.hpp"
#include "capfuse/error.hpp"

namespace capfuse {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', 'K'};
constexpr std::uint32_t kVersion = 1;

// Strict total order on candidates: better score first, lower index first.
bool better(const ScoredPhrase& a, const ScoredPhrase& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.index < b.index;
}

struct Candidate {
  double score;
  std::uint32_t index;
};

bool candidate_better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.index < b.index;
}

// Keeps the k best candidates seen so far; heap top is the worst kept.
class TopKHeap {
 public:
  explicit TopKHeap(std::size_t k) : k_(k) { heap_.reserve(k); }

  void offer(Candidate c) {
    if (heap_.size() < k_) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end(), candidate_better);
      return;
    }
    if (candidate_better(c, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), candidate_better);
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end(), candidate_better);
    }
  }

  std::vector<Candidate> take_sorted() {
    std::sort(heap_.begin(), heap_.end(), candidate_better);
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<Candidate> heap_;
};

double row_dot(std::span<const float> row, std::span<const double> query) {
  double s = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) s += static_cast<double>(row[i]) * query[i];
  return s;
}

std::vector<double> unit_query(const EmbeddingVector& query, const PhraseBank& bank) {
  if (query.dim() != bank.dim()) {
    fail(Errc::dimension_mismatch, "query dim " + std::to_string(query.dim()) +
                                       " vs bank dim " + std::to_string(bank.dim()));
  }
  const double n = norm(query);
  if (n == 0.0) fail(Errc::degenerate_vector, "zero query vector");
  std::vector<double> q(query.values());
  if (n != 1.0) {
    for (double& x : q) x /= n;
  }
  return q;
}

std::vector<ScoredPhrase> finalize(const PhraseBank& bank, std::vector<Candidate> cands,
                                   std::size_t k) {
  std::vector<ScoredPhrase> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back(ScoredPhrase{cands[i].index, bank.phrase(cands[i].index), cands[i].score});
  }
  return out;
}

}  // namespace

PhraseBank::PhraseBank(std::vector<std::string> phrases, std::vector<float> matrix,
                       std::size_t dim, std::vector<std::string> categories)
    : phrases_(std::move(phrases)), matrix_(std::move(matrix)), dim_(dim),
      categories_(std::move(categories)) {
  if (phrases_.empty()) fail(Errc::invalid_input, "empty phrase bank");
  if (dim_ == 0) fail(Errc::invalid_input, "bank dimension must be >= 1");
  if (matrix_.size() != phrases_.size() * dim_) {
    fail(Errc::count_mismatch, "bank matrix holds " + std::to_string(matrix_.size()) +
                                   " floats, expected " +
                                   std::to_string(phrases_.size() * dim_));
  }
  if (!categories_.empty() && categories_.size() != phrases_.size()) {
    fail(Errc::count_mismatch, "bank categories count " + std::to_string(categories_.size()) +
                                   " vs phrase count " + std::to_string(phrases_.size()));
  }
  for (std::size_t r = 0; r < phrases_.size(); ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const float x = matrix_[r * dim_ + j];
      if (!std::isfinite(x)) fail(Errc::invalid_input, "non-finite bank entry in row " + std::to_string(r));
      s += static_cast<double>(x) * static_cast<double>(x);
    }
    if (std::abs(std::sqrt(s) - 1.0) > 1e-5) {
      fail(Errc::invalid_input, "bank row " + std::to_string(r) + " has norm " +
                                    std::to_string(std::sqrt(s)) + ", expected 1 within 1e-5");
    }
  }
}

std::span<const float> PhraseBank::row(std::size_t i) const {
  return std::span(matrix_).subspan(i * dim_, dim_);
}

void bank_write(const PhraseBank& bank, const std::filesystem::path& path) {
  std::string out;
  out.reserve(16 + bank.size() * bank.dim() * 4);
  out.append(kMagic, 4);
  binio::put_u32(out, kVersion);
  binio::put_u32(out, static_cast<std::uint32_t>(bank.size()));
  binio::put_u32(out, static_cast<std::uint32_t>(bank.dim()));
  for (float x : bank.matrix()) binio::put_f32(out, x);
  for (const auto& phrase : bank.phrases()) {
    binio::put_u32(out, static_cast<std::uint32_t>(phrase.size()));
    out += phrase;
  }
  binio::write_file_atomic(path, out);
}

PhraseBank bank_read(const std::filesystem::path& path) {
  const std::string data = binio::read_file(path);
  binio::Reader r(data, path.string());
  const std::string magic = r.bytes(4, "magic");
  if (magic != std::string(kMagic, 4)) {
    fail(Errc::bad_magic, path.string() + ": expected EMBK, got \"" + magic + "\"");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kVersion) {
    fail(Errc::bad_version, path.string() + ": format version " + std::to_string(version) +
                                ", this build reads version " + std::to_string(kVersion));
  }
  const std::uint32_t n = r.u32("row count");
  const std::uint32_t d = r.u32("dimension");
  if (n == 0 || d == 0) fail(Errc::invalid_input, path.string() + ": empty bank header");

  std::vector<float> matrix;
  matrix.reserve(static_cast<std::size_t>(n) * d);
  r.require_block(static_cast<std::size_t>(n) * d * 4, "embedding matrix");
  for (std::size_t i = 0; i < static_cast<std::size_t>(n) * d; ++i) {
    matrix.push_back(r.f32("embedding matrix"));
  }

  std::vector<std::string> phrases;
  phrases.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t len = r.u32("phrase length");
    phrases.push_back(r.bytes(len, "phrase bytes"));
  }
  if (r.remaining() != 0) {
    fail(Errc::count_mismatch, path.string() + ": " + std::to_string(r.remaining()) +
                                   " trailing bytes after " + std::to_string(n) +
                                   " phrases; row/phrase counts disagree");
  }
  return PhraseBank(std::move(phrases), std::move(matrix), d);
}

std::vector<ScoredPhrase> top_k(const EmbeddingVector& query, const PhraseBank& bank,
                                std::size_t k) {
  if (k < 1 || k > bank.size()) {
    fail(Errc::out_of_range, "k = " + std::to_string(k) + " with bank size " +
                                 std::to_string(bank.size()));
  }
  const std::vector<double> q = unit_query(query, bank);
  TopKHeap heap(k);
  for (std::size_t i = 0; i < bank.size(); ++i) {
    heap.offer(Candidate{row_dot(bank.row(i), q), static_cast<std::uint32_t>(i)});
  }
  return finalize(bank, heap.take_sorted(), k);
}

std::vector<ScoredPhrase> top_k_sharded(const EmbeddingVector& query, const PhraseBank& bank,
                                        std::size_t k, std::size_t shards) {
  if (shards < 1) fail(Errc::invalid_input, "shards must be >= 1");
  if (k < 1 || k > bank.size()) {
    fail(Errc::out_of_range, "k = " + std::to_string(k) + " with bank size " +
                                 std::to_string(bank.size()));
  }
  shards = std::min(shards, bank.size());
  const std::vector<double> q = unit_query(query, bank);

  std::vector<std::vector<Candidate>> per_shard(shards);
  std::vector<std::thread> workers;
  workers.reserve(shards);
  const std::size_t n = bank.size();
  for (std::size_t s = 0; s < shards; ++s) {
    workers.emplace_back([&, s] {
      const std::size_t begin = n * s / shards;
      const std::size_t end = n * (s + 1) / shards;
      TopKHeap heap(std::min(k, end - begin));
      for (std::size_t i = begin; i < end; ++i) {
        heap.offer(Candidate{row_dot(bank.row(i), q), static_cast<std::uint32_t>(i)});
      }
      per_shard[s] = heap.take_sorted();
    });
  }
  for (auto& w : workers) w.join();

  std::vector<Candidate> merged;
  merged.reserve(shards * k);
  for (const auto& part : per_shard) merged.insert(merged.end(), part.begin(), part.end());
  std::sort(merged.begin(), merged.end(), candidate_better);
  return finalize(bank, std::move(merged), k);
}

}  // namespace capfuse
