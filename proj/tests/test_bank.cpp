#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "capfuse/bank.hpp"
#include "capfuse/binio.hpp"
#include "capfuse/error.hpp"
#include "capfuse/rng.hpp"

using namespace capfuse;
namespace fs = std::filesystem;

namespace {

bool throws_code(Errc expected, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == expected;
  }
  return false;
}

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "capfuse-bank-tests";
  fs::create_directories(dir);
  return dir;
}

// Unit-normalized random rows; with duplicate_every > 0, every n-th row
// copies its predecessor so exact score ties exist.
PhraseBank random_bank(Rng& rng, std::size_t n, std::size_t d, std::size_t duplicate_every = 0) {
  std::vector<float> matrix;
  matrix.reserve(n * d);
  std::vector<std::string> phrases;
  for (std::size_t r = 0; r < n; ++r) {
    phrases.push_back("phrase-" + std::to_string(r));
    if (duplicate_every > 0 && r > 0 && r % duplicate_every == 0) {
      for (std::size_t j = 0; j < d; ++j) matrix.push_back(matrix[(r - 1) * d + j]);
      continue;
    }
    std::vector<double> row(d);
    double sq = 0.0;
    for (double& x : row) {
      x = rng.gaussian();
      sq += x * x;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (double x : row) matrix.push_back(static_cast<float>(x * inv));
  }
  return PhraseBank(std::move(phrases), std::move(matrix), d);
}

EmbeddingVector random_query(Rng& rng, std::size_t d) {
  std::vector<double> q(d);
  for (double& x : q) x = rng.gaussian();
  return EmbeddingVector(std::move(q));
}

// Independent oracle: normalize, score every row, full sort, take k.
std::vector<ScoredPhrase> naive_top_k(const EmbeddingVector& query, const PhraseBank& bank,
                                      std::size_t k) {
  const EmbeddingVector q = normalize(query);
  std::vector<ScoredPhrase> all;
  for (std::size_t r = 0; r < bank.size(); ++r) {
    double s = 0.0;
    const auto row = bank.row(r);
    for (std::size_t j = 0; j < bank.dim(); ++j) s += static_cast<double>(row[j]) * q[j];
    all.push_back(ScoredPhrase{static_cast<std::uint32_t>(r), bank.phrase(r), s});
  }
  std::stable_sort(all.begin(), all.end(), [](const ScoredPhrase& a, const ScoredPhrase& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  all.resize(k);
  return all;
}

}  // namespace

TEST_CASE("bank file round-trips bit-exactly") {
  Rng rng(7);
  const PhraseBank bank = random_bank(rng, 3, 4);
  const auto path = temp_dir() / "roundtrip.embk";
  bank_write(bank, path);
  const PhraseBank back = bank_read(path);
  CHECK(back.size() == bank.size());
  CHECK(back.dim() == bank.dim());
  CHECK(back.phrases() == bank.phrases());
  CHECK(back.matrix() == bank.matrix());  // f32 payload, bitwise

  // Second write produces identical bytes.
  const auto path2 = temp_dir() / "roundtrip2.embk";
  bank_write(back, path2);
  CHECK(binio::read_file(path) == binio::read_file(path2));
}

TEST_CASE("bank file size follows the format arithmetic") {
  Rng rng(11);
  const std::size_t n = 100, d = 16;
  const PhraseBank bank = random_bank(rng, n, d);
  const auto path = temp_dir() / "size.embk";
  bank_write(bank, path);
  std::size_t phrase_bytes = 0;
  for (const auto& p : bank.phrases()) phrase_bytes += 4 + p.size();
  const std::size_t expected = 16 + n * d * 4 + phrase_bytes;
  CHECK(fs::file_size(path) == expected);

  // The ~100k x 512 scale quoted for real banks follows from the same
  // formula: header + N*D*4 = 204,800,016 bytes before phrase bytes.
  CHECK(16ull + 100000ull * 512ull * 4ull == 204800016ull);
}

TEST_CASE("bank read rejects corrupted files with distinct errors") {
  Rng rng(13);
  const PhraseBank bank = random_bank(rng, 5, 8);
  const auto good_path = temp_dir() / "good.embk";
  bank_write(bank, good_path);
  const std::string good = binio::read_file(good_path);

  const auto write_bytes = [&](const std::string& bytes) {
    const auto p = temp_dir() / "corrupt.embk";
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    return p;
  };

  SUBCASE("bad magic") {
    std::string bad = good;
    bad[0] = 'X';
    CHECK(throws_code(Errc::bad_magic, [&] { bank_read(write_bytes(bad)); }));
  }
  SUBCASE("version mismatch") {
    std::string bad = good;
    bad[4] = 9;
    CHECK(throws_code(Errc::bad_version, [&] { bank_read(write_bytes(bad)); }));
  }
  SUBCASE("truncated matrix names expected and actual byte counts") {
    const std::string bad = good.substr(0, 16 + 7);  // mid-matrix
    try {
      bank_read(write_bytes(bad));
      FAIL("expected truncation error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::truncated);
      CHECK(std::string(e.what()).find("bytes") != std::string::npos);
    }
  }
  SUBCASE("truncated phrase section") {
    const std::string bad = good.substr(0, good.size() - 3);
    CHECK(throws_code(Errc::truncated, [&] { bank_read(write_bytes(bad)); }));
  }
  SUBCASE("trailing bytes mean row/phrase counts disagree") {
    const std::string bad = good + "xx";
    CHECK(throws_code(Errc::count_mismatch, [&] { bank_read(write_bytes(bad)); }));
  }
  SUBCASE("missing file") {
    CHECK(throws_code(Errc::io, [&] { bank_read(temp_dir() / "no-such.embk"); }));
  }
}

TEST_CASE("bank constructor validates rows") {
  CHECK(throws_code(Errc::invalid_input, [] { PhraseBank({}, {}, 4); }));
  // Non-unit row.
  CHECK(throws_code(Errc::invalid_input, [] {
    PhraseBank({"a"}, std::vector<float>{2.0f, 0.0f}, 2);
  }));
  // Count mismatch between matrix and phrases.
  CHECK(throws_code(Errc::count_mismatch, [] {
    PhraseBank({"a", "b"}, std::vector<float>{1.0f, 0.0f}, 2);
  }));
}

TEST_CASE("top_k self-match and exhaustive ranking") {
  Rng rng(17);
  const PhraseBank bank = random_bank(rng, 32, 12);
  std::vector<double> q(bank.row(5).begin(), bank.row(5).end());
  const auto hits = top_k(EmbeddingVector(q), bank, 3);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].index == 5);
  CHECK(std::abs(hits[0].score - 1.0) <= 1e-6);

  // k = N: full ranking equals the oracle's full sort.
  const auto query = random_query(rng, 12);
  CHECK(top_k(query, bank, bank.size()) == naive_top_k(query, bank, bank.size()));
}

TEST_CASE("top_k argument validation") {
  Rng rng(19);
  const PhraseBank bank = random_bank(rng, 8, 6);
  const auto query = random_query(rng, 6);
  CHECK(throws_code(Errc::out_of_range, [&] { top_k(query, bank, 0); }));
  CHECK(throws_code(Errc::out_of_range, [&] { top_k(query, bank, 9); }));
  CHECK(throws_code(Errc::dimension_mismatch,
                    [&] { top_k(random_query(rng, 5), bank, 1); }));
  CHECK(throws_code(Errc::invalid_input, [&] { top_k_sharded(query, bank, 1, 0); }));
}

TEST_CASE("top_k and sharded variants match the brute-force oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 5 + rng.below(996);
    const std::size_t d = 4 + rng.below(29);
    // A third of the banks carry duplicated rows to force exact ties.
    const PhraseBank bank = random_bank(rng, n, d, trial % 3 == 0 ? 3 : 0);
    const auto query = random_query(rng, d);
    for (std::size_t k : {std::size_t{1}, std::size_t{5}, n}) {
      if (k > n) continue;
      const auto expected = naive_top_k(query, bank, k);
      CHECK(top_k(query, bank, k) == expected);
      for (std::size_t shards : {1, 2, 3, 7, 16}) {
        CHECK(top_k_sharded(query, bank, k, shards) == expected);
      }
    }
  }
}

TEST_CASE("scores stay within cosine bounds and rescaling leaves ranking alone") {
  Rng rng(29);
  const PhraseBank bank = random_bank(rng, 200, 24);
  const auto query = random_query(rng, 24);
  const auto hits = top_k(query, bank, 200);
  for (const auto& h : hits) {
    CHECK(h.score >= -1.0 - 1e-6);
    CHECK(h.score <= 1.0 + 1e-6);
  }

  // Power-of-two rescaling is exact in floating point: identical scores.
  std::vector<double> scaled(query.values());
  for (double& x : scaled) x *= 4.0;
  CHECK(top_k(EmbeddingVector(scaled), bank, 200) == hits);

  // Arbitrary positive rescaling: identical ranking.
  std::vector<double> scaled2(query.values());
  for (double& x : scaled2) x *= 3.7;
  const auto hits2 = top_k(EmbeddingVector(scaled2), bank, 200);
  for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits2[i].index == hits[i].index);
}
