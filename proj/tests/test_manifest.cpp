#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>

#include "capfuse/binio.hpp"
#include "capfuse/error.hpp"
#include "capfuse/hash.hpp"
#include "capfuse/manifest.hpp"
#include "capfuse/synth.hpp"

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

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "capfuse-manifest-tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Manifest sample_manifest() {
  LabelSpace labels({"flood", "quake"});
  Manifest m{"demo", labels, {}, {}, {}};
  m.train = {
      {"t0", "img/t0.jpg", std::nullopt, 0},
      {"t1", "img/t1.jpg", std::string("water on the\tstreet\nafter rain"), 1},
  };
  m.dev = {};
  m.test = {{"x0", "img/x0.jpg", std::string("cracked walls"), 1}};
  return m;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& l : lines) out << l << '\n';
}

std::uint64_t dir_fingerprint(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = kFnvOffset;
  for (const auto& f : files) {
    h = fnv1a64(f.lexically_relative(dir).string(), h);
    h = fnv1a64(hex64(fnv1a64_file(f)), h);
  }
  return h;
}

}  // namespace

TEST_CASE("manifest round-trip is an identity, including escaped captions") {
  const auto dir = fresh_dir("roundtrip");
  const Manifest m = sample_manifest();
  write_manifest(m, dir);
  std::vector<std::string> warnings;
  const Manifest back = load_manifest(dir, "demo", m.labels, &warnings);
  CHECK(back == m);
  CHECK(warnings.empty());

  // Split counts match line counts minus header.
  std::ifstream in(manifest_split_path(dir, "demo", Split::train));
  std::size_t lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(m.train.size() == lines - 1);
}

TEST_CASE("labels file round-trips") {
  const auto dir = fresh_dir("labels");
  const LabelSpace labels({"none", "mild", "severe"});
  write_labels(labels, dir / "t.labels.txt");
  CHECK(load_labels(dir / "t.labels.txt") == labels);
}

TEST_CASE("empty train split loads with a warning") {
  const auto dir = fresh_dir("empty-train");
  Manifest m = sample_manifest();
  m.train.clear();
  write_manifest(m, dir);
  std::vector<std::string> warnings;
  const Manifest back = load_manifest(dir, "demo", m.labels, &warnings);
  CHECK(back.train.empty());
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("train") != std::string::npos);
}

TEST_CASE("manifest loading reports distinct errors with locations") {
  const auto dir = fresh_dir("errors");
  const LabelSpace labels({"flood", "quake"});
  const auto path = dir / "t.train.tsv";

  SUBCASE("missing file") {
    CHECK(throws_code(Errc::io, [&] { load_manifest_split(dir / "absent.tsv", labels); }));
  }
  SUBCASE("bad header") {
    write_lines(path, {"id\timage"});
    CHECK(throws_code(Errc::parse, [&] { load_manifest_split(path, labels); }));
  }
  SUBCASE("wrong column count carries the line number") {
    write_lines(path, {"id\timage_ref\tcaption\tlabel", "a\tb\tflood"});
    try {
      load_manifest_split(path, labels);
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::parse);
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
  }
  SUBCASE("unknown label names the line") {
    write_lines(path, {"id\timage_ref\tcaption\tlabel", "a\tb\t\tfire"});
    try {
      load_manifest_split(path, labels);
      FAIL("expected unknown label");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::unknown_label);
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
      CHECK(std::string(e.what()).find("fire") != std::string::npos);
    }
  }
  SUBCASE("label matching is case-sensitive") {
    write_lines(path, {"id\timage_ref\tcaption\tlabel", "a\tb\t\tFlood"});
    CHECK(throws_code(Errc::unknown_label, [&] { load_manifest_split(path, labels); }));
  }
  SUBCASE("duplicate id within a split") {
    write_lines(path,
                {"id\timage_ref\tcaption\tlabel", "a\tb\t\tflood", "a\tc\t\tquake"});
    CHECK(throws_code(Errc::duplicate_id, [&] { load_manifest_split(path, labels); }));
  }
}

TEST_CASE("synthetic datasets are deterministic per seed") {
  SynthConfig cfg;
  cfg.seed = 7;
  cfg.classes = 3;
  cfg.per_class = 20;
  cfg.noise = 0.3;
  cfg.dim = 16;

  const auto dir_a = fresh_dir("synth-a");
  const auto dir_b = fresh_dir("synth-b");
  const auto res_a = synth_dataset(cfg, dir_a);
  synth_dataset(cfg, dir_b);
  CHECK(dir_fingerprint(dir_a) == dir_fingerprint(dir_b));

  SynthConfig other = cfg;
  other.seed = 8;
  const auto dir_c = fresh_dir("synth-c");
  synth_dataset(other, dir_c);
  CHECK(dir_fingerprint(dir_a) != dir_fingerprint(dir_c));

  // Split sizes follow the config; every label is in range.
  CHECK(res_a.manifest.train.size() == 60);
  CHECK(res_a.manifest.dev.size() == 3 * cfg.dev_per_class());
  CHECK(res_a.manifest.test.size() == 60);
  for (Split s : kSplits) {
    for (const auto& ex : res_a.manifest.split(s)) {
      CHECK(ex.label < 3);
    }
  }

  // The manifest on disk loads back identically.
  const LabelSpace labels = load_labels(res_a.labels_file);
  const Manifest loaded = load_manifest(dir_a, "synth", labels);
  CHECK(loaded == res_a.manifest);
}

TEST_CASE("synth parameter validation") {
  SynthConfig cfg;
  cfg.classes = 1;
  CHECK(throws_code(Errc::invalid_input,
                    [&] { synth_dataset(cfg, fresh_dir("synth-bad")); }));
  cfg.classes = 2;
  cfg.noise = 1.5;
  CHECK(throws_code(Errc::invalid_input,
                    [&] { synth_dataset(cfg, fresh_dir("synth-bad")); }));
}
