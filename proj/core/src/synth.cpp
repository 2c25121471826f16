#include "capfuse/synth.hpp"

#include <cmath>

#include "capfuse/backend.hpp"
#include "capfuse/bank.hpp"
#include "capfuse/cache_backend.hpp"
#include "capfuse/error.hpp"
#include "capfuse/rng.hpp"

namespace capfuse {

namespace {

const char* kClassTokens[] = {"ember",  "flood", "quake", "storm", "ridge",  "mist",
                              "crater", "surge", "frost", "plume", "drift",  "haze",
                              "spark",  "gale",  "rubble", "ash"};
const char* kDistractors[] = {"road",  "tree",  "sky",    "field", "river", "house",
                              "bridge", "car",  "beach",  "hill",  "cloud", "market",
                              "park",  "tower", "fence",  "boat"};
constexpr std::size_t kBaseTokens = sizeof(kClassTokens) / sizeof(kClassTokens[0]);
constexpr std::size_t kNumDistractors = sizeof(kDistractors) / sizeof(kDistractors[0]);

std::string class_token(std::size_t c) {
  std::string tok = kClassTokens[c % kBaseTokens];
  if (c >= kBaseTokens) tok += std::to_string(c / kBaseTokens);
  return tok;
}

std::string zero_pad(std::size_t value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

SynthResult synth_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.classes < 2) fail(Errc::invalid_input, "synth needs C >= 2");
  if (cfg.per_class < 1) fail(Errc::invalid_input, "synth needs n_per_class >= 1");
  if (cfg.noise < 0.0 || cfg.noise > 1.0) fail(Errc::invalid_input, "noise must be in [0,1]");
  if (cfg.dim < 8) fail(Errc::invalid_input, "synth embedding dim must be >= 8");

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path cache_dir = out_dir / "cache";
  std::filesystem::create_directories(cache_dir);

  std::vector<std::string> tokens;
  std::vector<std::string> class_names;
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    tokens.push_back(class_token(c));
    class_names.push_back(tokens.back());
  }
  LabelSpace labels(class_names);

  MockEmbedder embedder(cfg.dim);
  std::vector<EmbeddingVector> cluster_means;
  cluster_means.reserve(cfg.classes);
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    cluster_means.push_back(embedder.embed(tokens[c]));
  }

  Manifest manifest{cfg.task, labels, {}, {}, {}};
  std::vector<std::pair<std::string, std::string>> captions;
  Rng rng(cfg.seed);
  const double sigma = cfg.spread / std::sqrt(static_cast<double>(cfg.dim));

  for (Split split : kSplits) {
    const std::size_t per_class = split == Split::train  ? cfg.per_class
                                  : split == Split::dev  ? cfg.dev_per_class()
                                                         : cfg.test_per_class();
    std::vector<Example>& rows = manifest.split(split);
    std::vector<std::string> ids;
    std::vector<float> matrix;
    matrix.reserve(cfg.classes * per_class * cfg.dim);

    std::size_t index = 0;
    for (std::size_t c = 0; c < cfg.classes; ++c) {
      for (std::size_t i = 0; i < per_class; ++i, ++index) {
        const std::string id =
            cfg.task + "-" + std::string(split_name(split)) + "-" + zero_pad(index, 5);

        // Caption token is informative with probability 1 - noise, otherwise
        // uniform over all class tokens (no label signal at noise = 1).
        std::size_t caption_class = c;
        if (rng.next_unit() < cfg.noise) {
          caption_class = static_cast<std::size_t>(rng.below(cfg.classes));
        }
        const std::string& distractor = kDistractors[rng.below(kNumDistractors)];
        const std::string caption =
            "a scene with " + tokens[caption_class] + " and " + distractor;

        std::vector<double> v(cluster_means[c].values());
        for (double& x : v) x += sigma * rng.gaussian();
        const EmbeddingVector unit = normalize(EmbeddingVector(std::move(v)));
        for (double x : unit.values()) matrix.push_back(static_cast<float>(x));

        rows.push_back(Example{id, "synth://" + id, std::nullopt, c});
        ids.push_back(id);
        captions.emplace_back(id, caption);
      }
    }

    PhraseBank split_bank(std::move(ids), std::move(matrix), cfg.dim);
    bank_write(split_bank,
               cache_dir / ("image." + std::string(split_name(split)) + ".embk"));
  }

  // Phrase bank for enrichment: class-indicative phrases plus distractor-only
  // filler, all embedded in the same mock space as the image clusters.
  std::vector<std::string> phrases;
  std::vector<std::string> categories;
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    for (const char* pattern : {"%s aftermath", "heavy %s", "%s zone", "%s everywhere"}) {
      std::string p(pattern);
      p.replace(p.find("%s"), 2, tokens[c]);
      phrases.push_back(p);
      categories.push_back("class");
    }
  }
  for (std::size_t d = 0; d < kNumDistractors; ++d) {
    phrases.push_back("quiet " + std::string(kDistractors[d]));
    categories.push_back("filler");
  }
  std::vector<float> bank_matrix;
  bank_matrix.reserve(phrases.size() * cfg.dim);
  for (const auto& p : phrases) {
    for (double x : embedder.embed(p).values()) bank_matrix.push_back(static_cast<float>(x));
  }
  PhraseBank bank(phrases, std::move(bank_matrix), cfg.dim, categories);
  const auto bank_path = out_dir / (cfg.task + ".bank.embk");
  bank_write(bank, bank_path);

  write_caption_cache(cache_dir, captions);
  const auto labels_path = out_dir / (cfg.task + ".labels.txt");
  write_labels(labels, labels_path);
  write_manifest(manifest, out_dir);

  return SynthResult{std::move(manifest), labels_path, cache_dir, bank_path};
}

}  // namespace capfuse
