#include "capfuse/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "capfuse/binio.hpp"
#include "capfuse/error.hpp"
#include "capfuse/hash.hpp"
#include "capfuse/rng.hpp"

#include <nlohmann/json.hpp>

namespace capfuse {

namespace {

constexpr char kMagic[4] = {'L', 'P', 'R', 'B'};
constexpr std::uint32_t kVersion = 1;

bool is_pow2(std::uint32_t v) { return v != 0 && (v & (v - 1)) == 0; }

// log(sum(exp(z))) and the index-y term, max-subtracted.
double log_sum_exp(const Logits& z) {
  double m = z[0];
  for (double x : z) m = std::max(m, x);
  double s = 0.0;
  for (double x : z) s += std::exp(x - m);
  return m + std::log(s);
}

void check_dataset(const Dataset& data, std::size_t classes, std::uint32_t feature_dim) {
  for (const auto& ex : data) {
    if (ex.y >= classes) {
      fail(Errc::out_of_range, "label " + std::to_string(ex.y) + " with C = " +
                                   std::to_string(classes));
    }
    if (ex.x.dim != feature_dim) {
      fail(Errc::dimension_mismatch, "feature dim " + std::to_string(ex.x.dim) +
                                         " vs probe dim " + std::to_string(feature_dim));
    }
  }
}

}  // namespace

FeatureVector FeatureVector::dense(std::span<const double> values) {
  FeatureVector out;
  out.dim = static_cast<std::uint32_t>(values.size());
  out.entries.reserve(values.size());
  for (std::uint32_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) out.entries.emplace_back(i, values[i]);
  }
  return out;
}

FeatureVector featurize_text(std::string_view text, std::uint32_t feature_dim) {
  if (feature_dim < 256 || !is_pow2(feature_dim)) {
    fail(Errc::invalid_input, "feature dim must be a power of two >= 256, got " +
                                  std::to_string(feature_dim));
  }
  const std::vector<std::string> tokens = tokenize(text);
  std::vector<std::pair<std::uint32_t, double>> raw;
  raw.reserve(tokens.size() * 2);
  auto add = [&](std::uint64_t h) {
    const auto bucket = static_cast<std::uint32_t>(h & (feature_dim - 1));
    const double sign = (h >> 63) ? -1.0 : 1.0;
    raw.emplace_back(bucket, sign);
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add(fnv1a64(tokens[i]));
    if (i + 1 < tokens.size()) {
      add(fnv1a64(tokens[i + 1], fnv1a64("\x1f", fnv1a64(tokens[i]))));
    }
  }
  std::sort(raw.begin(), raw.end());

  FeatureVector out;
  out.dim = feature_dim;
  double sq = 0.0;
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < raw.size() && raw[j].first == raw[i].first) sum += raw[j++].second;
    if (sum != 0.0) {
      out.entries.emplace_back(raw[i].first, sum);
      sq += sum * sum;
    }
    i = j;
  }
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& [idx, v] : out.entries) v *= inv;
  }
  return out;  // empty text (or full cancellation) stays the zero vector
}

LinearProbe LinearProbe::zeros(LabelSpace labels, std::uint32_t feature_dim) {
  const std::size_t classes = labels.size();
  return LinearProbe{std::move(labels), feature_dim,
                     std::vector<double>(classes * feature_dim, 0.0),
                     std::vector<double>(classes, 0.0)};
}

Logits LinearProbe::logits(const FeatureVector& x) const {
  if (x.dim != feature_dim) {
    fail(Errc::dimension_mismatch, "feature dim " + std::to_string(x.dim) + " vs probe dim " +
                                       std::to_string(feature_dim));
  }
  const std::size_t classes = labels.size();
  Logits z(bias);
  for (std::size_t c = 0; c < classes; ++c) {
    const double* row = weights.data() + c * feature_dim;
    double acc = 0.0;
    for (const auto& [idx, v] : x.entries) acc += row[idx] * v;
    z[c] += acc;
  }
  return z;
}

ProbabilityVector LinearProbe::forward(const FeatureVector& x) const {
  return softmax(logits(x));
}

double mean_cross_entropy(const LinearProbe& probe, const Dataset& data) {
  if (data.empty()) fail(Errc::invalid_input, "empty dataset");
  double total = 0.0;
  for (const auto& ex : data) {
    const Logits z = probe.logits(ex.x);
    total += log_sum_exp(z) - z[ex.y];
  }
  return total / static_cast<double>(data.size());
}

double dataset_accuracy(const LinearProbe& probe, const Dataset& data) {
  if (data.empty()) fail(Errc::invalid_input, "empty dataset");
  std::size_t correct = 0;
  for (const auto& ex : data) {
    const Logits z = probe.logits(ex.x);
    if (argmax(std::span(z)) == ex.y) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

void loss_gradient(const LinearProbe& probe, const Dataset& batch, std::vector<double>& grad_w,
                   std::vector<double>& grad_b) {
  if (batch.empty()) fail(Errc::invalid_input, "empty batch");
  const std::size_t classes = probe.labels.size();
  grad_w.assign(classes * probe.feature_dim, 0.0);
  grad_b.assign(classes, 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    const Logits z = probe.logits(ex.x);
    const ProbabilityVector p = softmax(z);
    for (std::size_t c = 0; c < classes; ++c) {
      const double dz = (p[c] - (c == ex.y ? 1.0 : 0.0)) * inv_n;
      grad_b[c] += dz;
      double* row = grad_w.data() + c * probe.feature_dim;
      for (const auto& [idx, v] : ex.x.entries) row[idx] += dz * v;
    }
  }
}

TrainResult train(const Dataset& data, const LabelSpace& labels, const TrainConfig& cfg,
                  const Dataset* dev) {
  if (data.empty()) fail(Errc::invalid_input, "empty training data");
  if (cfg.learning_rate <= 0.0) fail(Errc::invalid_input, "learning rate must be > 0");
  if (cfg.batch_size < 1) fail(Errc::invalid_input, "batch size must be >= 1");
  if (cfg.epochs < 1) fail(Errc::invalid_input, "epochs must be >= 1");
  const std::uint32_t feature_dim = data.front().x.dim;
  check_dataset(data, labels.size(), feature_dim);
  if (dev) check_dataset(*dev, labels.size(), feature_dim);

  LinearProbe probe = LinearProbe::zeros(labels, feature_dim);
  const std::size_t classes = labels.size();
  const std::size_t param_count = classes * feature_dim + classes;

  std::vector<double> m(param_count, 0.0), v(param_count, 0.0);
  std::vector<double> grad_w, grad_b;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);

  TrainResult result{std::move(probe), {}, 0.0};
  LinearProbe& net = result.probe;
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;

    for (std::size_t start = 0; start < data.size(); start += cfg.batch_size, ++batches) {
      const std::size_t end = std::min(start + cfg.batch_size, data.size());
      Dataset batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);

      const double loss = mean_cross_entropy(net, batch);
      if (!std::isfinite(loss)) {
        fail(Errc::divergence, "loss " + std::to_string(loss) + " at epoch " +
                                   std::to_string(epoch) + ", batch " + std::to_string(batches));
      }
      epoch_loss += loss;
      loss_gradient(net, batch, grad_w, grad_b);

      // Adam with bias correction; full dense update each step.
      ++step;
      const double t = static_cast<double>(step);
      const double corr1 = 1.0 - std::pow(cfg.adam_beta1, t);
      const double corr2 = 1.0 - std::pow(cfg.adam_beta2, t);
      auto update = [&](double& param, double g, std::size_t slot) {
        m[slot] = cfg.adam_beta1 * m[slot] + (1.0 - cfg.adam_beta1) * g;
        v[slot] = cfg.adam_beta2 * v[slot] + (1.0 - cfg.adam_beta2) * g * g;
        const double m_hat = m[slot] / corr1;
        const double v_hat = v[slot] / corr2;
        param -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
      };
      for (std::size_t i = 0; i < grad_w.size(); ++i) update(net.weights[i], grad_w[i], i);
      for (std::size_t c = 0; c < classes; ++c) {
        update(net.bias[c], grad_b[c], grad_w.size() + c);
      }
    }

    EpochMetrics metrics;
    metrics.train_loss = epoch_loss / static_cast<double>(batches);
    if (dev && !dev->empty()) metrics.dev_accuracy = dataset_accuracy(net, *dev);
    result.epochs.push_back(metrics);
  }

  result.final_train_accuracy = dataset_accuracy(net, data);
  return result;
}

double grad_check(const LinearProbe& probe, const Dataset& batch, double h) {
  std::vector<double> grad_w, grad_b;
  loss_gradient(probe, batch, grad_w, grad_b);

  LinearProbe work = probe;
  double max_rel = 0.0;
  auto probe_param = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = mean_cross_entropy(work, batch);
    param = saved - h;
    const double down = mean_cross_entropy(work, batch);
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t i = 0; i < work.weights.size(); ++i) probe_param(work.weights[i], grad_w[i]);
  for (std::size_t c = 0; c < work.bias.size(); ++c) probe_param(work.bias[c], grad_b[c]);
  return max_rel;
}

void probe_save(const LinearProbe& probe, const TrainConfig& cfg,
                const std::filesystem::path& path) {
  nlohmann::json header{
      {"classes", probe.labels.size()},
      {"feature_dim", probe.feature_dim},
      {"labels", probe.labels.names()},
      {"seed", cfg.seed},
      {"config",
       {{"learning_rate", cfg.learning_rate},
        {"batch_size", cfg.batch_size},
        {"epochs", cfg.epochs},
        {"adam_beta1", cfg.adam_beta1},
        {"adam_beta2", cfg.adam_beta2},
        {"adam_eps", cfg.adam_eps}}},
  };
  const std::string header_bytes = header.dump();

  std::string out;
  out.append(kMagic, 4);
  binio::put_u32(out, kVersion);
  binio::put_u32(out, static_cast<std::uint32_t>(header_bytes.size()));
  out += header_bytes;
  for (double w : probe.weights) binio::put_f32(out, static_cast<float>(w));
  for (double b : probe.bias) binio::put_f32(out, static_cast<float>(b));
  binio::write_file_atomic(path, out);
}

std::pair<LinearProbe, TrainConfig> probe_load(const std::filesystem::path& path) {
  const std::string data = binio::read_file(path);
  binio::Reader r(data, path.string());
  if (r.bytes(4, "magic") != std::string(kMagic, 4)) {
    fail(Errc::bad_magic, path.string() + ": not a probe file");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kVersion) {
    fail(Errc::bad_version, path.string() + ": probe version " + std::to_string(version));
  }
  const std::uint32_t header_len = r.u32("header length");
  const std::string header_bytes = r.bytes(header_len, "json header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_bytes);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, path.string() + ": bad probe header: " + e.what());
  }

  TrainConfig cfg;
  LinearProbe probe = LinearProbe::zeros(
      LabelSpace(header.at("labels").get<std::vector<std::string>>()),
      header.at("feature_dim").get<std::uint32_t>());
  if (header.at("classes").get<std::size_t>() != probe.labels.size()) {
    fail(Errc::count_mismatch, path.string() + ": header class count disagrees with label list");
  }
  cfg.seed = header.at("seed").get<std::uint64_t>();
  const auto& jc = header.at("config");
  cfg.learning_rate = jc.at("learning_rate").get<double>();
  cfg.batch_size = jc.at("batch_size").get<std::size_t>();
  cfg.epochs = jc.at("epochs").get<std::size_t>();
  cfg.adam_beta1 = jc.at("adam_beta1").get<double>();
  cfg.adam_beta2 = jc.at("adam_beta2").get<double>();
  cfg.adam_eps = jc.at("adam_eps").get<double>();

  for (double& w : probe.weights) w = static_cast<double>(r.f32("weights"));
  for (double& b : probe.bias) b = static_cast<double>(r.f32("bias"));
  if (r.remaining() != 0) {
    fail(Errc::count_mismatch, path.string() + ": " + std::to_string(r.remaining()) +
                                   " trailing bytes after parameters");
  }
  return {std::move(probe), cfg};
}

}  // namespace capfuse
