#include "capfuse/http_backend.hpp"

#include <chrono>
#include <future>
#include <map>
#include <mutex>
#include <thread>

#include "capfuse/binio.hpp"
#include "capfuse/error.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace capfuse {

namespace {
using nlohmann::json;
}

std::string base64_encode(std::string_view bytes) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    const std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                            (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                            static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
    i += 3;
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                            (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

struct HttpBackend::State {
  HttpConfig cfg;
  mutable std::mutex mu;
  HttpStats stats;
  std::function<void(const std::string&)> log;

  void note(const std::string& message) const {
    std::lock_guard lock(mu);
    if (log) log(message);
  }

  // POST with bounded retries on transport errors and 5xx. Returns the body
  // of a 200 response; anything else raises the matching error.
  std::string post(const std::string& path, const std::string& body) {
    httplib::Client client(cfg.endpoint);
    client.set_connection_timeout(0, cfg.connect_timeout_ms * 1000);
    client.set_read_timeout(cfg.read_timeout_ms / 1000, (cfg.read_timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!cfg.bearer_token.empty()) {
      headers.emplace("Authorization", "Bearer " + cfg.bearer_token);
    }

    int delay_ms = cfg.backoff_ms;
    std::string last_failure;
    for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
      if (attempt > 0) {
        {
          std::lock_guard lock(mu);
          ++stats.retries;
        }
        note("retry " + std::to_string(attempt) + " for " + path + " after: " + last_failure);
        std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
        delay_ms *= 2;
      }
      {
        std::lock_guard lock(mu);
        ++stats.requests;
      }
      auto res = client.Post(path, headers, body, "application/json");
      if (!res) {
        last_failure = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_failure = "server status " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        // Permanent failure; surface the server's message when present.
        std::string detail = res->body;
        try {
          const json err = json::parse(res->body);
          if (err.contains("error")) {
            detail = err["error"].value("code", "?") + ": " +
                     err["error"].value("message", "");
          }
        } catch (const json::exception&) {
        }
        fail(Errc::http_status, cfg.endpoint + path + " returned " +
                                    std::to_string(res->status) + " (" + detail + ")");
      }
      return res->body;
    }
    fail(Errc::timeout, cfg.endpoint + path + " failed after " +
                            std::to_string(cfg.retries + 1) + " attempts; last: " + last_failure);
  }

  json post_json(const std::string& path, const json& request) {
    const std::string body = post(path, request.dump());
    try {
      return json::parse(body);
    } catch (const json::exception& e) {
      fail(Errc::malformed_response, cfg.endpoint + path + ": " + e.what());
    }
  }

  // Validates an embeddings reply: exactly `count` rows of dimension `dim`.
  std::vector<EmbeddingVector> parse_embeddings(const json& reply, std::size_t count,
                                                std::size_t dim, const std::string& path) {
    if (!reply.contains("embeddings") || !reply["embeddings"].is_array()) {
      fail(Errc::malformed_response, path + ": reply lacks an embeddings array");
    }
    const auto& rows = reply["embeddings"];
    if (rows.size() != count) {
      fail(Errc::count_mismatch, path + ": sent " + std::to_string(count) + " items, got " +
                                     std::to_string(rows.size()) + " embeddings");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(count);
    for (const auto& row : rows) {
      if (!row.is_array()) fail(Errc::malformed_response, path + ": embedding row is not an array");
      if (row.size() != dim) {
        fail(Errc::dimension_mismatch, path + ": embedding of dim " +
                                           std::to_string(row.size()) + ", expected " +
                                           std::to_string(dim));
      }
      std::vector<double> values;
      values.reserve(dim);
      for (const auto& x : row) {
        if (!x.is_number()) fail(Errc::malformed_response, path + ": non-numeric embedding entry");
        values.push_back(x.get<double>());
      }
      out.push_back(EmbeddingVector(std::move(values)));
    }
    return out;
  }

  // Runs `one_batch(begin, end)` over [0, n) in chunks of batch_size, with at
  // most max_inflight batches in flight. Results land by index, so the output
  // order is independent of completion order.
  void for_batches(std::size_t n, const std::function<void(std::size_t, std::size_t)>& one_batch) {
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      ranges.emplace_back(start, std::min(start + cfg.batch_size, n));
    }
    const std::size_t inflight = std::max<std::size_t>(1, cfg.max_inflight);
    for (std::size_t i = 0; i < ranges.size(); i += inflight) {
      std::vector<std::future<void>> wave;
      for (std::size_t j = i; j < std::min(i + inflight, ranges.size()); ++j) {
        wave.push_back(std::async(std::launch::async, [&, j] {
          one_batch(ranges[j].first, ranges[j].second);
        }));
      }
      for (auto& f : wave) f.get();
    }
  }
};

namespace {

json image_items(const std::vector<std::string>& refs, std::size_t begin, std::size_t end) {
  json items = json::array();
  for (std::size_t i = begin; i < end; ++i) {
    items.push_back({{"id", refs[i]}, {"data_b64", base64_encode(binio::read_file(refs[i]))}});
  }
  return items;
}

class HttpCaptioner final : public CaptionProvider {
 public:
  explicit HttpCaptioner(std::shared_ptr<HttpBackend::State> state) : state_(std::move(state)) {}

  BackendInfo info() const override { return {"http-captioner", state_->cfg.endpoint}; }

  std::string caption(const std::string& image_ref) override {
    return caption_batch({image_ref})[0];
  }

  std::vector<std::string> caption_batch(const std::vector<std::string>& refs) override {
    std::vector<std::string> out(refs.size());
    state_->for_batches(refs.size(), [&](std::size_t begin, std::size_t end) {
      json request{{"images", image_items(refs, begin, end)}};
      if (!state_->cfg.caption_params_json.empty()) {
        try {
          request["params"] = json::parse(state_->cfg.caption_params_json);
        } catch (const json::exception& e) {
          fail(Errc::config, std::string("caption params are not valid JSON: ") + e.what());
        }
      }
      const json reply = state_->post_json("/v1/caption", request);
      if (!reply.contains("captions") || !reply["captions"].is_array()) {
        fail(Errc::malformed_response, "/v1/caption reply lacks a captions array");
      }
      if (reply["captions"].size() != end - begin) {
        fail(Errc::count_mismatch, "/v1/caption: sent " + std::to_string(end - begin) +
                                       " images, got " + std::to_string(reply["captions"].size()) +
                                       " captions");
      }
      // Replies may arrive in any order; match on id.
      std::map<std::string, std::string> by_id;
      for (const auto& item : reply["captions"]) {
        if (!item.contains("id") || !item.contains("text")) {
          fail(Errc::malformed_response, "/v1/caption item lacks id/text");
        }
        by_id[item["id"].get<std::string>()] = item["text"].get<std::string>();
      }
      for (std::size_t i = begin; i < end; ++i) {
        const auto it = by_id.find(refs[i]);
        if (it == by_id.end()) {
          fail(Errc::missing_entry, "/v1/caption reply has no caption for \"" + refs[i] + "\"");
        }
        out[i] = it->second;
      }
    });
    return out;
  }

 private:
  std::shared_ptr<HttpBackend::State> state_;
};

class HttpTextEmbedder final : public TextEmbedder {
 public:
  HttpTextEmbedder(std::shared_ptr<HttpBackend::State> state, std::size_t dim)
      : state_(std::move(state)), dim_(dim) {}

  BackendInfo info() const override { return {"http-text-embedder", state_->cfg.endpoint}; }
  std::size_t dim() const override { return dim_; }

  EmbeddingVector embed(const std::string& text) override { return embed_batch({text})[0]; }

  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
    std::vector<EmbeddingVector> out(texts.size());
    state_->for_batches(texts.size(), [&](std::size_t begin, std::size_t end) {
      json request{{"texts", json::array()}};
      for (std::size_t i = begin; i < end; ++i) request["texts"].push_back(texts[i]);
      const json reply = state_->post_json("/v1/embed_text", request);
      auto rows = state_->parse_embeddings(reply, end - begin, dim_, "/v1/embed_text");
      for (std::size_t i = begin; i < end; ++i) out[i] = std::move(rows[i - begin]);
    });
    return out;
  }

 private:
  std::shared_ptr<HttpBackend::State> state_;
  std::size_t dim_;
};

class HttpImageEmbedder final : public ImageEmbedder {
 public:
  HttpImageEmbedder(std::shared_ptr<HttpBackend::State> state, std::size_t dim)
      : state_(std::move(state)), dim_(dim) {}

  BackendInfo info() const override { return {"http-image-embedder", state_->cfg.endpoint}; }
  std::size_t dim() const override { return dim_; }

  EmbeddingVector embed(const std::string& image_ref) override {
    return embed_batch({image_ref})[0];
  }

  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& refs) override {
    std::vector<EmbeddingVector> out(refs.size());
    state_->for_batches(refs.size(), [&](std::size_t begin, std::size_t end) {
      json request{{"images", image_items(refs, begin, end)}};
      const json reply = state_->post_json("/v1/embed_image", request);
      auto rows = state_->parse_embeddings(reply, end - begin, dim_, "/v1/embed_image");
      for (std::size_t i = begin; i < end; ++i) out[i] = std::move(rows[i - begin]);
    });
    return out;
  }

 private:
  std::shared_ptr<HttpBackend::State> state_;
  std::size_t dim_;
};

}  // namespace

HttpBackend::HttpBackend(HttpConfig cfg) : state_(std::make_shared<State>()) {
  if (cfg.endpoint.empty()) fail(Errc::config, "http backend needs an endpoint");
  if (cfg.batch_size < 1) fail(Errc::config, "http batch size must be >= 1");
  state_->cfg = std::move(cfg);
}

HttpBackend::~HttpBackend() = default;

std::unique_ptr<CaptionProvider> HttpBackend::captioner() {
  return std::make_unique<HttpCaptioner>(state_);
}

std::unique_ptr<TextEmbedder> HttpBackend::text_embedder(std::size_t expected_dim) {
  return std::make_unique<HttpTextEmbedder>(state_, expected_dim);
}

std::unique_ptr<ImageEmbedder> HttpBackend::image_embedder(std::size_t expected_dim) {
  return std::make_unique<HttpImageEmbedder>(state_, expected_dim);
}

HttpStats HttpBackend::stats() const {
  std::lock_guard lock(state_->mu);
  return state_->stats;
}

void HttpBackend::set_logger(std::function<void(const std::string&)> log) {
  std::lock_guard lock(state_->mu);
  state_->log = std::move(log);
}

}  // namespace capfuse
