#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "capfuse/backend.hpp"

namespace capfuse {

// Remote model server speaking the JSON protocol:
//   POST /v1/caption      {"images":[{"id":str,"data_b64":str}]}
//                         -> {"captions":[{"id":str,"text":str}]}
//   POST /v1/embed_text   {"texts":[str]}  -> {"embeddings":[[f32...]]}
//   POST /v1/embed_image  {"images":[{"id":str,"data_b64":str}]}
//                         -> {"embeddings":[[f32...]]}
// Errors come back as {"error":{"code":str,"message":str}} with 4xx/5xx.
// Requests are batched; a batch either fills completely or raises. Transient
// failures (transport errors, 5xx) are retried with exponential backoff;
// permanent failures surface the server message.
struct HttpConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  int connect_timeout_ms = 2000;
  int read_timeout_ms = 10000;
  int retries = 2;       // additional attempts after the first
  int backoff_ms = 200;  // doubled per retry
  std::size_t batch_size = 32;
  std::size_t max_inflight = 4;  // concurrent batches
  std::string bearer_token;      // forwarded as Authorization: Bearer ...
  std::string caption_params_json;  // opaque decode params forwarded per request
};

struct HttpStats {
  std::uint64_t requests = 0;
  std::uint64_t retries = 0;
};

class HttpBackend {
 public:
  explicit HttpBackend(HttpConfig cfg);
  ~HttpBackend();

  std::unique_ptr<CaptionProvider> captioner();
  std::unique_ptr<TextEmbedder> text_embedder(std::size_t expected_dim);
  std::unique_ptr<ImageEmbedder> image_embedder(std::size_t expected_dim);

  HttpStats stats() const;
  void set_logger(std::function<void(const std::string&)> log);

  struct State;  // opaque shared client state

 private:
  std::shared_ptr<State> state_;
};

std::string base64_encode(std::string_view bytes);

}  // namespace capfuse
