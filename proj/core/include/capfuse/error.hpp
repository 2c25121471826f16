#pragma once

#include <stdexcept>
#include <string>

namespace capfuse {

// One value per distinct failure mode named by the API contracts.
enum class Errc {
  invalid_input,
  degenerate_vector,
  dimension_mismatch,
  out_of_range,
  io,
  parse,
  unknown_label,
  duplicate_id,
  bad_magic,
  bad_version,
  truncated,
  count_mismatch,
  missing_entry,
  http_status,
  timeout,
  malformed_response,
  divergence,
  missing_artifact,
  misaligned_ids,
  config,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace capfuse
