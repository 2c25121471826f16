#include "capfuse/error.hpp"

namespace capfuse {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_input: return "invalid input";
    case Errc::degenerate_vector: return "degenerate vector";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::out_of_range: return "out of range";
    case Errc::io: return "io error";
    case Errc::parse: return "parse error";
    case Errc::unknown_label: return "unknown label";
    case Errc::duplicate_id: return "duplicate id";
    case Errc::bad_magic: return "bad magic";
    case Errc::bad_version: return "version mismatch";
    case Errc::truncated: return "truncated payload";
    case Errc::count_mismatch: return "count mismatch";
    case Errc::missing_entry: return "missing entry";
    case Errc::http_status: return "http error status";
    case Errc::timeout: return "network timeout";
    case Errc::malformed_response: return "malformed response";
    case Errc::divergence: return "non-finite loss";
    case Errc::missing_artifact: return "missing artifact";
    case Errc::misaligned_ids: return "misaligned ids";
    case Errc::config: return "config error";
  }
  return "unknown error";
}

}  // namespace capfuse
