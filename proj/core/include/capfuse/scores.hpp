#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "capfuse/types.hpp"

namespace capfuse {

// Per-example classifier outputs for one system on one split, in manifest
// order. Serialized as TSV `id<TAB>p_0<TAB>...<TAB>p_{C-1}` with 17
// significant digits so the text round-trip is bit-exact.
struct ScoreTable {
  std::size_t classes = 0;
  std::vector<std::string> ids;
  std::vector<ProbabilityVector> rows;

  bool operator==(const ScoreTable&) const = default;
};

void scores_write(const ScoreTable& scores, const std::filesystem::path& path);
ScoreTable scores_read(const std::filesystem::path& path);

}  // namespace capfuse
