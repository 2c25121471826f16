#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "capfuse/types.hpp"

namespace capfuse {

// One dataset row. The image is an opaque reference handed to backends;
// the caption column fills in mid-pipeline. An empty caption field is
// normalized to nullopt so the write/load round-trip is an identity.
struct Example {
  std::string id;
  std::string image_ref;
  std::optional<std::string> caption;
  std::size_t label = 0;

  bool operator==(const Example&) const = default;
};

enum class Split { train, dev, test };
inline constexpr Split kSplits[] = {Split::train, Split::dev, Split::test};
std::string_view split_name(Split s);
std::optional<Split> split_from_name(std::string_view name);

struct Manifest {
  std::string task;
  LabelSpace labels;
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;

  const std::vector<Example>& split(Split s) const;
  std::vector<Example>& split(Split s);

  bool operator==(const Manifest&) const = default;
};

// Label-space file: one class name per line, order defines the index.
LabelSpace load_labels(const std::filesystem::path& path);
void write_labels(const LabelSpace& labels, const std::filesystem::path& path);

// Split files are named `<task>.<split>.tsv` with a header row
// `id<TAB>image_ref<TAB>caption<TAB>label`. Labels are stored as names and
// matched case-sensitively against the LabelSpace.
std::filesystem::path manifest_split_path(const std::filesystem::path& dir,
                                          const std::string& task, Split s);

std::vector<Example> load_manifest_split(const std::filesystem::path& file,
                                         const LabelSpace& labels);

// Loads all three splits. Empty train/test splits are legal but reported
// through `warnings` when provided.
Manifest load_manifest(const std::filesystem::path& dir, const std::string& task,
                       const LabelSpace& labels,
                       std::vector<std::string>* warnings = nullptr);

void write_manifest(const Manifest& manifest, const std::filesystem::path& dir);

}  // namespace capfuse
