#include "capfuse/manifest.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "capfuse/binio.hpp"
#include "capfuse/error.hpp"
#include "capfuse/tsv.hpp"

namespace capfuse {

namespace {

constexpr std::string_view kHeader = "id\timage_ref\tcaption\tlabel";

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "?";
}

std::optional<Split> split_from_name(std::string_view name) {
  for (Split s : kSplits) {
    if (split_name(s) == name) return s;
  }
  return std::nullopt;
}

const std::vector<Example>& Manifest::split(Split s) const {
  switch (s) {
    case Split::train: return train;
    case Split::dev: return dev;
    case Split::test: return test;
  }
  return train;
}

std::vector<Example>& Manifest::split(Split s) {
  switch (s) {
    case Split::train: return train;
    case Split::dev: return dev;
    case Split::test: return test;
  }
  return train;
}

LabelSpace load_labels(const std::filesystem::path& path) {
  std::vector<std::string> names;
  for (auto& line : read_lines(path)) {
    if (!line.empty()) names.push_back(std::move(line));
  }
  if (names.size() < 2) {
    fail(Errc::parse, path.string() + ": label file must list >= 2 class names");
  }
  return LabelSpace(std::move(names));
}

void write_labels(const LabelSpace& labels, const std::filesystem::path& path) {
  std::string out;
  for (const auto& name : labels.names()) {
    out += name;
    out.push_back('\n');
  }
  binio::write_file_atomic(path, out);
}

std::filesystem::path manifest_split_path(const std::filesystem::path& dir,
                                          const std::string& task, Split s) {
  return dir / (task + "." + std::string(split_name(s)) + ".tsv");
}

std::vector<Example> load_manifest_split(const std::filesystem::path& file,
                                         const LabelSpace& labels) {
  const std::string origin = file.string();
  const std::vector<std::string> lines = read_lines(file);
  if (lines.empty() || lines[0] != kHeader) {
    fail(Errc::parse, origin + ":1: expected header \"id\\timage_ref\\tcaption\\tlabel\"");
  }
  std::vector<Example> out;
  out.reserve(lines.size() - 1);
  std::unordered_set<std::string> ids;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) continue;  // ignore trailing blank lines
    const auto fields = tsv::split(lines[i]);
    if (fields.size() != 4) {
      fail(Errc::parse, origin + ":" + std::to_string(line_no) + ": expected 4 columns, got " +
                            std::to_string(fields.size()));
    }
    Example ex;
    ex.id = tsv::unescape(fields[0], origin, line_no);
    ex.image_ref = tsv::unescape(fields[1], origin, line_no);
    const std::string caption = tsv::unescape(fields[2], origin, line_no);
    if (!caption.empty()) ex.caption = caption;
    const std::string label_name = tsv::unescape(fields[3], origin, line_no);
    const auto label = labels.index_of(label_name);
    if (!label) {
      fail(Errc::unknown_label, origin + ":" + std::to_string(line_no) + ": \"" + label_name +
                                    "\" is not one of the " + std::to_string(labels.size()) +
                                    " class names");
    }
    ex.label = *label;
    if (ex.id.empty()) fail(Errc::parse, origin + ":" + std::to_string(line_no) + ": empty id");
    if (!ids.insert(ex.id).second) {
      fail(Errc::duplicate_id, origin + ":" + std::to_string(line_no) + ": id \"" + ex.id +
                                   "\" seen before in this split");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

Manifest load_manifest(const std::filesystem::path& dir, const std::string& task,
                       const LabelSpace& labels, std::vector<std::string>* warnings) {
  Manifest m{task, labels, {}, {}, {}};
  for (Split s : kSplits) {
    const auto path = manifest_split_path(dir, task, s);
    m.split(s) = load_manifest_split(path, labels);
    if (m.split(s).empty() && s != Split::dev && warnings) {
      warnings->push_back(path.string() + ": split \"" + std::string(split_name(s)) +
                          "\" has 0 examples");
    }
  }
  return m;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (Split s : kSplits) {
    std::string out(kHeader);
    out.push_back('\n');
    for (const Example& ex : manifest.split(s)) {
      out += tsv::join({tsv::escape(ex.id), tsv::escape(ex.image_ref),
                        tsv::escape(ex.caption.value_or("")),
                        tsv::escape(manifest.labels.name(ex.label))});
      out.push_back('\n');
    }
    binio::write_file_atomic(manifest_split_path(dir, manifest.task, s), out);
  }
}

}  // namespace capfuse
