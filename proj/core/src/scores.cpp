#include "capfuse/scores.hpp"

#include <charconv>
#include <fstream>

#include "capfuse/binio.hpp"
#include "capfuse/error.hpp"
#include "capfuse/tsv.hpp"

namespace capfuse {

namespace {

// Shortest representation that parses back to the identical double.
std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& origin, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    fail(Errc::parse, origin + ":" + std::to_string(line_no) + ": bad number \"" +
                          std::string(s) + "\"");
  }
  return v;
}

}  // namespace

void scores_write(const ScoreTable& scores, const std::filesystem::path& path) {
  if (scores.ids.size() != scores.rows.size()) {
    fail(Errc::count_mismatch, "score table has " + std::to_string(scores.ids.size()) +
                                   " ids and " + std::to_string(scores.rows.size()) + " rows");
  }
  std::string out = "id";
  for (std::size_t c = 0; c < scores.classes; ++c) out += "\tp_" + std::to_string(c);
  out.push_back('\n');
  for (std::size_t i = 0; i < scores.ids.size(); ++i) {
    if (scores.rows[i].size() != scores.classes) {
      fail(Errc::count_mismatch, "row " + std::to_string(i) + " has " +
                                     std::to_string(scores.rows[i].size()) + " entries, expected " +
                                     std::to_string(scores.classes));
    }
    out += tsv::escape(scores.ids[i]);
    for (std::size_t c = 0; c < scores.classes; ++c) {
      out.push_back('\t');
      out += format_double(scores.rows[i][c]);
    }
    out.push_back('\n');
  }
  binio::write_file_atomic(path, out);
}

ScoreTable scores_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  const std::string origin = path.string();

  std::string line;
  if (!std::getline(in, line)) fail(Errc::parse, origin + ": empty score file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = tsv::split(line);
  if (header.size() < 2 || header[0] != "id") {
    fail(Errc::parse, origin + ":1: expected header id\\tp_0\\t...");
  }
  ScoreTable table;
  table.classes = header.size() - 1;
  for (std::size_t c = 0; c < table.classes; ++c) {
    if (header[c + 1] != "p_" + std::to_string(c)) {
      fail(Errc::parse, origin + ":1: column " + std::to_string(c + 1) + " is \"" +
                            header[c + 1] + "\", expected p_" + std::to_string(c));
    }
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = tsv::split(line);
    if (fields.size() != table.classes + 1) {
      fail(Errc::parse, origin + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(table.classes + 1) + " columns, got " +
                            std::to_string(fields.size()));
    }
    table.ids.push_back(tsv::unescape(fields[0], origin, line_no));
    std::vector<double> row(table.classes);
    for (std::size_t c = 0; c < table.classes; ++c) {
      row[c] = parse_double(fields[c + 1], origin, line_no);
    }
    table.rows.push_back(ProbabilityVector::exact(std::move(row)));
  }
  return table;
}

}  // namespace capfuse
