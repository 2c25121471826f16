#include "capfuse/binio.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "capfuse/error.hpp"

namespace capfuse::binio {

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

Reader::Reader(std::string_view data, std::string origin)
    : data_(data), origin_(std::move(origin)) {}

void Reader::require(std::size_t n, const char* what) {
  if (remaining() < n) {
    fail(Errc::truncated, origin_ + ": reading " + what + " needs " + std::to_string(n) +
                              " bytes at offset " + std::to_string(offset_) + ", only " +
                              std::to_string(remaining()) + " of " + std::to_string(data_.size()) +
                              " total bytes remain");
  }
}

std::uint32_t Reader::u32(const char* what) {
  require(4, what);
  const auto* p = reinterpret_cast<const unsigned char*>(data_.data()) + offset_;
  offset_ += 4;
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float Reader::f32(const char* what) { return std::bit_cast<float>(u32(what)); }

std::string Reader::bytes(std::size_t n, const char* what) {
  require(n, what);
  std::string out(data_.substr(offset_, n));
  offset_ += n;
  return out;
}

void Reader::skip(std::size_t n, const char* what) {
  require(n, what);
  offset_ += n;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  std::string out;
  in.seekg(0, std::ios::end);
  out.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0);
  in.read(out.data(), static_cast<std::streamsize>(out.size()));
  if (!in && out.size() != 0) fail(Errc::io, "short read on " + path.string());
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io, "cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::io, "short write on " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(Errc::io, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace capfuse::binio
