#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace capfuse::binio {

// Little-endian primitives appended to a byte buffer.
void put_u32(std::string& out, std::uint32_t v);
void put_f32(std::string& out, float v);

// Cursor over an in-memory file image. All reads do byte accounting and
// throw Errc::truncated with expected-vs-actual counts on underrun.
class Reader {
 public:
  Reader(std::string_view data, std::string origin);

  std::uint32_t u32(const char* what);
  float f32(const char* what);
  std::string bytes(std::size_t n, const char* what);
  void skip(std::size_t n, const char* what);

  // Checks that n bytes remain without consuming them.
  void require_block(std::size_t n, const char* what) { require(n, what); }

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return data_.size() - offset_; }
  const std::string& origin() const { return origin_; }

 private:
  void require(std::size_t n, const char* what);

  std::string_view data_;
  std::size_t offset_ = 0;
  std::string origin_;
};

std::string read_file(const std::filesystem::path& path);

// Writes to `<path>.tmp` then renames, so failures never leave a partial
// file at the final path.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace capfuse::binio
