#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace capfuse {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

// FNV-1a over bytes. The seed parameter lets callers chain hashes.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// Streaming FNV-1a over a file's contents. Throws Errc::io if unreadable.
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

std::string hex64(std::uint64_t value);

// splitmix64 step; used to derive independent seeds from one base seed.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Lowercased runs of alphanumeric bytes; bytes >= 0x80 are kept verbatim
// inside a token. Everything else separates tokens.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace capfuse
