#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace kbnn {

using Rng = std::mt19937_64;

/// Independent named sub-stream of a master seed ("init", "shuffle", "split", "noise", ...).
inline Rng make_stream(std::uint64_t seed, std::string_view name) {
  // FNV-1a keeps the mapping stable across platforms, unlike std::hash.
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

}  // namespace kbnn
