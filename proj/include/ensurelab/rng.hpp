#pragma once

#include <cstdint>

namespace pp {

// Deterministic generator with identical streams on every platform.
struct Rng {
  std::uint64_t s;
  explicit Rng(std::uint64_t seed) : s(seed * 6364136223846793005ULL + 1442695040888963407ULL) {}
  std::uint64_t next() {
    s ^= s >> 12;
    s ^= s << 25;
    s ^= s >> 27;
    return s * 2685821657736338717ULL;
  }
  // n <= 1 yields 0.
  std::uint64_t below(std::uint64_t n) { return n <= 1 ? 0 : next() % n; }
};

}  // namespace pp
