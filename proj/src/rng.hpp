#pragma once

#include <cstdint>

namespace encls {

// Deterministic 64-bit generator used by every randomized component.
// The stream is fixed by specification so that results are reproducible
// across platforms and compilers:
//   state  = splitmix64(seed)          (one step, 0 remapped to a constant)
//   next() = xorshift64*:  x ^= x>>12; x ^= x<<25; x ^= x>>27;
//            return x * 0x2545F4914F6CDD1D
// Bounded draws use the 128-bit multiply-shift reduction, doubles take the
// top 53 bits. Do not replace any of this with <random> facilities; their
// distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    state_ = z ^ (z >> 31);
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ull;
  }

  uint64_t next_u64() {
    uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1Dull;
  }

  // Uniform-ish draw in [0, n); n must be positive.
  uint64_t next_below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool next_bool() { return (next_u64() >> 63) != 0; }

 private:
  uint64_t state_;
};

}  // namespace encls
