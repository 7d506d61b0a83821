#pragma once

#include <cstdint>
#include <random>

namespace wmc {

/// splitmix64 finalizer; used to derive independent stream seeds from a master seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded random source. Only raw engine output is consumed (no std distributions),
// so a seed reproduces the same stream with any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(mix_seed(seed)) {}

  /// Stream `index` of `master`; distinct indices give unrelated streams.
  static Rng derive(std::uint64_t master, std::uint64_t index) {
    return Rng(mix_seed(master) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t next() { return engine_(); }

  bool bit() {
    if (bits_left_ == 0) {
      bit_buffer_ = engine_();
      bits_left_ = 64;
    }
    const bool b = bit_buffer_ & 1U;
    bit_buffer_ >>= 1;
    --bits_left_;
    return b;
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); n > 0. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Fresh seed for a child component (solver polarity stream, sub-call).
  std::uint64_t split() { return mix_seed(engine_()); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t bit_buffer_ = 0;
  int bits_left_ = 0;
};

}  // namespace wmc
