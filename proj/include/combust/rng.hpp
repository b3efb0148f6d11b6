#pragma once

// Counter-based splittable random streams. Every stream is derived from a
// root seed plus a purpose tag and up to four integer coordinates, so any
// sub-experiment (a site's particle count, one particle's walk, one trial)
// can be regenerated in isolation. Streams are cheap value types.

#include <cmath>
#include <cstdint>
#include <limits>

namespace combust {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

class RngStream {
 public:
  RngStream() : state_(0x853c49e6748fea9bULL) {}
  explicit RngStream(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0,1); never returns 0 or 1, safe for log().
  double next_double() {
    const std::uint64_t r = next_u64() >> 11;  // 53 bits
    return (static_cast<double>(r) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate = 1.0) { return -std::log(next_double()) / rate; }

  // Uniform over [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Multiply-shift; bias is < 2^-64 per draw, irrelevant at desk scale.
    const unsigned __int128 m =
        static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
    return static_cast<std::uint64_t>(m >> 64);
  }

  double normal() {
    // Box-Muller, one value per pair of uniforms.
    const double u1 = next_double(), u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Stream derivation: hash-chain the seed, a tag and coordinates.
inline RngStream derive_stream(std::uint64_t seed, std::uint64_t tag, std::int64_t a = 0,
                               std::int64_t b = 0, std::int64_t c = 0, std::int64_t d = 0) {
  using detail::mix64;
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc908ULL);
  h = mix64(h ^ tag);
  h = mix64(h ^ static_cast<std::uint64_t>(a));
  h = mix64(h ^ static_cast<std::uint64_t>(b));
  h = mix64(h ^ static_cast<std::uint64_t>(c));
  h = mix64(h ^ static_cast<std::uint64_t>(d));
  return RngStream(h);
}

// Purpose tags for derived streams. Fixed values: reordering them would
// silently change every seeded experiment.
namespace stream_tag {
inline constexpr std::uint64_t eta = 0x01;
inline constexpr std::uint64_t walk = 0x02;
inline constexpr std::uint64_t bulk = 0x03;
inline constexpr std::uint64_t field = 0x04;
inline constexpr std::uint64_t trial = 0x05;
inline constexpr std::uint64_t chain = 0x06;
inline constexpr std::uint64_t inject = 0x07;
}  // namespace stream_tag

}  // namespace combust
