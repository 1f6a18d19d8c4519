#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sdelab {

// Counter-based random number generation. Every draw is a pure function of
// (base_seed, stream, path, counter), so ensembles are reproducible for any
// worker count and any evaluation order.
namespace rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer (Steele et al. mixing constants).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Origin of one per-(stream, path) Weyl sequence, decorrelated by avalanching
// each key word before the next is folded in.
inline std::uint64_t stream_origin(std::uint64_t seed, std::uint64_t stream,
                                   std::uint64_t path) {
  std::uint64_t s = mix64(seed + kGolden);
  s = mix64(s ^ (stream + kGolden));
  s = mix64(s ^ (path + kGolden));
  return s;
}

// k-th 64-bit word of a stream: SplitMix64 over a Weyl sequence.
inline std::uint64_t word(std::uint64_t origin, std::uint64_t k) {
  return mix64(origin + (k + 1) * kGolden);
}

// Uniform on (0,1]: 53 mantissa bits, never exactly zero.
inline double uniform_pos(std::uint64_t w) {
  return static_cast<double>((w >> 11) + 1) * 0x1.0p-53;
}

// Uniform on [0,1).
inline double uniform(std::uint64_t w) {
  return static_cast<double>(w >> 11) * 0x1.0p-53;
}

// Standard normal pair by Box-Muller from counters (2m, 2m+1).
inline void normal_pair(std::uint64_t origin, std::uint64_t m, double& z0,
                        double& z1) {
  const double u1 = uniform_pos(word(origin, 2 * m));
  const double u2 = uniform(word(origin, 2 * m + 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  z0 = r * std::cos(theta);
  z1 = r * std::sin(theta);
}

// Stream tags keep the Wiener noise of different consumers disjoint.
inline constexpr std::uint64_t kStreamCrn = 0;          // shared across a schedule
inline constexpr std::uint64_t kStreamPerT = 1u << 16;  // + schedule index
inline constexpr std::uint64_t kStreamLimit = 0x4c494d49ULL;   // limit-equation noise
inline constexpr std::uint64_t kStreamGauss = 0x47415553ULL;   // direct Gaussian samples
inline constexpr std::uint64_t kStreamBootstrap = 0x424f4f54ULL;

// Sequential normal generator over one (seed, stream, path) stream; draws the
// Box-Muller pair once and hands out both halves.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t path)
      : origin_(stream_origin(seed, stream, path)) {}

  double next() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    double z0;
    normal_pair(origin_, m_++, z0, spare_);
    have_ = true;
    return z0;
  }

  // k-th uniform word of the same stream, offset so it never collides with
  // the normal counters.
  double uniform_at(std::uint64_t k) const {
    return uniform(word(origin_ ^ 0x5555555555555555ULL, k));
  }

 private:
  std::uint64_t origin_;
  std::uint64_t m_ = 0;
  double spare_ = 0.0;
  bool have_ = false;
};

}  // namespace rng
}  // namespace sdelab
