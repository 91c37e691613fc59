#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace prefdiff {

// Deterministic substreams: every stochastic component draws from a stream
// keyed by (seed, stream id), so results do not depend on thread count or
// scheduling. Distributions are implemented here rather than taken from
// <random> because the standard ones are implementation-defined.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(~stream));
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : gen_(key) {}
  RngStream(std::uint64_t seed, std::uint64_t stream) : gen_(stream_key(seed, stream)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

  // Unbiased integer in [0, n). Multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(gen_()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t cutoff = (0 - n) % n;
      while (lo < cutoff) {
        m = static_cast<unsigned __int128>(gen_()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller. A pair of values costs two uniforms;
  // no spare is cached, so stream consumption is a pure function of the
  // call sequence.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  void fill_normal(std::span<double> out) {
    std::size_t i = 0;
    while (i + 1 < out.size()) {
      const double u1 = uniform_pos();
      const double u2 = uniform();
      const double r = std::sqrt(-2.0 * std::log(u1));
      out[i] = r * std::cos(2.0 * M_PI * u2);
      out[i + 1] = r * std::sin(2.0 * M_PI * u2);
      i += 2;
    }
    if (i < out.size()) out[i] = normal();
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// Fixed stream ids. Chain streams are shared between the unconditional and
// guided samplers so that w = 0 reproduces the unconditional chain exactly.
namespace stream_id {
inline constexpr std::uint64_t kModelInit = 1;
inline constexpr std::uint64_t kEpochShuffle = 2;
inline constexpr std::uint64_t kTrainNoise = 3;
inline constexpr std::uint64_t kValNoise = 4;
inline constexpr std::uint64_t kPairDraw = 11;
inline constexpr std::uint64_t kPairNoise = 12;
inline constexpr std::uint64_t kPairVal = 13;
inline constexpr std::uint64_t kDatasetRow = 1u << 20;
inline constexpr std::uint64_t kDatasetSplit = 5;
inline constexpr std::uint64_t kPruneSplit = 6;
inline constexpr std::uint64_t kChain = 1u << 24;
inline constexpr std::uint64_t kHypervolumeMc = 7;
}  // namespace stream_id

}  // namespace prefdiff
