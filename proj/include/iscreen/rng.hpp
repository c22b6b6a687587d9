#pragma once

#include <cstdint>

namespace iscreen {

// SplitMix64 (Steele, Lea & Flood 2014): the state walks a fixed odd constant
// and each output is a bijective mix of the state, so the sequence is
// effectively counter-based and streams can be split deterministically.
// Reference outputs live in docs/rng.md; test vectors are asserted in the
// unit suite.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() { return mix(state_ += kGamma); }

  // Uniform in [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // +1 or -1 with equal probability.
  int next_sign() { return (next() >> 63) ? -1 : +1; }

  // Uniform in [0, m); m > 0. Fixed-point multiply, bias < 2^-64.
  std::uint64_t next_below(std::uint64_t m) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * m) >> 64);
  }

  // Deterministic child generator for a named stream; independent of any
  // draws made from the child or from other streams.
  SplitMix64 split(std::uint64_t stream) const {
    return SplitMix64(mix(state_ + kGamma * (stream + 1)));
  }

  std::uint64_t state() const { return state_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_;
};

}  // namespace iscreen
