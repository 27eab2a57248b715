#pragma once

#include <cstdint>
#include <limits>

namespace fpplab {

/// SplitMix64 output finalizer (Steele, Lea, Flood). Bijective on 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Keyed hash used to derive child seeds and counter-based draws.
/// Two rounds of mixing so that nearby seeds and nearby keys decorrelate.
constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t key) noexcept {
  return mix64(mix64(seed ^ mix64(key + kGolden)) + kGolden);
}

/// Maps 64 random bits to a double strictly inside (0, 1).
constexpr double bits_to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Sequential SplitMix64 stream. Satisfies UniformRandomBitGenerator.
///
/// Streams are single-owner. Parallel work derives disjoint children with
/// `split(key)` (or `derive_seed`) rather than sharing one stream.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr RngStream(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept { return mix64(state_ += kGolden); }

  /// Uniform double in (0, 1); never returns 0 or 1.
  constexpr double uniform() noexcept { return bits_to_open_unit((*this)()); }

  /// Child stream keyed by `key`; does not advance this stream.
  [[nodiscard]] constexpr RngStream split(std::uint64_t key) const noexcept {
    return RngStream(hash_combine(state_, key));
  }

  [[nodiscard]] constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Per-trial seed from (master seed, scale, trial index). Independent of the
/// order in which trials are executed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t scale,
                                    std::uint64_t trial) noexcept {
  return hash_combine(hash_combine(master, scale), trial);
}

}  // namespace fpplab
