#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace gpest {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// The 64-bit key is the user seed and the upper half of the 128-bit counter
/// is a stream id, so every (seed, stream) pair names an independent,
/// reproducible sequence that can be generated on any thread.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// The raw ten-round bijection; exposed for known-answer tests.
  static Block encrypt(Block counter, Key key);

 private:
  Key key_;
  Block counter_{};
  Block buffer_{};
  int next_ = 2;  // 64-bit words consumed from buffer_
};

/// Deterministic random stream for one replicate (or one grid cell).
///
/// Satisfies UniformRandomBitGenerator so it plugs into <random>
/// distributions directly.
class RandomSource {
 public:
  using result_type = Philox4x32::result_type;

  RandomSource(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream), engine_(seed, stream) {}

  static constexpr result_type min() { return Philox4x32::min(); }
  static constexpr result_type max() { return Philox4x32::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  double standard_normal();
  std::int64_t poisson(double mean);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  Philox4x32 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer; used to derive well-separated seeds for sub-streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace gpest
