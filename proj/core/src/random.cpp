#include "gpest/random.hpp"

#include <random>
#include <stdexcept>

namespace gpest {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {
  counter_[2] = static_cast<std::uint32_t>(stream);
  counter_[3] = static_cast<std::uint32_t>(stream >> 32);
}

Philox4x32::Block Philox4x32::encrypt(Block ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

Philox4x32::result_type Philox4x32::operator()() {
  if (next_ == 2) {
    buffer_ = encrypt(counter_, key_);
    // 64-bit block counter in the low two words; the stream id stays fixed.
    if (++counter_[0] == 0) {
      if (++counter_[1] == 0) {
        throw std::overflow_error("Philox4x32: block counter exhausted for this stream");
      }
    }
    next_ = 0;
  }
  const auto lo = static_cast<std::uint64_t>(buffer_[2 * next_]);
  const auto hi = static_cast<std::uint64_t>(buffer_[2 * next_ + 1]);
  ++next_;
  return lo | (hi << 32);
}

double RandomSource::standard_normal() {
  return normal_(engine_);
}

std::int64_t RandomSource::poisson(double mean) {
  if (!(mean >= 0.0)) {
    throw std::domain_error("poisson: mean must be non-negative");
  }
  if (mean == 0.0) {
    return 0;
  }
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(engine_);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace gpest
