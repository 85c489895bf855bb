#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace enzyrx {

// Philox4x64-10 counter-based generator (Salmon et al., SC'11). The 128-bit key
// holds (master seed, trial index) verbatim, so distinct (master, trial) pairs
// always give distinct streams, independent of how trials are scheduled.
using PhiloxBlock = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

PhiloxBlock philox4x64_10(PhiloxBlock counter, PhiloxKey key) noexcept;

struct SeedSpec {
  std::uint64_t master = 0;
  std::uint64_t trial = 0;

  PhiloxKey key() const noexcept { return {master, trial}; }
  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

// UniformRandomBitGenerator over the Philox stream of one SeedSpec.
class PhiloxEngine {
public:
  using result_type = std::uint64_t;

  explicit PhiloxEngine(SeedSpec seed) noexcept : key_(seed.key()) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    if (pos_ == 4) {
      block_ = philox4x64_10({counter_++, 0, 0, 0}, key_);
      pos_ = 0;
    }
    return block_[pos_++];
  }

  // Uniform on (0, 1]; never returns 0 so -log(u) is always finite.
  double uniform_pos() noexcept {
    return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double exponential(double rate) noexcept { return -std::log(uniform_pos()) / rate; }

private:
  PhiloxKey key_;
  std::uint64_t counter_ = 0;
  PhiloxBlock block_{};
  int pos_ = 4;
};

}  // namespace enzyrx
