// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

// Counter-based random streams. Every replicate of a bootstrap or simulation
// owns a stream keyed by (seed, stream, substream), so results do not depend
// on how replicates are scheduled across threads.

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace depdse {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept;
};

/// UniformRandomBitGenerator over a Philox stream: the counter's first word
/// is the block index, the remaining three hold (stream lo, stream hi,
/// substream).
class PhiloxEngine {
 public:
  using result_type = std::uint32_t;

  PhiloxEngine(std::uint64_t seed, std::uint64_t stream,
               std::uint32_t substream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept;

  /// Uniform double on [0, 1) with 53 random bits.
  double uniform() noexcept;

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
};

/// Packs a two-level task index (e.g. grid point, replicate) into a stream id.
constexpr std::uint64_t stream_id(std::uint32_t outer,
                                  std::uint32_t inner) noexcept {
  return (static_cast<std::uint64_t>(outer) << 32) | inner;
}

/// One multinomial draw of `trials` over four cells. Probabilities must be
/// non-negative; they are renormalised by their sum.
std::array<std::int64_t, 4> draw_multinomial(PhiloxEngine& engine,
                                             std::int64_t trials,
                                             const std::array<double, 4>& probs);

}  // namespace depdse
