// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "depdse/random.hpp"

#include <algorithm>
#include <random>

namespace depdse {
namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline Philox4x32::Counter round(const Philox4x32::Counter& c,
                                 const Philox4x32::Key& k) noexcept {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kM0, c[0], hi0, lo0);
  mulhilo(kM1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) noexcept {
  ctr = round(ctr, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kW0;
    key[1] += kW1;
    ctr = round(ctr, key);
  }
  return ctr;
}

PhiloxEngine::PhiloxEngine(std::uint64_t seed, std::uint64_t stream,
                           std::uint32_t substream) noexcept
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      counter_{0, static_cast<std::uint32_t>(stream),
               static_cast<std::uint32_t>(stream >> 32), substream} {}

PhiloxEngine::result_type PhiloxEngine::operator()() noexcept {
  if (used_ == 4) {
    buffer_ = Philox4x32::block(counter_, key_);
    ++counter_[0];
    used_ = 0;
  }
  return buffer_[static_cast<std::size_t>(used_++)];
}

double PhiloxEngine::uniform() noexcept {
  const std::uint64_t hi = (*this)() >> 5;  // 27 bits
  const std::uint64_t lo = (*this)() >> 6;  // 26 bits
  return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
}

std::array<std::int64_t, 4> draw_multinomial(
    PhiloxEngine& engine, std::int64_t trials,
    const std::array<double, 4>& probs) {
  std::array<std::int64_t, 4> out{};
  double remaining_mass = 0.0;
  for (double p : probs) remaining_mass += std::max(p, 0.0);
  std::int64_t remaining = trials;
  for (std::size_t k = 0; k + 1 < probs.size() && remaining > 0; ++k) {
    const double pk = std::max(probs[k], 0.0);
    double cond = remaining_mass > 0.0 ? pk / remaining_mass : 0.0;
    cond = std::clamp(cond, 0.0, 1.0);
    bool later_mass = false;
    for (std::size_t j = k + 1; j < probs.size(); ++j) {
      later_mass = later_mass || probs[j] > 0.0;
    }
    std::int64_t draw = 0;
    if (cond >= 1.0 || (!later_mass && pk > 0.0)) {
      draw = remaining;
    } else if (cond > 0.0) {
      std::binomial_distribution<std::int64_t> binom(remaining, cond);
      draw = binom(engine);
    }
    out[k] = draw;
    remaining -= draw;
    remaining_mass -= pk;
  }
  out[probs.size() - 1] += remaining;
  return out;
}

}  // namespace depdse
