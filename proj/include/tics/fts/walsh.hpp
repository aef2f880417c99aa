#pragma once

// Phase switching patterns. Each antenna's synthesizer steps through a
// four-valued phase sequence built from one Walsh function used twice: once
// on a fast 250 us grid (180 degree steps, period 16 ms) and once stretched
// by 64 on a slow 16 ms grid (90 degree steps, period 1.024 s).

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tics/timebase.hpp"

namespace tics::fts {

using namespace std::chrono_literals;

inline constexpr Nanos kSwitchSlot = 250us;
inline constexpr std::size_t kFastSlots = 64;
inline constexpr std::size_t kPatternSlots = kFastSlots * kFastSlots;  // 4096
inline constexpr Nanos kFastPeriod = kFastSlots * kSwitchSlot;           // 16 ms
inline constexpr Nanos kPatternPeriod = kPatternSlots * kSwitchSlot;     // 1.024 s
static_assert(kFastPeriod == 16ms);
static_assert(kPatternPeriod == 1024ms);

/// Walsh function k of length n in natural (Hadamard) order:
/// w_k[i] = (-1)^popcount(k & i). `n` must be a power of two and k < n.
std::vector<int> walsh(std::uint32_t k, std::uint32_t n);

struct PhaseSwitchPattern {
  int walsh_index = 0;
  std::array<std::uint8_t, kPatternSlots> quadrants{};  // 0..3, in units of 90 degrees

  std::uint8_t quadrant(std::size_t slot) const { return quadrants[slot % kPatternSlots]; }
  bool operator==(const PhaseSwitchPattern&) const = default;
};

/// Pattern for walsh index 1..63: quadrant = 2*fast_bit + slow_bit, where the
/// fast bit follows walsh(k, 64) slot by slot and the slow bit follows the
/// same sequence one element per 64 slots.
PhaseSwitchPattern build_pattern(int walsh_index);

struct GaussianInt {
  std::int64_t re = 0;
  std::int64_t im = 0;

  bool operator==(const GaussianInt&) const = default;
};

/// Sum over slots of exp(i * (phase_a - phase_b)), evaluated exactly on the
/// quadrant lattice. Throws DomainError if the lengths differ.
GaussianInt cross_demod(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
GaussianInt cross_demod(const PhaseSwitchPattern& a, const PhaseSwitchPattern& b);

}  // namespace tics::fts
