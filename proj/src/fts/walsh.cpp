#include "tics/fts/walsh.hpp"

#include <bit>

#include "tics/error.hpp"

namespace tics::fts {

std::vector<int> walsh(std::uint32_t k, std::uint32_t n) {
  if (n == 0 || !std::has_single_bit(n)) throw DomainError("walsh length must be a power of two");
  if (k >= n) throw DomainError("walsh index must be below the length");
  std::vector<int> w(n);
  for (std::uint32_t i = 0; i < n; ++i) w[i] = (std::popcount(k & i) % 2 == 0) ? 1 : -1;
  return w;
}

PhaseSwitchPattern build_pattern(int walsh_index) {
  if (walsh_index < 1 || walsh_index >= static_cast<int>(kFastSlots)) {
    throw DomainError("walsh index must be in 1..63");
  }
  const auto w = walsh(static_cast<std::uint32_t>(walsh_index), kFastSlots);
  PhaseSwitchPattern p;
  p.walsh_index = walsh_index;
  for (std::size_t slow = 0; slow < kFastSlots; ++slow) {
    const int slow_bit = w[slow] < 0 ? 1 : 0;
    for (std::size_t fast = 0; fast < kFastSlots; ++fast) {
      const int fast_bit = w[fast] < 0 ? 1 : 0;
      p.quadrants[slow * kFastSlots + fast] = static_cast<std::uint8_t>(2 * fast_bit + slow_bit);
    }
  }
  return p;
}

GaussianInt cross_demod(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw DomainError("patterns differ in slot count");
  // i^d for d = 0..3
  static constexpr std::array<GaussianInt, 4> kUnit{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
  GaussianInt sum;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& u = kUnit[static_cast<std::size_t>((a[i] - b[i]) & 3)];
    sum.re += u.re;
    sum.im += u.im;
  }
  return sum;
}

GaussianInt cross_demod(const PhaseSwitchPattern& a, const PhaseSwitchPattern& b) {
  return cross_demod(std::span<const std::uint8_t>(a.quadrants), std::span<const std::uint8_t>(b.quadrants));
}

}  // namespace tics::fts
