#include "tics/framework/codec.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "tics/error.hpp"

namespace tics::framework {

simbus::Payload pack_be(std::uint64_t value, int bytes) {
  std::array<std::uint8_t, 8> buf{};
  for (int i = bytes - 1; i >= 0; --i) {
    buf[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(value & 0xFF);
    value >>= 8;
  }
  return simbus::Payload(std::span<const std::uint8_t>(buf.data(), static_cast<std::size_t>(bytes)));
}

std::uint64_t unpack_be(std::span<const std::uint8_t> bytes) {
  std::uint64_t v = 0;
  for (auto b : bytes) v = (v << 8) | b;
  return v;
}

std::int64_t sign_extend(std::uint64_t value, int bytes) {
  if (bytes >= 8) return static_cast<std::int64_t>(value);
  const int shift = 64 - 8 * bytes;
  return static_cast<std::int64_t>(value << shift) >> shift;
}

namespace {

// Raw limits as doubles; exact for everything below 2^53, and the 8-byte
// bounds round outward, which the strict comparisons below account for.
struct RawLimits {
  double lo;
  double hi_exclusive;
};

RawLimits raw_limits(bool is_signed, int bytes) {
  const double span = std::ldexp(1.0, 8 * bytes);
  if (is_signed) return {-span / 2, span / 2};
  return {0.0, span};
}

}  // namespace

simbus::Payload Codec::encode_raw(std::int64_t raw) const {
  if (bytes < 1 || bytes > 8) throw DomainError("codec width must be 1..8 bytes");
  if (bytes < 8) {
    const std::int64_t half = std::int64_t{1} << (8 * bytes - 1);
    const bool ok = signed_raw() ? (raw >= -half && raw < half) : (raw >= 0 && raw < 2 * half);
    if (!ok) throw RangeError("raw value does not fit " + std::to_string(bytes) + " bytes");
  } else if (!signed_raw() && raw < 0) {
    throw RangeError("negative raw value for an unsigned codec");
  }
  return pack_be(static_cast<std::uint64_t>(raw), bytes);
}

std::int64_t Codec::decode_raw(std::span<const std::uint8_t> payload) const {
  if (static_cast<int>(payload.size()) != bytes) throw DomainError("payload width does not match codec");
  const std::uint64_t u = unpack_be(payload);
  return signed_raw() ? sign_extend(u, bytes) : static_cast<std::int64_t>(u);
}

simbus::Payload Codec::encode(double value) const {
  if (!std::isfinite(value)) throw RangeError("value is not finite");
  double raw = value;
  if (type == Type::fixed) {
    raw = std::nearbyint(value / scale);
  } else if (raw != std::trunc(raw)) {
    throw RangeError("integer property given a fractional value");
  }
  const auto lim = raw_limits(signed_raw(), bytes);
  if (raw < lim.lo || raw >= lim.hi_exclusive || raw >= 9.2233720368547758e18) {
    throw RangeError("value does not fit a " + std::to_string(bytes) + "-byte register");
  }
  return encode_raw(static_cast<std::int64_t>(raw));
}

double Codec::decode(std::span<const std::uint8_t> payload) const {
  if (static_cast<int>(payload.size()) != bytes) throw DomainError("payload width does not match codec");
  const std::uint64_t u = unpack_be(payload);
  double raw;
  if (signed_raw()) {
    raw = static_cast<double>(sign_extend(u, bytes));
  } else {
    raw = static_cast<double>(u);
  }
  return type == Type::fixed ? raw * scale : raw;
}

}  // namespace tics::framework
