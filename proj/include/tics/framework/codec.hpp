#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "tics/simbus.hpp"

namespace tics::framework {

/// Payload encoding of one property: a big-endian integer of 1..8 bytes,
/// optionally interpreted as fixed point (value = raw * scale).
struct Codec {
  enum class Type { unsigned_int, signed_int, fixed };

  Type type = Type::unsigned_int;
  int bytes = 4;
  bool is_signed = false;  // fixed only; the integer types fix signedness themselves
  double scale = 1.0;      // fixed only

  bool operator==(const Codec&) const = default;

  bool signed_raw() const { return type == Type::signed_int || (type == Type::fixed && is_signed); }

  /// Throws RangeError if `value` is not representable (non-integral for an
  /// integer codec, or outside the raw range).
  simbus::Payload encode(double value) const;

  /// Throws DomainError if the payload width does not match.
  double decode(std::span<const std::uint8_t> payload) const;

  /// Raw two's-complement integer helpers, exposed for devices that keep
  /// registers as integers.
  simbus::Payload encode_raw(std::int64_t raw) const;
  std::int64_t decode_raw(std::span<const std::uint8_t> payload) const;
};

/// Big-endian helpers for register images.
simbus::Payload pack_be(std::uint64_t value, int bytes);
std::uint64_t unpack_be(std::span<const std::uint8_t> bytes);
std::int64_t sign_extend(std::uint64_t value, int bytes);

}  // namespace tics::framework
