#pragma once

// Model of the antenna CAN bus: a 1 Mbps master/slave polled field bus. The
// bus master issues a request frame, the addressed slave answers with one
// response frame, and nothing else happens on the wire in between.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tics/timebase.hpp"

namespace tics::simbus {

inline constexpr std::uint32_t kIdBits = 29;
inline constexpr std::uint32_t kNodeBits = 11;
inline constexpr std::uint32_t kRcaBits = 18;
inline constexpr std::uint32_t kMaxNode = (1u << kNodeBits) - 1;
inline constexpr std::uint32_t kMaxRca = (1u << kRcaBits) - 1;
inline constexpr std::size_t kMaxPayload = 8;

/// Up to eight data bytes.
class Payload {
 public:
  Payload() = default;
  /// Throws DomainError for more than eight bytes.
  explicit Payload(std::span<const std::uint8_t> bytes);
  static Payload zeros(std::size_t n);

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::span<const std::uint8_t> bytes() const { return {data_.data(), size_}; }
  std::uint8_t operator[](std::size_t i) const { return data_[i]; }

  bool operator==(const Payload& o) const;

 private:
  std::array<std::uint8_t, kMaxPayload> data_{};
  std::size_t size_ = 0;
};

struct CanFrame {
  std::uint32_t id = 0;
  Payload payload;

  std::size_t dlc() const { return payload.size(); }

  /// Throws DomainError if the id does not fit 29 bits.
  static CanFrame make(std::uint32_t id, Payload payload);
};

/// A device register address on the bus: the slave node plus a relative CAN
/// address (RCA) inside that node.
struct NodeAddress {
  std::uint32_t node = 0;
  std::uint32_t rca = 0;

  auto operator<=>(const NodeAddress&) const = default;
};

/// id = node << 18 | rca. Throws DomainError when a field is out of range.
std::uint32_t encode_id(NodeAddress addr);
NodeAddress decode_id(std::uint32_t id);

/// Request/response conventions of the in-house slave protocol, carried in
/// the upper bits of the 18-bit RCA.
namespace protocol {
inline constexpr std::uint32_t kRegisterMask = 0xFFFF;
inline constexpr std::uint32_t kLatchFlag = 1u << 16;  // hold the write until the next timing pulse
inline constexpr std::uint32_t kWriteFlag = 1u << 17;  // control (write) rather than monitor (read)

inline constexpr std::uint32_t read_rca(std::uint32_t reg) { return reg & kRegisterMask; }
inline constexpr std::uint32_t write_rca(std::uint32_t reg, bool latched) {
  return (reg & kRegisterMask) | kWriteFlag | (latched ? kLatchFlag : 0u);
}
inline constexpr bool is_write(std::uint32_t rca) { return (rca & kWriteFlag) != 0; }
inline constexpr bool is_latched(std::uint32_t rca) { return (rca & kLatchFlag) != 0; }
inline constexpr std::uint32_t register_of(std::uint32_t rca) { return rca & kRegisterMask; }
}  // namespace protocol

struct BusModel {
  std::int64_t bitrate_bps = 1'000'000;
  std::int64_t frame_overhead_bits = 67;  // extended frame, no bit stuffing
  Nanos response_timeout = std::chrono::milliseconds(1);
};

/// Wire time of one frame, rounded up to whole nanoseconds.
Nanos frame_duration(std::size_t dlc, const BusModel& model);
inline Nanos frame_duration(const CanFrame& frame, const BusModel& model) {
  return frame_duration(frame.dlc(), model);
}

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

/// Upper bound on polled request/response pairs per second when both frames
/// carry `dlc` bytes.
Rational max_polled_ops_per_second(const BusModel& model, std::size_t dlc);

/// A slave on the bus. Returns the response payload, or nothing if the slave
/// does not answer (unknown register, refused write).
class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual std::optional<Payload> transact(std::uint32_t rca, std::span<const std::uint8_t> request,
                                          ArrayTime at) = 0;
};

struct BusTransaction {
  CanFrame request;
  std::optional<CanFrame> response;  // empty on timeout
  ArrayTime start;
  ArrayTime end;

  bool timed_out() const { return !response.has_value(); }
  Nanos duration() const { return end - start; }
};

/// One serialized CAN bus.
class Bus {
 public:
  explicit Bus(BusModel model = {}) : model_(model) {}

  const BusModel& model() const { return model_; }

  /// Registers a slave at `node`, replacing any previous one. The endpoint
  /// must outlive the bus or be detached first.
  void attach(std::uint32_t node, Endpoint& endpoint);
  void detach(std::uint32_t node);

  /// One request/response exchange starting exactly at `at`. Throws BusBusy
  /// if `at` precedes the end of the previous transaction.
  BusTransaction poll(NodeAddress addr, std::span<const std::uint8_t> request, ArrayTime at);

  /// Earliest start time >= `at` that does not overlap the previous transaction.
  ArrayTime next_free(ArrayTime at) const { return at < free_at_ ? free_at_ : at; }
  ArrayTime free_at() const { return free_at_; }

  const std::vector<BusTransaction>& log() const { return log_; }

  /// Total transaction time whose start falls in [from, to).
  Nanos busy_time(ArrayTime from, ArrayTime to) const;

  std::size_t transaction_count() const { return log_.size(); }

 private:
  BusModel model_;
  std::map<std::uint32_t, Endpoint*> endpoints_;
  std::vector<BusTransaction> log_;
  ArrayTime free_at_;
};

}  // namespace tics::simbus
