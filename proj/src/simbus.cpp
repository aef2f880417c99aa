#include "tics/simbus.hpp"

#include <algorithm>
#include <numeric>

#include "tics/error.hpp"

namespace tics::simbus {

Payload::Payload(std::span<const std::uint8_t> bytes) {
  if (bytes.size() > kMaxPayload) throw DomainError("CAN payload exceeds 8 bytes");
  std::copy(bytes.begin(), bytes.end(), data_.begin());
  size_ = bytes.size();
}

Payload Payload::zeros(std::size_t n) {
  if (n > kMaxPayload) throw DomainError("CAN payload exceeds 8 bytes");
  Payload p;
  p.size_ = n;
  return p;
}

bool Payload::operator==(const Payload& o) const {
  return size_ == o.size_ && std::equal(data_.begin(), data_.begin() + size_, o.data_.begin());
}

CanFrame CanFrame::make(std::uint32_t id, Payload payload) {
  if (id >= (1u << kIdBits)) throw DomainError("CAN identifier exceeds 29 bits");
  return CanFrame{id, payload};
}

std::uint32_t encode_id(NodeAddress addr) {
  if (addr.node > kMaxNode) throw DomainError("CAN node exceeds 11 bits");
  if (addr.rca > kMaxRca) throw DomainError("relative CAN address exceeds 18 bits");
  return (addr.node << kRcaBits) | addr.rca;
}

NodeAddress decode_id(std::uint32_t id) {
  if (id >= (1u << kIdBits)) throw DomainError("CAN identifier exceeds 29 bits");
  return {id >> kRcaBits, id & kMaxRca};
}

Nanos frame_duration(std::size_t dlc, const BusModel& model) {
  if (model.bitrate_bps <= 0) throw DomainError("bus bitrate must be positive");
  if (dlc > kMaxPayload) throw DomainError("dlc must be in 0..8");
  const std::int64_t bits = model.frame_overhead_bits + 8 * static_cast<std::int64_t>(dlc);
  const std::int64_t scaled = bits * 1'000'000'000;
  return Nanos((scaled + model.bitrate_bps - 1) / model.bitrate_bps);
}

Rational max_polled_ops_per_second(const BusModel& model, std::size_t dlc) {
  if (model.bitrate_bps <= 0) throw DomainError("bus bitrate must be positive");
  if (dlc > kMaxPayload) throw DomainError("dlc must be in 0..8");
  std::int64_t num = model.bitrate_bps;
  std::int64_t den = 2 * (model.frame_overhead_bits + 8 * static_cast<std::int64_t>(dlc));
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

void Bus::attach(std::uint32_t node, Endpoint& endpoint) {
  if (node > kMaxNode) throw DomainError("CAN node exceeds 11 bits");
  endpoints_[node] = &endpoint;
}

void Bus::detach(std::uint32_t node) { endpoints_.erase(node); }

BusTransaction Bus::poll(NodeAddress addr, std::span<const std::uint8_t> request, ArrayTime at) {
  if (at < free_at_) throw BusBusy("bus transaction overlaps the previous one");

  BusTransaction tx;
  tx.request = CanFrame::make(encode_id(addr), Payload(request));
  tx.start = at;

  const ArrayTime request_end = at + frame_duration(tx.request, model_);
  std::optional<Payload> answer;
  if (auto it = endpoints_.find(addr.node); it != endpoints_.end()) {
    answer = it->second->transact(addr.rca, tx.request.payload.bytes(), request_end);
  }

  if (answer) {
    tx.response = CanFrame{tx.request.id, *answer};
    tx.end = request_end + frame_duration(*tx.response, model_);
  } else {
    tx.end = at + model_.response_timeout;
  }

  free_at_ = tx.end;
  log_.push_back(tx);
  return tx;
}

Nanos Bus::busy_time(ArrayTime from, ArrayTime to) const {
  auto first = std::lower_bound(log_.begin(), log_.end(), from,
                                [](const BusTransaction& tx, ArrayTime t) { return tx.start < t; });
  Nanos total{0};
  for (auto it = first; it != log_.end() && it->start < to; ++it) total += it->duration();
  return total;
}

}  // namespace tics::simbus
