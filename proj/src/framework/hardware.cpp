#include "tics/framework/hardware.hpp"

namespace tics::framework {

void Hardware::pulse(std::optional<ArrayTime> delivered_at) {
  finish_period();
  clock_.pulse(delivered_at);
  latch({clock_.current_seq(), clock_.now()});
}

RegisterDevice::RegisterDevice(const DeviceSpec& spec) : Hardware(spec.name) {
  for (const auto& p : spec.properties) {
    registers_[p.rca] = Register{p.codec.encode(p.initial), static_cast<std::size_t>(p.codec.bytes), p.writable()};
  }
}

std::optional<simbus::Payload> RegisterDevice::transact(std::uint32_t rca, std::span<const std::uint8_t> request,
                                                        ArrayTime at) {
  namespace proto = simbus::protocol;
  auto it = registers_.find(proto::register_of(rca));
  if (it == registers_.end()) return std::nullopt;
  Register& r = it->second;
  if (request.size() != r.width) return std::nullopt;

  if (!proto::is_write(rca)) return r.value;
  if (!r.writable) return std::nullopt;

  AppliedWrite w{it->first, simbus::Payload(request), std::nullopt, at};
  if (proto::is_latched(rca)) {
    staged_.push_back(w);
  } else {
    r.value = w.payload;
    applied_.push_back(w);
  }
  return w.payload;
}

void RegisterDevice::latch(const TimingEvent& event) {
  for (auto& w : staged_) {
    registers_.at(w.reg).value = w.payload;
    w.event = event.seq;
    applied_.push_back(w);
  }
  staged_.clear();
}

}  // namespace tics::framework
