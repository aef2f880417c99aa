#pragma once

// Simulated hardware behind the device controllers. Every hardware device is
// a CAN slave and also receives the timing pulse directly, out of band.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tics/framework/registry.hpp"
#include "tics/simbus.hpp"
#include "tics/timebase.hpp"

namespace tics::framework {

class Hardware : public simbus::Endpoint {
 public:
  explicit Hardware(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  /// Gives the device the array time of one timing event.
  void sync(std::uint64_t seq, ArrayTime tai) { clock_.sync(seq, tai); }

  /// A timing pulse edge. Staged register writes take effect here.
  void pulse(std::optional<ArrayTime> delivered_at = std::nullopt);

  const SlaveClock& clock() const { return clock_; }

 protected:
  /// Called before the pulse is counted, with the interval that is ending.
  virtual void finish_period() {}
  virtual void latch(const TimingEvent& event) = 0;

 private:
  std::string name_;
  SlaveClock clock_;
};

struct AppliedWrite {
  std::uint32_t reg = 0;
  simbus::Payload payload;
  std::optional<std::uint64_t> event;  // pulse that latched it; empty for immediate writes
  ArrayTime at;
};

/// Plain register-file device: every configured property is one register.
/// Immediate writes apply when the frame arrives; latched writes wait for the
/// next pulse.
class RegisterDevice : public Hardware {
 public:
  explicit RegisterDevice(const DeviceSpec& spec);

  std::optional<simbus::Payload> transact(std::uint32_t rca, std::span<const std::uint8_t> request,
                                          ArrayTime at) override;

  const simbus::Payload& value(std::uint32_t reg) const { return registers_.at(reg).value; }

  /// Overwrites a register from the device side (sensor readings).
  void set_register(std::uint32_t reg, simbus::Payload value) { registers_.at(reg).value = value; }

  const std::vector<AppliedWrite>& applied() const { return applied_; }
  std::size_t staged() const { return staged_.size(); }

 protected:
  void latch(const TimingEvent& event) override;

 private:
  struct Register {
    simbus::Payload value;
    std::size_t width = 0;
    bool writable = false;
  };

  std::map<std::uint32_t, Register> registers_;
  std::vector<AppliedWrite> staged_;
  std::vector<AppliedWrite> applied_;
};

}  // namespace tics::framework
