#pragma once

// Monitor data path: per-ABM collectors buffer samples, flush them once per
// timing event as numbered batches, and channels fan the batches out to
// subscribers. The archiver is just another subscriber.

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "tics/timebase.hpp"

namespace tics::monitor_stream {

enum class Quality { ok, range, timeout };

std::string_view to_string(Quality q);

struct Sample {
  std::string device;
  std::string property;
  double value = 0.0;
  Quality quality = Quality::ok;
  std::uint64_t event_seq = 0;
  std::int64_t offset_ns = 0;  // from the start of event_seq's period

  bool operator==(const Sample&) const = default;
};

/// Splits a transaction end time into (timing event, offset within its period).
Sample stamp(Sample s, const MasterClock& clock, ArrayTime end);

struct Batch {
  std::string source;
  std::uint64_t batch_seq = 0;
  std::vector<Sample> samples;

  bool operator==(const Batch&) const = default;
};

/// Buffers the samples produced on one real-time computer.
class Collector {
 public:
  explicit Collector(std::string source) : source_(std::move(source)) {}

  const std::string& source() const { return source_; }

  void collect(Sample sample);

  /// Emits the buffer as the next batch. Empty buffers produce no batch and
  /// do not consume a batch number.
  std::optional<Batch> flush(const TimingEvent& event);

  std::size_t buffered() const { return buffer_.size(); }
  std::uint64_t samples_collected() const { return collected_; }
  std::uint64_t next_batch_seq() const { return next_batch_seq_; }

 private:
  std::string source_;
  std::vector<Sample> buffer_;
  std::uint64_t next_batch_seq_ = 0;
  std::uint64_t collected_ = 0;
};

/// Receives the batches a channel publishes after the subscription was made.
class Subscription {
 public:
  bool empty() const { return pending_.empty(); }
  std::size_t pending() const { return pending_.size(); }

  /// Pops the oldest undelivered batch.
  std::optional<Batch> next();

  std::uint64_t delivered() const { return delivered_; }

 private:
  friend class Channel;
  std::deque<Batch> pending_;
  std::uint64_t delivered_ = 0;
};

class Channel {
 public:
  explicit Channel(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  std::shared_ptr<Subscription> subscribe();
  void publish(const Batch& batch);

  std::uint64_t batches_published() const { return published_batches_; }
  std::uint64_t samples_published() const { return published_samples_; }

 private:
  std::string name_;
  std::vector<std::weak_ptr<Subscription>> subscribers_;
  std::uint64_t published_batches_ = 0;
  std::uint64_t published_samples_ = 0;
};

/// Named channels, created on first use.
class ChannelHub {
 public:
  Channel& channel(const std::string& name);
  std::shared_ptr<Subscription> subscribe(const std::string& name) { return channel(name).subscribe(); }
  const std::map<std::string, std::unique_ptr<Channel>>& channels() const { return channels_; }

 private:
  std::map<std::string, std::unique_ptr<Channel>> channels_;
};

inline constexpr std::string_view kArchiveHeader = "event_seq,offset_ns,device,property,value,quality";

/// Archive record for one sample, without the trailing newline.
std::string format_record(const Sample& s);

/// Writes archive records to a text sink. The header is written on
/// construction, so an archive with no samples is still a valid file.
class Archiver {
 public:
  explicit Archiver(std::ostream& sink);

  /// Drains everything pending on `subscription`; returns the records written
  /// by this call. Throws IoError if the sink fails, after which `partial()`
  /// is set.
  std::uint64_t archive(Subscription& subscription);

  std::uint64_t records() const { return records_; }
  bool partial() const { return partial_; }

 private:
  std::ostream& sink_;
  std::uint64_t records_ = 0;
  bool partial_ = false;
};

}  // namespace tics::monitor_stream
