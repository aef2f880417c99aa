#include "tics/monitor_stream.hpp"

#include <array>
#include <charconv>

#include "tics/error.hpp"

namespace tics::monitor_stream {

std::string_view to_string(Quality q) {
  switch (q) {
    case Quality::ok:
      return "ok";
    case Quality::range:
      return "range";
    case Quality::timeout:
      return "timeout";
  }
  return "?";
}

Sample stamp(Sample s, const MasterClock& clock, ArrayTime end) {
  s.event_seq = clock.event_at_or_before(end);
  s.offset_ns = (end - clock.event_time(s.event_seq)).count();
  return s;
}

void Collector::collect(Sample sample) {
  buffer_.push_back(std::move(sample));
  ++collected_;
}

std::optional<Batch> Collector::flush(const TimingEvent&) {
  if (buffer_.empty()) return std::nullopt;
  Batch batch{source_, next_batch_seq_++, std::move(buffer_)};
  buffer_.clear();
  return batch;
}

std::optional<Batch> Subscription::next() {
  if (pending_.empty()) return std::nullopt;
  Batch b = std::move(pending_.front());
  pending_.pop_front();
  ++delivered_;
  return b;
}

std::shared_ptr<Subscription> Channel::subscribe() {
  auto sub = std::make_shared<Subscription>();
  subscribers_.push_back(sub);
  return sub;
}

void Channel::publish(const Batch& batch) {
  ++published_batches_;
  published_samples_ += batch.samples.size();
  std::erase_if(subscribers_, [](const auto& w) { return w.expired(); });
  for (auto& weak : subscribers_) {
    if (auto sub = weak.lock()) sub->pending_.push_back(batch);
  }
}

Channel& ChannelHub::channel(const std::string& name) {
  auto& slot = channels_[name];
  if (!slot) slot = std::make_unique<Channel>(name);
  return *slot;
}

std::string format_record(const Sample& s) {
  std::string line;
  line.reserve(64);
  line += std::to_string(s.event_seq);
  line += ',';
  line += std::to_string(s.offset_ns);
  line += ',';
  line += s.device;
  line += ',';
  line += s.property;
  line += ',';
  if (s.quality != Quality::timeout) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), s.value);
    line.append(buf.data(), end);
  }
  line += ',';
  line += to_string(s.quality);
  return line;
}

Archiver::Archiver(std::ostream& sink) : sink_(sink) {
  sink_ << kArchiveHeader << '\n';
  if (!sink_) {
    partial_ = true;
    throw IoError("archive sink rejected the header");
  }
}

std::uint64_t Archiver::archive(Subscription& subscription) {
  std::uint64_t written = 0;
  while (auto batch = subscription.next()) {
    for (const auto& s : batch->samples) {
      sink_ << format_record(s) << '\n';
      if (!sink_) {
        partial_ = true;
        throw IoError("archive sink write failed after " + std::to_string(records_) + " records");
      }
      ++records_;
      ++written;
    }
  }
  return written;
}

}  // namespace tics::monitor_stream
