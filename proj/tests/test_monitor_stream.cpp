#include <doctest.h>

#include <charconv>
#include <map>
#include <sstream>
#include <streambuf>

#include "support.hpp"
#include "tics/error.hpp"
#include "tics/monitor_stream.hpp"

using namespace tics;
using namespace tics::monitor_stream;

namespace {

Sample sample(std::string device, double value, std::uint64_t event, std::int64_t offset = 0) {
  return Sample{std::move(device), "P", value, Quality::ok, event, offset};
}

TimingEvent event(std::uint64_t seq) { return {seq, MasterClock().event_time(seq)}; }

// Accepts `budget` characters, then refuses everything.
class FailingBuf : public std::streambuf {
 public:
  explicit FailingBuf(std::size_t budget) : budget_(budget) {}
  std::string written;

 protected:
  int_type overflow(int_type ch) override {
    if (traits_type::eq_int_type(ch, traits_type::eof())) return traits_type::not_eof(ch);
    if (written.size() >= budget_) return traits_type::eof();
    written.push_back(traits_type::to_char_type(ch));
    return ch;
  }

 private:
  std::size_t budget_;
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("collect keeps arrival order") {
  Collector c("abm1");
  c.collect(sample("A", 1, 0, 10));
  CHECK(c.buffered() == 1);
  c.collect(sample("B", 2, 0, 20));
  c.collect(sample("A", 3, 0, 30));
  const auto b = c.flush(event(0));
  REQUIRE(b);
  REQUIRE(b->samples.size() == 3);
  CHECK(b->samples[0].device == "A");
  CHECK(b->samples[1].device == "B");
  CHECK(b->samples[2].value == 3);
}

TEST_CASE("flush numbers non-empty batches contiguously") {
  Collector c("abm1");
  CHECK_FALSE(c.flush(event(0)));
  CHECK(c.next_batch_seq() == 0);
  for (int i = 0; i < 10; ++i) c.collect(sample("A", i, 1));
  auto b = c.flush(event(1));
  REQUIRE(b);
  CHECK(b->samples.size() == 10);
  CHECK(b->batch_seq == 0);
  CHECK(c.buffered() == 0);
  CHECK_FALSE(c.flush(event(2)));
  c.collect(sample("A", 0, 3));
  CHECK(c.flush(event(3))->batch_seq == 1);
  c.collect(sample("A", 0, 4));
  CHECK(c.flush(event(4))->batch_seq == 2);
  CHECK(c.samples_collected() == 12);
}

TEST_CASE("stamp splits a time into event and offset") {
  MasterClock clock;
  const auto s = stamp(sample("A", 0, 0), clock, clock.event_time(7) + Nanos(262'000));
  CHECK(s.event_seq == 7);
  CHECK(s.offset_ns == 262'000);
  CHECK(stamp(s, clock, clock.event_time(8)).offset_ns == 0);
}

TEST_CASE("subscribers receive published batches in order, once") {
  ChannelHub hub;
  auto first = hub.subscribe("monitor");
  auto second = hub.subscribe("monitor");
  Collector c("abm1");
  for (int i = 0; i < 3; ++i) {
    c.collect(sample("A", i, static_cast<std::uint64_t>(i)));
    hub.channel("monitor").publish(*c.flush(event(static_cast<std::uint64_t>(i))));
  }
  CHECK(first->pending() == 3);
  std::vector<Batch> a, b;
  while (auto x = first->next()) a.push_back(*x);
  while (auto x = second->next()) b.push_back(*x);
  REQUIRE(a.size() == 3);
  CHECK(a == b);
  for (std::uint64_t i = 0; i < 3; ++i) CHECK(a[i].batch_seq == i);
  CHECK_FALSE(first->next());
  CHECK(first->delivered() == 3);
}

TEST_CASE("late subscribers get no replay") {
  ChannelHub hub;
  Collector c("abm1");
  for (std::uint64_t k = 0; k < 4; ++k) {
    c.collect(sample("A", 0, k));
    hub.channel("x").publish(*c.flush(event(k)));
  }
  auto late = hub.subscribe("x");
  c.collect(sample("A", 0, 4));
  hub.channel("x").publish(*c.flush(event(4)));
  REQUIRE(late->pending() == 1);
  CHECK(late->next()->batch_seq == 4);
  CHECK(hub.channel("x").batches_published() == 5);
  CHECK(hub.channel("x").samples_published() == 5);
}

TEST_CASE("dropped subscriptions are forgotten") {
  Channel ch("x");
  auto keep = ch.subscribe();
  { auto gone = ch.subscribe(); }
  ch.publish(Batch{"s", 0, {sample("A", 0, 0)}});
  CHECK(keep->pending() == 1);
}

TEST_CASE("random traffic fans out identically and contiguously") {
  test::Cases cases(40);
  ChannelHub hub;
  std::vector<std::shared_ptr<Subscription>> subs;
  std::vector<Collector> sources{Collector("abm1"), Collector("abm2"), Collector("abm3")};
  std::uint64_t produced = 0;
  for (std::uint64_t seq = 0; seq < 2000; ++seq) {
    if (seq % 500 == 0) subs.push_back(hub.subscribe("monitor"));
    for (auto& c : sources) {
      const auto n = cases.integer(0, 4);
      for (int i = 0; i < n; ++i) c.collect(sample(c.source(), cases.real(-1, 1), seq));
      produced += static_cast<std::uint64_t>(n);
      if (auto b = c.flush(event(seq))) hub.channel("monitor").publish(*b);
    }
  }
  CHECK(hub.channel("monitor").samples_published() == produced);
  std::vector<Batch> reference;
  while (auto b = subs[0]->next()) reference.push_back(*b);
  std::map<std::string, std::uint64_t> expect_seq;
  for (const auto& b : reference) REQUIRE(b.batch_seq == expect_seq[b.source]++);
  for (std::size_t i = 1; i < subs.size(); ++i) {
    std::vector<Batch> got;
    while (auto b = subs[i]->next()) got.push_back(*b);
    REQUIRE(!got.empty());
    // later subscribers see a suffix of the same sequence
    REQUIRE(got.size() <= reference.size());
    CHECK(std::equal(got.begin(), got.end(), reference.end() - static_cast<std::ptrdiff_t>(got.size())));
  }
}

TEST_CASE("archive record format") {
  Sample s{"ANT1/RX", "STAGE_TEMPERATURE", 4.25, Quality::ok, 12, 6400};
  CHECK(format_record(s) == "12,6400,ANT1/RX,STAGE_TEMPERATURE,4.25,ok");
  s.value = 0.1;
  CHECK(format_record(s) == "12,6400,ANT1/RX,STAGE_TEMPERATURE,0.1,ok");
  s.quality = Quality::range;
  s.value = -5.5;
  CHECK(format_record(s) == "12,6400,ANT1/RX,STAGE_TEMPERATURE,-5.5,range");
  s.quality = Quality::timeout;
  CHECK(format_record(s) == "12,6400,ANT1/RX,STAGE_TEMPERATURE,,timeout");
  CHECK(kArchiveHeader == "event_seq,offset_ns,device,property,value,quality");
}

TEST_CASE("archived values read back exactly") {
  test::Cases cases(41);
  for (int i = 0; i < 10'000; ++i) {
    Sample s{"D", "P", cases.real(-1e9, 1e9) * std::ldexp(1.0, static_cast<int>(cases.integer(-60, 0))),
             Quality::ok, 0, 0};
    const auto rec = format_record(s);
    const auto field = rec.substr(8, rec.size() - 8 - 3);
    double back = 0;
    std::from_chars(field.data(), field.data() + field.size(), back);
    REQUIRE(back == s.value);
  }
}

TEST_CASE("an empty run archives a header only") {
  std::ostringstream out;
  ChannelHub hub;
  auto sub = hub.subscribe("monitor");
  Archiver a(out);
  CHECK(a.archive(*sub) == 0);
  CHECK(out.str() == std::string(kArchiveHeader) + "\n");
  CHECK_FALSE(a.partial());
}

TEST_CASE("1e5 samples, 1e5 records") {
  std::ostringstream out;
  ChannelHub hub;
  auto sub = hub.subscribe("monitor");
  Archiver a(out);
  Collector c("abm1");
  std::uint64_t total = 0;
  for (std::uint64_t seq = 0; seq < 1000; ++seq) {
    for (int i = 0; i < 100; ++i) c.collect(sample("A", i, seq, i));
    hub.channel("monitor").publish(*c.flush(event(seq)));
    if (seq % 7 == 0) total += a.archive(*sub);
  }
  total += a.archive(*sub);
  CHECK(total == 100'000);
  CHECK(a.records() == c.samples_collected());
  const auto l = lines(out.str());
  CHECK(l.size() == 100'001);
  CHECK(l[1] == "0,0,A,P,0,ok");
  CHECK(l.back() == "999,99,A,P,99,ok");
}

TEST_CASE("sink failure raises IoError and flags the archive") {
  ChannelHub hub;
  auto sub = hub.subscribe("monitor");
  Collector c("abm1");
  for (int i = 0; i < 50; ++i) c.collect(sample("A", i, 0));
  hub.channel("monitor").publish(*c.flush(event(0)));

  FailingBuf buf(kArchiveHeader.size() + 1 + 100);
  std::ostream sink(&buf);
  Archiver a(sink);
  CHECK_THROWS_AS(a.archive(*sub), IoError);
  CHECK(a.partial());
  CHECK(a.records() < 50);

  FailingBuf none(3);
  std::ostream dead(&none);
  CHECK_THROWS_AS(Archiver{dead}, IoError);
}
