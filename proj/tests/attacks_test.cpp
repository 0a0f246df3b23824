#include "doctest.h"

#include <algorithm>
#include <sstream>

#include "conlab/attacks.hpp"
#include "conlab/harness.hpp"

using namespace conlab;

namespace {

const TimingCalibration kLineCal{10200us, 50200us, 500us, 20200us};

Scenario two_consumer_line(std::string extra_schedule = {}) {
  return parse_scenario(R"(
[topology]
consumer c1 c2 c3
router R1 R2 R0
producer p
link c1 R1 5ms
link c2 R1 5ms
link c3 R2 5ms
link R1 R0 10ms
link R2 R0 10ms
link R0 p 20ms
[catalog]
prefix /a
prefix /b
prefix /cal
prefix /news
[schedule]
)" + extra_schedule);
}

Interest named(std::string_view n) {
  Interest i;
  i.name = parse_name(n);
  return i;
}

}  // namespace

TEST_CASE("classify examples") {
  CHECK(classify(kLineCal, 10300us).kind == VerdictKind::CachedAtClosest);
  const CacheVerdict up = classify(kLineCal, 30200us);
  CHECK(up.kind == VerdictKind::CachedUpstream);
  // (30.2 - 10.2) / 20.2 rounds to one hop beyond the closest router.
  CHECK(up.hops == 1U);
  CHECK(up.ratio == doctest::Approx(20000.0 / 20200.0));
  CHECK(classify(kLineCal, 50400us).kind == VerdictKind::NotCached);
  CHECK_FALSE(classify(kLineCal, 50400us).anomaly);
  CHECK(classify(kLineCal, 90ms).anomaly);
  CHECK(classify(kLineCal, 5ms).anomaly);
  CHECK(classify(kLineCal, 70600us).kind == VerdictKind::NotCached);
  CHECK(classify(kLineCal, 45ms).hops == 2U);
}

TEST_CASE("calibration errors") {
  CHECK_THROWS_AS(make_calibration(50ms, 10ms, 1ms), CalibrationError);
  CHECK_THROWS_AS(make_calibration(10ms, 10ms, 1ms), CalibrationError);
  CHECK_THROWS_AS(make_calibration(10ms, 50ms, 0ms), CalibrationError);
  CHECK_NOTHROW(make_calibration(10ms, 50ms, 1ms));
}

TEST_CASE("calibrate on a deterministic line") {
  const Scenario s = parse_scenario(R"(
[topology]
consumer c
router R
producer p
link c R 5ms
link R p 20ms
[catalog]
prefix /cal
)");
  Network net(s);
  const std::vector<Name> sources{parse_name("/cal/s0")};
  const TimingCalibration cal = calibrate(net, s.topology.at("c"), parse_name("/cal/c"), sources, 500us);
  CHECK(cal.rtt_c == Duration{10200});
  CHECK(cal.rtt_s == Duration{50200});
  CHECK(cal.epsilon == Duration{500});
  CHECK(per_hop_round_trip(net, s.topology.at("c"), parse_name("/cal/x")) == 2 * (20ms + 100us));
}

TEST_CASE("calibrate with jitter takes medians of five probes") {
  Scenario s = parse_scenario(R"(
[topology]
consumer c
router R
producer p
link c R 5ms
link R p 20ms
[catalog]
prefix /cal
[params]
processing 400us
jitter 300us
seed 5
)");
  Network net(s);
  std::vector<Name> sources;
  for (int i = 0; i < 5; ++i) sources.push_back(parse_name("/cal/s" + std::to_string(i)));
  CHECK_THROWS_AS(calibrate(net, s.topology.at("c"), parse_name("/cal/c"), std::span(sources).first(1), 1ms),
                  std::invalid_argument);
  const TimingCalibration cal = calibrate(net, s.topology.at("c"), parse_name("/cal/c"), sources, 1ms);
  const auto& reqs = net.trace().requests;
  REQUIRE(reqs.size() == 11);
  auto median_of = [&](std::size_t from) {
    std::vector<Duration::rep> v;
    for (std::size_t i = from; i < from + 5; ++i) v.push_back(reqs[i].rtt()->count());
    std::sort(v.begin(), v.end());
    return Duration{v[2]};
  };
  CHECK(cal.rtt_c == median_of(1));
  CHECK(cal.rtt_s == median_of(6));
  bool varied = false;
  for (std::size_t i = 2; i < 6; ++i) varied |= reqs[i].rtt() != reqs[1].rtt();
  CHECK(varied);
}

TEST_CASE("ground truth follows the content stores on the path") {
  Scenario s = two_consumer_line();
  Network net(s);
  const NodeId c1 = s.topology.at("c1");
  CHECK(ground_truth(net, c1, parse_name("/a/x")).kind == VerdictKind::NotCached);
  net.run_until_resolved(net.request(s.topology.at("c3"), named("/a/x"), SimTime{0}));
  const CacheVerdict up = ground_truth(net, c1, parse_name("/a/x"));
  CHECK(up.kind == VerdictKind::CachedUpstream);
  CHECK(up.hops == 1U);
  net.run_until_resolved(net.request(s.topology.at("c2"), named("/a/x"), net.now() + 1ms));
  CHECK(ground_truth(net, c1, parse_name("/a/x")).kind == VerdictKind::CachedAtClosest);
}

TEST_CASE("self-pollution: a second probe always looks cached at the closest router") {
  Scenario s = two_consumer_line();
  Network net(s);
  const NodeId c1 = s.topology.at("c1");
  const std::vector<Name> sources{parse_name("/cal/s0")};
  const TimingCalibration cal = calibrate(net, c1, parse_name("/cal/c"), sources, 1ms, 20200us);
  const auto first = net.measure_rtt(c1, named("/a/fresh"), net.now() + 1ms);
  const auto second = net.measure_rtt(c1, named("/a/fresh"), net.now() + 1ms);
  CHECK(classify(cal, *first).kind == VerdictKind::NotCached);
  CHECK(classify(cal, *second).kind == VerdictKind::CachedAtClosest);
}

TEST_CASE("score and jaccard") {
  using V = VerdictKind;
  const std::vector<std::pair<V, V>> pairs{{V::CachedAtClosest, V::CachedAtClosest},
                                           {V::NotCached, V::CachedUpstream},
                                           {V::NotCached, V::NotCached},
                                           {V::CachedUpstream, V::CachedUpstream}};
  const Scores s = score(pairs);
  CHECK(s.total == 4);
  CHECK(s.correct == 3);
  CHECK(s.accuracy() == doctest::Approx(0.75));
  CHECK(s.per_class.at(V::NotCached).precision() == doctest::Approx(0.5));
  CHECK(s.per_class.at(V::CachedUpstream).recall() == doctest::Approx(0.5));
  CHECK(s.per_class.at(V::CachedAtClosest).recall() == doctest::Approx(1.0));

  const std::set<Name> a{parse_name("/a"), parse_name("/b"), parse_name("/c")};
  const std::set<Name> b{parse_name("/b"), parse_name("/c"), parse_name("/d")};
  CHECK(jaccard(a, b) == doctest::Approx(0.5));
  CHECK(jaccard({}, {}) == doctest::Approx(1.0));
}

TEST_CASE("monitor examples") {
  Scenario s = two_consumer_line("at 3s c2 /news/m\n");
  {
    Network net(two_consumer_line());
    const NodeId c1 = s.topology.at("c1");
    auto probes = schedule_monitor(net, c1, parse_name("/news/m"), 2, 500ms, SimTime{0}, SimTime{10s});
    net.request(s.topology.at("c2"), named("/news/m"), SimTime{3s});
    CHECK(first_fetch(net, probes) == SimTime{3500ms});
  }
  {
    Network net(two_consumer_line());
    CHECK_FALSE(monitor_content(net, s.topology.at("c1"), parse_name("/news/m"), 2, 500ms, SimTime{0}, SimTime{10s})
                    .has_value());
  }
  for (std::uint32_t scope : {1U, 2U}) {
    // Fetched through the other subtree: cached at R0 and R2 only.
    Network net(two_consumer_line());
    const NodeId c1 = s.topology.at("c1");
    auto probes = schedule_monitor(net, c1, parse_name("/news/m"), scope, 500ms, SimTime{0}, SimTime{10s});
    net.request(s.topology.at("c3"), named("/news/m"), SimTime{3s});
    CHECK_FALSE(first_fetch(net, probes).has_value());
  }
}

TEST_CASE("dump examples") {
  const std::string warm = "at 0s c2 /a/1\nat 100ms c2 /a/2\nat 200ms c2 /b/1\n";
  {
    Network net(two_consumer_line(warm));
    net.run_until(SimTime{1s});
    const DumpResult r = dump_cache(net, net.topology().at("c1"), parse_name("/a"), 2);
    CHECK(r.recovered == std::set<Name>{parse_name("/a/1"), parse_name("/a/2")});
    CHECK(r.probes == 3);
    CHECK(r.snapshot == r.recovered);
    CHECK(r.inserted_during.empty());
  }
  {
    Network net(two_consumer_line(warm));
    net.run_until(SimTime{1s});
    const DumpResult r = dump_cache(net, net.topology().at("c1"), parse_name("/"), 2);
    CHECK(r.recovered == net.router(net.topology().at("R1")).cs().names());
    CHECK(r.probes == 4);
    CHECK(r.order == std::vector<Name>{parse_name("/a/1"), parse_name("/a/2"), parse_name("/b/1")});
  }
  {
    Network net(two_consumer_line());
    const DumpResult r = dump_cache(net, net.topology().at("c1"), parse_name("/"), 2);
    CHECK(r.recovered.empty());
    CHECK(r.probes == 1);
  }
}

TEST_CASE("property: 100% accuracy for any epsilon below half the per-hop round trip") {
  Scenario s = load_scenario(CONLAB_SOURCE_DIR "/scenarios/reference_tree.conf");
  s.attack.trials = 30;
  Rng rng(8);
  for (int round = 0; round < 6; ++round) {
    s.attack.epsilon_fraction = 0.01 + 0.98 * rng.uniform01();
    s.params.seed = rng.next();
    const TimingReport r = run_timing_attack(s);
    CHECK(r.scores.accuracy() == doctest::Approx(1.0));
    CHECK(r.calibration_failures == 0);
  }
}
