#include "doctest.h"

#include <map>
#include <sstream>

#include "conlab/harness.hpp"
#include "conlab/simnet.hpp"

using namespace conlab;

namespace {

const char* kLine = R"(
[topology]
consumer c
router R
producer p
link c R 5ms
link R p 20ms
[catalog]
object /a/1
object /a/2
[schedule]
at 0s c /a/1
at 1s c /a/1
[params]
processing 100us
)";

std::string csv(const Trace& t) {
  std::ostringstream out;
  t.write_csv(out);
  return out.str();
}

std::size_t count_action(const Trace& t, std::string_view action, std::optional<NodeId> node = std::nullopt) {
  std::size_t n = 0;
  for (const auto& e : t.events)
    if (e.action == action && (!node || e.node == *node)) ++n;
  return n;
}

}  // namespace

TEST_CASE("line topology round trips") {
  const Scenario s = parse_scenario(kLine);
  const Trace t = run(s);
  REQUIRE(t.requests.size() == 2);
  const Duration p = s.params.processing;
  // Cold: both links twice, one router processing the interest and the data.
  CHECK(*t.requests[0].rtt() == 2 * (5ms + 20ms) + 2 * p);
  CHECK_FALSE(t.requests[0].from_cache);
  // Warm: edge link twice, the router answers from its store.
  CHECK(*t.requests[1].rtt() == 2 * 5ms + 2 * p);
  CHECK(t.requests[1].from_cache);
  CHECK(*t.requests[0].rtt() == Duration{50200});
  CHECK(*t.requests[1].rtt() == Duration{10200});
}

TEST_CASE("measure_rtt and the timeout sentinel") {
  Scenario s = parse_scenario(kLine);
  s.schedule.clear();
  Network net(s);
  const NodeId c = net.topology().at("c");
  Interest i;
  i.name = parse_name("/a/2");
  CHECK(net.measure_rtt(c, i, SimTime{0}) == Duration{50200});
  CHECK(net.measure_rtt(c, i, SimTime{1s}) == Duration{10200});
  i.name = parse_name("/zzz");
  CHECK_FALSE(net.measure_rtt(c, i, SimTime{2s}).has_value());
}

TEST_CASE("empty schedule gives an empty trace") {
  Scenario s = parse_scenario(kLine);
  s.schedule.clear();
  const Trace t = run(s);
  CHECK(t.events.empty());
  CHECK(t.requests.empty());
  CHECK(csv(t) == std::string(Trace::kHeader) + "\n");
}

TEST_CASE("anonymity set sizes") {
  const Scenario tree = load_scenario(CONLAB_SOURCE_DIR "/scenarios/reference_tree.conf");
  const Topology& t = tree.topology;
  CHECK(anonymity_set(t, t.at("R1")) == 2);
  CHECK(anonymity_set(t, t.at("R2")) == 2);
  CHECK(anonymity_set(t, t.at("R0")) == 4);

  const Scenario star = parse_scenario(R"(
[topology]
consumer a b c
router E
producer p
link a E 1ms
link b E 1ms
link c E 1ms
link E p 1ms
[catalog]
object /x
)");
  CHECK(anonymity_set(star.topology, star.topology.at("E")) == 3);
}

TEST_CASE("anonymity set agrees with path enumeration") {
  const Scenario tree = load_scenario(CONLAB_SOURCE_DIR "/scenarios/reference_tree.conf");
  const Topology& t = tree.topology;
  const NodeId p = t.at("p");
  for (NodeId r : t.of_kind(NodeKind::Router)) {
    std::size_t expected = 0;
    for (NodeId c : t.of_kind(NodeKind::Consumer)) {
      const auto path = t.shortest_path(c, p);
      REQUIRE(path.has_value());
      if (std::find(path->begin(), path->end(), r) != path->end()) ++expected;
    }
    CHECK(anonymity_set(t, r) == expected);
  }
}

TEST_CASE("property: with caching off, RTT is twice the path latency plus per-router processing") {
  Rng rng(31);
  for (int round = 0; round < 25; ++round) {
    // Random router tree rooted at R0, producer on R0, consumers on random routers.
    const std::size_t routers = rng.uniform_int(1, 6);
    const Duration proc{static_cast<Duration::rep>(rng.uniform_int(0, 500))};
    std::ostringstream text;
    text << "[topology]\nproducer p\n";
    for (std::size_t r = 0; r < routers; ++r) text << "router R" << r << "\n";
    std::vector<std::size_t> parent(routers, 0);
    std::vector<Duration> up(routers);
    const Duration root_link{static_cast<Duration::rep>(rng.uniform_int(1, 30000))};
    text << "link p R0 " << root_link.count() << "us\n";
    for (std::size_t r = 1; r < routers; ++r) {
      parent[r] = rng.uniform_int(0, r - 1);
      up[r] = Duration{static_cast<Duration::rep>(rng.uniform_int(1, 30000))};
      text << "link R" << parent[r] << " R" << r << " " << up[r].count() << "us\n";
    }
    const std::size_t consumers = rng.uniform_int(1, 4);
    std::vector<std::size_t> at(consumers);
    std::vector<Duration> edge(consumers);
    for (std::size_t c = 0; c < consumers; ++c) {
      at[c] = rng.uniform_int(0, routers - 1);
      edge[c] = Duration{static_cast<Duration::rep>(rng.uniform_int(1, 30000))};
      text << "consumer c" << c << "\nlink c" << c << " R" << at[c] << " " << edge[c].count() << "us\n";
    }
    text << "[catalog]\nprefix /d\n[schedule]\n";
    for (std::size_t c = 0; c < consumers; ++c) text << "at " << c << "s c" << c << " /d/x\n";
    text << "[params]\ncache_capacity 0\nprocessing " << proc.count() << "us\n";

    const Trace t = run(parse_scenario(text.str()));
    for (std::size_t c = 0; c < consumers; ++c) {
      Duration one_way = edge[c] + root_link;
      std::size_t hops = 1;
      for (std::size_t r = at[c]; r != 0; r = parent[r]) {
        one_way += up[r];
        ++hops;
      }
      REQUIRE(t.requests[c].rtt().has_value());
      CHECK(*t.requests[c].rtt() == 2 * one_way + 2 * static_cast<Duration::rep>(hops) * proc);
    }
  }
}

TEST_CASE("run is deterministic") {
  const Scenario s = load_scenario(CONLAB_SOURCE_DIR "/scenarios/reference_tree.conf");
  CHECK(csv(run(s)) == csv(run(s)));
  Scenario jittered = s;
  jittered.params.jitter = 50us;
  CHECK(csv(run(jittered)) == csv(run(jittered)));
}

TEST_CASE("conservation: every delivery answers one issued request") {
  const Scenario s = load_scenario(CONLAB_SOURCE_DIR "/scenarios/reference_tree.conf");
  const Trace t = run(s);
  std::size_t satisfied = 0;
  for (const auto& r : t.requests) {
    CHECK_FALSE((r.satisfied && r.timed_out));
    if (r.satisfied) {
      ++satisfied;
      CHECK(r.data_name.has_value());
      CHECK(is_prefix_of(r.interest.name, *r.data_name));
      CHECK(*r.satisfied >= r.issued);
    }
  }
  CHECK(count_action(t, "deliver") == satisfied);
  // A consumer accepts the first matching data; later copies of the same name are leftovers.
  for (const auto& e : t.events) {
    if (e.action != "unsolicited") continue;
    bool earlier = false;
    for (const auto& r : t.requests)
      earlier |= r.consumer == e.node && r.satisfied && *r.satisfied <= e.time && r.data_name &&
                 r.data_name->to_string() == e.name;
    CHECK(earlier);
  }
}

TEST_CASE("disconnected topologies are rejected") {
  const Scenario s = parse_scenario(R"(
[topology]
consumer c d
router R1 R2
producer p q
link c R1 1ms
link R1 p 1ms
link d R2 1ms
link R2 q 1ms
[catalog]
object /a/1 producer=p
)");
  CHECK_THROWS_AS(Network{s}, ScenarioError);
}

TEST_CASE("scope never carries an interest past its budget") {
  const Scenario s = parse_scenario(R"(
[topology]
consumer c d
router R1 R2
producer p
link c R1 1ms
link d R2 1ms
link R1 R2 1ms
link R2 p 1ms
[catalog]
object /a/1
[schedule]
at 0s d /a/1
at 1s c /a/1 scope=2
at 2s c /a/1 scope=1
at 6s c /a/1 scope=3
)");
  const Trace t = run(s);
  const NodeId r1 = s.topology.at("R1");
  CHECK(t.requests[1].timed_out);  // cached only at R2, budget ends at R1
  CHECK(t.requests[2].timed_out);
  CHECK(t.requests[3].satisfied.has_value());
  CHECK(t.requests[3].origin == s.topology.at("R2"));
  std::size_t forwards_before_6s = 0;
  for (const auto& e : t.events)
    if (e.node == r1 && e.action == "forward_interest" && e.time < SimTime{6s}) ++forwards_before_6s;
  CHECK(forwards_before_6s == 0);
  bool local_drop = false;
  for (const auto& e : t.events)
    if (e.action == "drop" && e.detail == "reason=scope_local" && e.time == SimTime{2s}) local_drop = true;
  CHECK(local_drop);
}

TEST_CASE("scenario errors") {
  Scenario s = parse_scenario(kLine);
  Interest i;
  i.name = parse_name("/nowhere");
  ScheduledRequest r;
  r.consumer = s.topology.at("c");
  r.interest = i;
  s.schedule.push_back(r);
  CHECK_THROWS_AS(Network{s}, ScenarioError);
}

TEST_CASE("same-name burst collapses to one upstream interest") {
  std::ostringstream text;
  text << "[topology]\nrouter R\nproducer p\nlink R p 10ms\n";
  for (int c = 0; c < 10; ++c) text << "consumer c" << c << "\nlink c" << c << " R 1ms\n";
  text << "[catalog]\nobject /burst/x\n[schedule]\n";
  for (int c = 0; c < 10; ++c) text << "at " << c * 100 << "us c" << c << " /burst/x\n";
  const Scenario s = parse_scenario(text.str());
  const Trace t = run(s);
  const NodeId r = s.topology.at("R");
  CHECK(count_action(t, "forward_interest", r) == 1);
  CHECK(count_action(t, "collapse_pit", r) == 9);
  CHECK(count_action(t, "deliver") == 10);
  CHECK(count_action(t, "produce") == 1);
}
