#include "conlab/attacks.hpp"

#include <algorithm>
#include <cmath>

namespace conlab {

TimingCalibration make_calibration(Duration rtt_c, Duration rtt_s, Duration epsilon, Duration per_hop_rtt) {
  if (rtt_c >= rtt_s)
    throw CalibrationError("calibration failed: rtt_c=" + format_us(rtt_c) + "us is not below rtt_s=" +
                           format_us(rtt_s) + "us");
  if (epsilon <= Duration{0}) throw CalibrationError("epsilon must be positive");
  return {rtt_c, rtt_s, epsilon, per_hop_rtt};
}

std::string_view to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::CachedAtClosest: return "cached_at_closest";
    case VerdictKind::CachedUpstream: return "cached_upstream";
    case VerdictKind::NotCached: return "not_cached";
  }
  return "unknown";
}

CacheVerdict classify(const TimingCalibration& cal, Duration rtt_t) {
  auto abs_diff = [](Duration a, Duration b) { return a > b ? a - b : b - a; };
  CacheVerdict v;
  if (abs_diff(rtt_t, cal.rtt_c) < cal.epsilon) {
    v.kind = VerdictKind::CachedAtClosest;
    return v;
  }
  if (abs_diff(rtt_t, cal.rtt_s) < cal.epsilon) {
    v.kind = VerdictKind::NotCached;
    return v;
  }
  if (rtt_t > cal.rtt_c && rtt_t < cal.rtt_s) {
    v.kind = VerdictKind::CachedUpstream;
    if (cal.per_hop_rtt > Duration{0}) {
      v.ratio = static_cast<double>((rtt_t - cal.rtt_c).count()) / static_cast<double>(cal.per_hop_rtt.count());
      v.hops = static_cast<std::uint32_t>(std::max(1.0, std::round(v.ratio)));
    }
    return v;
  }
  v.kind = VerdictKind::NotCached;
  v.anomaly = true;
  return v;
}

Duration per_hop_round_trip(Duration link_latency, Duration processing) { return 2 * (link_latency + processing); }

Duration per_hop_round_trip(const Network& net, NodeId adversary, const Name& name) {
  const auto routers = net.router_path(adversary, name);
  if (routers.empty()) return Duration{0};
  NodeId next;
  if (routers.size() >= 2) {
    next = routers[1];
  } else {
    auto producer = net.producer_for(name);
    if (!producer) return Duration{0};
    next = *producer;
  }
  const auto face = net.topology().face_to(routers[0], next);
  if (!face) return Duration{0};
  return per_hop_round_trip(net.topology().port(routers[0], *face).latency, net.scenario().params.processing);
}

namespace {

Duration median(std::vector<Duration> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2;
}

Duration probe(Network& net, NodeId node, const Name& name) {
  Interest i;
  i.name = name;
  auto rtt = net.measure_rtt(node, i, net.now());
  if (!rtt) throw CalibrationError("calibration probe for " + name.to_string() + " timed out");
  return *rtt;
}

}  // namespace

TimingCalibration calibrate(Network& net, NodeId adversary, const Name& cached_ref,
                            std::span<const Name> source_refs, Duration epsilon, Duration per_hop_rtt) {
  const std::size_t samples = net.scenario().params.jitter > Duration{0} ? 5 : 1;
  if (source_refs.size() < samples)
    throw std::invalid_argument("calibrate: need " + std::to_string(samples) + " uncached source names");
  probe(net, adversary, cached_ref);
  std::vector<Duration> cached, source;
  for (std::size_t i = 0; i < samples; ++i) cached.push_back(probe(net, adversary, cached_ref));
  for (std::size_t i = 0; i < samples; ++i) source.push_back(probe(net, adversary, source_refs[i]));
  return make_calibration(median(cached), median(source), epsilon, per_hop_rtt);
}

CacheVerdict ground_truth(const Network& net, NodeId adversary, const Name& name) {
  const auto routers = net.router_path(adversary, name);
  CacheVerdict v;
  for (std::size_t i = 0; i < routers.size(); ++i) {
    if (!net.router(routers[i]).cs().contains(name)) continue;
    if (i == 0) {
      v.kind = VerdictKind::CachedAtClosest;
    } else {
      v.kind = VerdictKind::CachedUpstream;
      v.hops = static_cast<std::uint32_t>(i);
    }
    return v;
  }
  return v;
}

Scores score(std::span<const std::pair<VerdictKind, VerdictKind>> predicted_vs_truth) {
  Scores s;
  for (auto kind : {VerdictKind::CachedAtClosest, VerdictKind::CachedUpstream, VerdictKind::NotCached})
    s.per_class[kind];
  for (const auto& [predicted, truth] : predicted_vs_truth) {
    ++s.total;
    ++s.per_class[predicted].predicted;
    ++s.per_class[truth].actual;
    if (predicted == truth) {
      ++s.correct;
      ++s.per_class[truth].true_positive;
    }
  }
  return s;
}

double jaccard(const std::set<Name>& a, const std::set<Name>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& n : a) common += b.contains(n);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

namespace {

NodeId required(const std::optional<NodeId>& id, const char* what) {
  if (!id) throw ScenarioError(std::string("attack needs ") + what);
  return *id;
}

struct CalibrationNames {
  Name cached;
  std::vector<Name> sources;
};

CalibrationNames calibration_names(const Name& prefix) {
  CalibrationNames n{prefix.append("cal-c"), {}};
  for (int i = 0; i < 5; ++i) n.sources.push_back(prefix.append("cal-s" + std::to_string(i)));
  return n;
}

}  // namespace

TimingReport run_timing_attack(const Scenario& scenario) {
  const AttackConfig& cfg = scenario.attack;
  const NodeId adversary = required(cfg.adversary, "an adversary");
  const NodeId closest = required(cfg.victim_closest, "victim_closest");
  const NodeId distant = required(cfg.victim_distant, "victim_distant");
  if (cfg.target_prefix.is_root()) throw ScenarioError("timing attack needs target_prefix");
  if (!scenario.covering_entry(cfg.target_prefix.append("t0")))
    throw ScenarioError("catalog must serve names under " + cfg.target_prefix.to_string());

  Scenario base = scenario;
  base.schedule.clear();
  const CalibrationNames cal_names = calibration_names(cfg.target_prefix);

  Duration per_hop;
  TimingReport report;
  {
    Scenario plain = base;
    plain.defense = DefenseConfig{};
    Network net(plain);
    per_hop = per_hop_round_trip(net, adversary, cal_names.cached);
    const Duration eps = cfg.epsilon ? *cfg.epsilon
                                     : Duration{static_cast<Duration::rep>(
                                           std::llround(cfg.epsilon_fraction * static_cast<double>(per_hop.count()) / 2.0))};
    report.prior = calibrate(net, adversary, cal_names.cached, cal_names.sources, eps, per_hop);
  }

  std::vector<VerdictKind> classes;
  for (std::size_t i = 0; i < cfg.trials; ++i)
    classes.push_back(static_cast<VerdictKind>(i % 3));
  Rng order(derive_seed(scenario.params.seed, 0x74696d65));
  for (std::size_t i = classes.size(); i > 1; --i) std::swap(classes[i - 1], classes[order.uniform_int(0, i - 1)]);

  std::vector<std::pair<VerdictKind, VerdictKind>> pairs;
  for (std::size_t t = 0; t < classes.size(); ++t) {
    Scenario trial = base;
    trial.params.seed = derive_seed(scenario.params.seed, 0x747269616c, t);
    Network net(trial);
    TimingTrial rec;
    rec.index = t;
    rec.target = cfg.target_prefix.append("t" + std::to_string(t));

    TimingCalibration cal;
    try {
      cal = calibrate(net, adversary, cal_names.cached, cal_names.sources, report.prior.epsilon, per_hop);
    } catch (const CalibrationError&) {
      cal = report.prior;
      rec.used_prior = true;
      ++report.calibration_failures;
    }

    if (classes[t] != VerdictKind::NotCached) {
      Interest i;
      i.name = rec.target;
      const NodeId victim = classes[t] == VerdictKind::CachedAtClosest ? closest : distant;
      net.run_until_resolved(net.request(victim, i, net.now() + 1ms));
    }
    rec.truth = ground_truth(net, adversary, rec.target);

    Interest i;
    i.name = rec.target;
    rec.rtt = net.measure_rtt(adversary, i, net.now() + 1ms);
    if (rec.rtt) {
      rec.verdict = classify(cal, *rec.rtt);
    } else {
      rec.verdict.anomaly = true;
    }
    pairs.emplace_back(rec.verdict.kind, rec.truth.kind);
    report.trials.push_back(std::move(rec));
  }
  report.scores = score(pairs);
  return report;
}

std::vector<MonitorProbe> schedule_monitor(Network& net, NodeId adversary, const Name& m, std::uint32_t scope,
                                           Duration period, SimTime start, SimTime horizon) {
  if (scope < 1) throw std::invalid_argument("monitor: scope must be at least 1");
  if (period <= Duration{0}) throw std::invalid_argument("monitor: period must be positive");
  std::vector<MonitorProbe> probes;
  const Duration lifetime = std::min(period, net.scenario().params.pit_lifetime);
  for (SimTime t = std::max(start, net.now()); t < horizon; t += period) {
    Interest i;
    i.name = m;
    i.scope = scope;
    probes.push_back({net.request(adversary, i, t, lifetime), t});
  }
  return probes;
}

std::optional<SimTime> first_fetch(Network& net, std::span<const MonitorProbe> probes) {
  for (const auto& p : probes) {
    net.run_until_resolved(p.id);
    if (net.record(p.id).satisfied) return p.at;
  }
  return std::nullopt;
}

std::optional<SimTime> monitor_content(Network& net, NodeId adversary, const Name& m, std::uint32_t scope,
                                       Duration period, SimTime start, SimTime horizon) {
  const auto probes = schedule_monitor(net, adversary, m, scope, period, start, horizon);
  return first_fetch(net, probes);
}

MonitorReport run_monitor(const Scenario& scenario) {
  const AttackConfig& cfg = scenario.attack;
  const NodeId adversary = required(cfg.adversary, "an adversary");
  if (cfg.target.is_root()) throw ScenarioError("monitor attack needs a target");
  Scenario base = scenario;
  base.schedule.clear();
  Network net(base);
  MonitorReport report;
  report.target = cfg.target;
  report.probes = schedule_monitor(net, adversary, cfg.target, cfg.scope, cfg.period, cfg.start, cfg.horizon);
  for (const auto& req : scenario.schedule) net.request(req.consumer, req.interest, req.at, req.lifetime);
  report.first_fetch_time = first_fetch(net, report.probes);
  for (const auto& p : report.probes) report.satisfied.push_back(net.record(p.id).satisfied.has_value());
  return report;
}

DumpResult dump_cache(Network& net, NodeId adversary, const Name& prefix, std::uint32_t scope,
                      std::optional<Duration> probe_timeout) {
  if (scope < 1) throw std::invalid_argument("dump: scope must be at least 1");
  DumpResult result;
  const NodeId first = net.first_hop(adversary);
  for (const auto& n : net.router(first).cs().names())
    if (is_prefix_of(prefix, n)) result.snapshot.insert(n);

  Interest i;
  i.name = prefix;
  i.scope = scope;
  for (;;) {
    i.nonce = 0;
    const RequestId id = net.request(adversary, i, net.now(), probe_timeout);
    ++result.probes;
    net.run_until_resolved(id);
    const auto& rec = net.record(id);
    if (!rec.satisfied || !rec.data_name) break;
    result.recovered.insert(*rec.data_name);
    result.order.push_back(*rec.data_name);
    i.exclusions.insert(*rec.data_name);
  }
  for (const auto& n : result.recovered)
    if (!result.snapshot.contains(n)) result.inserted_during.insert(n);
  return result;
}

DumpResult run_dump(const Scenario& scenario) {
  const AttackConfig& cfg = scenario.attack;
  const NodeId adversary = required(cfg.adversary, "an adversary");
  Network net(scenario);
  net.run_until(cfg.start);
  return dump_cache(net, adversary, cfg.prefix, cfg.scope);
}

}  // namespace conlab
