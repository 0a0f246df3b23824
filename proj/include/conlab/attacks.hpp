#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "conlab/simnet.hpp"

namespace conlab {

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TimingCalibration {
  Duration rtt_c{0};
  Duration rtt_s{0};
  Duration epsilon{0};
  Duration per_hop_rtt{0};  // 0 = no distance estimate
};

// Throws CalibrationError unless rtt_c < rtt_s.
TimingCalibration make_calibration(Duration rtt_c, Duration rtt_s, Duration epsilon, Duration per_hop_rtt = {});

enum class VerdictKind { CachedAtClosest, CachedUpstream, NotCached };
std::string_view to_string(VerdictKind kind);

struct CacheVerdict {
  VerdictKind kind = VerdictKind::NotCached;
  std::optional<std::uint32_t> hops;  // CachedUpstream: hops beyond the closest router
  double ratio = 0.0;                 // (rtt_t - rtt_c) / per_hop_rtt
  bool anomaly = false;               // no rule matched

  bool operator==(const CacheVerdict&) const = default;
};

CacheVerdict classify(const TimingCalibration& cal, Duration rtt_t);

// 2 x (link latency + processing).
Duration per_hop_round_trip(Duration link_latency, Duration processing);
// Per-hop round trip above the adversary's first-hop router toward `name`.
Duration per_hop_round_trip(const Network& net, NodeId adversary, const Name& name);

// Fetches cached_ref once to plant it, then probes it and each source_refs
// name. With jitter the medians of 5 probes are used, so 5 source names are
// needed; otherwise one.
TimingCalibration calibrate(Network& net, NodeId adversary, const Name& cached_ref,
                            std::span<const Name> source_refs, Duration epsilon, Duration per_hop_rtt = {});

// Routers between node and producer holding `name`; nearest index first.
CacheVerdict ground_truth(const Network& net, NodeId adversary, const Name& name);

struct ClassScore {
  std::size_t true_positive = 0;
  std::size_t predicted = 0;
  std::size_t actual = 0;
  double precision() const { return predicted ? static_cast<double>(true_positive) / predicted : 0.0; }
  double recall() const { return actual ? static_cast<double>(true_positive) / actual : 0.0; }
};

struct Scores {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::map<VerdictKind, ClassScore> per_class;
  double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

Scores score(std::span<const std::pair<VerdictKind, VerdictKind>> predicted_vs_truth);

double jaccard(const std::set<Name>& a, const std::set<Name>& b);

struct TimingTrial {
  std::size_t index = 0;
  Name target;
  CacheVerdict truth;
  CacheVerdict verdict;
  std::optional<Duration> rtt;
  bool used_prior = false;
};

struct TimingReport {
  TimingCalibration prior;
  std::vector<TimingTrial> trials;
  Scores scores;
  std::size_t calibration_failures = 0;
};

// One fresh network per trial, seeded from the scenario seed and the trial
// index. Truth classes are balanced and shuffled. When a trial's calibration
// fails the attacker uses the calibration measured without any defense.
TimingReport run_timing_attack(const Scenario& scenario);

struct MonitorProbe {
  RequestId id = 0;
  SimTime at{0};
};

// Schedules probes for `m` every `period` from `start` until `horizon`, each
// living for one period.
std::vector<MonitorProbe> schedule_monitor(Network& net, NodeId adversary, const Name& m, std::uint32_t scope,
                                           Duration period, SimTime start, SimTime horizon);
// Runs until the first probe is satisfied; returns its issue time.
std::optional<SimTime> first_fetch(Network& net, std::span<const MonitorProbe> probes);

std::optional<SimTime> monitor_content(Network& net, NodeId adversary, const Name& m, std::uint32_t scope,
                                       Duration period, SimTime start, SimTime horizon);

struct MonitorReport {
  Name target;
  std::vector<MonitorProbe> probes;
  std::vector<bool> satisfied;
  std::optional<SimTime> first_fetch_time;
};

// Probes go ahead of the scenario schedule at equal timestamps.
MonitorReport run_monitor(const Scenario& scenario);

struct DumpResult {
  std::set<Name> recovered;
  std::vector<Name> order;
  std::size_t probes = 0;
  std::set<Name> snapshot;         // first-hop CS entries under prefix at dump start
  std::set<Name> inserted_during;  // recovered but absent from the snapshot
};

DumpResult dump_cache(Network& net, NodeId adversary, const Name& prefix, std::uint32_t scope,
                      std::optional<Duration> probe_timeout = std::nullopt);

// Runs the scenario schedule up to attack.start, then dumps.
DumpResult run_dump(const Scenario& scenario);

}  // namespace conlab
