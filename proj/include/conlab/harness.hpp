#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "conlab/simnet.hpp"

namespace conlab {

// "250" (microseconds), "250us", "1.5ms", "3s". Must land on a whole microsecond.
Duration parse_duration(std::string_view text);

// Scenario text format; see docs/formats.md. Errors carry the line number.
// seed_override replaces the [params] seed before any seeded expansion.
Scenario parse_scenario(std::string_view text, std::optional<std::uint64_t> seed_override = std::nullopt);
// Missing or unreadable file -> std::filesystem::filesystem_error.
Scenario load_scenario(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = std::nullopt);

// Seed from the CONLAB_SEED environment variable, if set and numeric.
std::optional<std::uint64_t> env_seed();

// P(rank r) proportional to 1 / r^exponent, r = 1..catalog_size.
std::vector<double> zipf_probabilities(std::size_t catalog_size, double exponent);
// Zero-based rank indices, one per request.
std::vector<std::size_t> workload_zipf(std::size_t catalog_size, double exponent, std::size_t requests,
                                       std::uint64_t seed);

struct MetricRow {
  std::string metric;
  std::string value;

  bool operator==(const MetricRow&) const = default;
};

struct ExperimentResult {
  std::string scenario_id;
  std::string defense;
  std::string attack;
  std::uint64_t seed = 0;
  std::vector<MetricRow> rows;

  std::optional<std::string> value(std::string_view metric) const;
};

std::string format_metric(double v);

// Runs the schedule, then the configured attack (if any), and collects
// latency, hit ratio, relay, anonymity and attack metrics.
ExperimentResult evaluate(const Scenario& scenario);
// Same, returning the simulation trace as well.
ExperimentResult evaluate(const Scenario& scenario, Trace* trace_out);

// `scenario` with only the defense replaced. Collaborative defenses with no
// members use every router that has a consumer attached.
Scenario with_defense(const Scenario& scenario, DefenseKind kind);
std::vector<ExperimentResult> compare_defenses(const Scenario& scenario, std::span<const DefenseKind> defenses);

constexpr std::string_view kMetricsHeader = "scenario,seed,defense,attack,metric,value";
void write_metrics_csv(std::ostream& out, std::span<const ExperimentResult> results);

// Command-line entry point. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace conlab
