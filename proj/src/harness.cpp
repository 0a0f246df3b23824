#include "conlab/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "conlab/attacks.hpp"

namespace conlab {

Duration parse_duration(std::string_view text) {
  std::string_view num = text;
  double scale = 1.0;
  auto ends = [&](std::string_view suffix) {
    return num.size() > suffix.size() && num.substr(num.size() - suffix.size()) == suffix;
  };
  if (ends("us")) {
    num.remove_suffix(2);
  } else if (ends("ms")) {
    num.remove_suffix(2);
    scale = 1e3;
  } else if (ends("s")) {
    num.remove_suffix(1);
    scale = 1e6;
  }
  if (num.empty() || num.find_first_not_of("0123456789.") != std::string_view::npos ||
      std::count(num.begin(), num.end(), '.') > 1 || num.front() == '.' || num.back() == '.')
    throw std::invalid_argument("bad duration '" + std::string(text) + "'");
  // Exact decimal arithmetic: integer part and fraction digits separately.
  const auto dot = num.find('.');
  const std::string whole(num.substr(0, dot));
  const std::string frac = dot == std::string_view::npos ? "" : std::string(num.substr(dot + 1));
  const int unit_digits = scale == 1.0 ? 0 : scale == 1e3 ? 3 : 6;
  if (static_cast<int>(frac.size()) > unit_digits && frac.find_first_not_of('0', unit_digits) != std::string::npos)
    throw std::invalid_argument("duration '" + std::string(text) + "' is not a whole microsecond");
  std::string digits = whole + frac.substr(0, std::min<std::size_t>(frac.size(), unit_digits));
  digits.append(unit_digits - std::min<std::size_t>(frac.size(), unit_digits), '0');
  if (digits.size() > 18) throw std::invalid_argument("duration '" + std::string(text) + "' is too large");
  return Duration{std::stoll(digits)};
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("CONLAB_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  std::uint64_t out = 0;
  const std::string_view s(v);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || p != s.data() + s.size()) throw std::invalid_argument("CONLAB_SEED must be an integer");
  return out;
}

// ---------------------------------------------------------------------------
// Scenario parser

namespace {

struct Line {
  std::size_t number = 0;
  std::vector<std::string> tokens;
};

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.emplace_back(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct ZipfSpec {
  std::size_t line = 0;
  std::vector<NodeId> consumers;
  std::string name_template;
  std::size_t n = 0;
  double exponent = 1.0;
  std::size_t requests = 0;
  SimTime start{0};
  Duration gap = 1ms;
  std::optional<std::uint64_t> seed;
};

Name expand_template(const std::string& tmpl, std::size_t i) {
  std::string text = tmpl;
  const auto pct = text.find('%');
  if (pct != std::string::npos) text.replace(pct, 1, std::to_string(i));
  return Name::parse(text);
}

class Parser {
 public:
  explicit Parser(std::optional<std::uint64_t> seed_override) : seed_override_(seed_override) {}

  Scenario parse(std::string_view text) {
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++number;
      line_ = number;
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      handle(strip_comment(raw));
    }
    finish();
    return std::move(s_);
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("line " + std::to_string(line_) + ": " + why);
  }

  static std::string_view strip_comment(std::string_view raw) {
    for (std::size_t i = 0; i < raw.size(); ++i)
      if (raw[i] == '#' && (i == 0 || raw[i - 1] == ' ' || raw[i - 1] == '\t')) return raw.substr(0, i);
    return raw;
  }

  void handle(std::string_view line) {
    auto tokens = split_ws(line);
    if (tokens.empty()) return;
    if (tokens[0].front() == '[') {
      if (tokens.size() != 1 || tokens[0].back() != ']') fail("malformed section header");
      section_ = tokens[0].substr(1, tokens[0].size() - 2);
      static const std::set<std::string> known{"topology", "catalog", "schedule", "attack", "defense", "params"};
      if (!known.contains(section_))
        fail("unknown section [" + section_ + "]; expected topology, catalog, schedule, attack, defense or params");
      return;
    }
    if (section_.empty()) fail("content before the first section header");
    if (section_ == "topology") topology(tokens);
    else if (section_ == "catalog") catalog(tokens);
    else if (section_ == "schedule") schedule(tokens);
    else if (section_ == "attack") attack(tokens);
    else if (section_ == "defense") defense(tokens);
    else params(tokens);
  }

  // key=value options after the positional tokens.
  std::map<std::string, std::string> options(const std::vector<std::string>& tokens, std::size_t from,
                                             const std::set<std::string>& allowed) {
    std::map<std::string, std::string> out;
    for (std::size_t i = from; i < tokens.size(); ++i) {
      const auto eq = tokens[i].find('=');
      if (eq == std::string::npos || eq == 0) fail("expected key=value, got '" + tokens[i] + "'");
      std::string key = tokens[i].substr(0, eq);
      if (!allowed.contains(key)) fail("unknown option '" + key + "'");
      if (!out.emplace(key, tokens[i].substr(eq + 1)).second) fail("duplicate option '" + key + "'");
    }
    return out;
  }

  std::uint64_t to_uint(const std::string& text) const {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) fail("expected a non-negative integer, got '" + text + "'");
    return v;
  }

  double to_double(const std::string& text) const {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) fail("expected a number, got '" + text + "'");
    return v;
  }

  Duration to_duration(const std::string& text) const {
    try {
      return parse_duration(text);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  Name to_name(const std::string& text) const {
    try {
      return Name::parse(text);
    } catch (const ParseError& e) {
      fail(e.what());
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  NodeId node(const std::string& label, std::optional<NodeKind> kind = std::nullopt) const {
    auto id = s_.topology.find(label);
    if (!id) fail("unknown node '" + label + "'");
    if (kind && s_.topology.node(*id).kind != *kind)
      fail("'" + label + "' is not a " + std::string(to_string(*kind)));
    return *id;
  }

  void topology(const std::vector<std::string>& t) {
    const std::string& kw = t[0];
    if (kw == "consumer" || kw == "router" || kw == "producer") {
      if (t.size() < 2) fail(kw + " needs at least one label");
      const NodeKind kind = kw == "consumer" ? NodeKind::Consumer : kw == "router" ? NodeKind::Router : NodeKind::Producer;
      for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i].find_first_of(",\"=") != std::string::npos) fail("label '" + t[i] + "' contains , \" or =");
        try {
          s_.topology.add_node(t[i], kind);
        } catch (const ScenarioError& e) {
          fail(e.what());
        }
      }
    } else if (kw == "link") {
      if (t.size() != 4) fail("expected 'link <a> <b> <latency>'");
      try {
        s_.topology.add_link(node(t[1]), node(t[2]), to_duration(t[3]));
      } catch (const ScenarioError& e) {
        fail(e.what());
      }
    } else {
      fail("unknown topology statement '" + kw + "'; expected consumer, router, producer or link");
    }
  }

  NodeId producer_option(const std::map<std::string, std::string>& opts) const {
    if (auto it = opts.find("producer"); it != opts.end()) return node(it->second, NodeKind::Producer);
    const auto producers = s_.topology.of_kind(NodeKind::Producer);
    if (producers.size() != 1) fail("producer= is required when there is not exactly one producer");
    return producers.front();
  }

  void catalog(const std::vector<std::string>& t) {
    const std::string& kw = t[0];
    if (kw == "object" || kw == "prefix") {
      if (t.size() < 2) fail(kw + " needs a name");
      auto opts = options(t, 2, {"producer", "size"});
      CatalogEntry e;
      e.name = to_name(t[1]);
      if (e.name.is_root()) fail("catalog names need at least one component");
      e.producer = producer_option(opts);
      if (opts.contains("size")) e.payload_size = to_uint(opts["size"]);
      e.serves_prefix = kw == "prefix";
      s_.catalog.push_back(std::move(e));
    } else if (kw == "generate") {
      if (t.size() < 2) fail("generate needs a name template");
      auto opts = options(t, 2, {"producer", "size", "count", "first"});
      if (t[1].find('%') == std::string::npos) fail("generate template needs a % placeholder");
      if (!opts.contains("count")) fail("generate needs count=");
      const std::size_t count = to_uint(opts["count"]);
      const std::size_t first = opts.contains("first") ? to_uint(opts["first"]) : 0;
      const NodeId producer = producer_option(opts);
      const std::size_t size = opts.contains("size") ? to_uint(opts["size"]) : 1024;
      for (std::size_t i = 0; i < count; ++i) {
        Name n;
        try {
          n = expand_template(t[1], first + i);
        } catch (const std::exception& e) {
          fail(e.what());
        }
        s_.catalog.push_back({std::move(n), size, producer, false});
      }
    } else {
      fail("unknown catalog statement '" + kw + "'; expected object, prefix or generate");
    }
  }

  void schedule(const std::vector<std::string>& t) {
    const std::string& kw = t[0];
    if (kw == "at") {
      if (t.size() < 4) fail("expected 'at <time> <consumer> <name> [options]'");
      auto opts = options(t, 4, {"scope", "exclude", "lifetime"});
      ScheduledRequest r;
      r.at = to_duration(t[1]);
      r.consumer = node(t[2], NodeKind::Consumer);
      r.interest.name = to_name(t[3]);
      if (opts.contains("scope")) r.interest.scope = static_cast<std::uint32_t>(to_uint(opts["scope"]));
      if (opts.contains("exclude"))
        for (const auto& n : split_commas(opts["exclude"])) r.interest.exclusions.insert(to_name(n));
      if (opts.contains("lifetime")) r.lifetime = to_duration(opts["lifetime"]);
      requests_.emplace_back(line_, std::move(r));
    } else if (kw == "zipf") {
      if (t.size() < 2) fail("expected 'zipf <consumers> name=<template> n=<N> requests=<R> [options]'");
      auto opts = options(t, 2, {"name", "n", "exponent", "requests", "start", "gap", "seed"});
      ZipfSpec z;
      z.line = line_;
      for (const auto& c : split_commas(t[1])) z.consumers.push_back(node(c, NodeKind::Consumer));
      for (const char* key : {"name", "n", "requests"})
        if (!opts.contains(key)) fail(std::string("zipf needs ") + key + "=");
      z.name_template = opts["name"];
      if (z.name_template.find('%') == std::string::npos) fail("zipf name template needs a % placeholder");
      z.n = to_uint(opts["n"]);
      if (z.n == 0) fail("zipf needs n >= 1");
      z.requests = to_uint(opts["requests"]);
      if (opts.contains("exponent")) z.exponent = to_double(opts["exponent"]);
      if (z.exponent < 0) fail("zipf exponent must be non-negative");
      if (opts.contains("start")) z.start = to_duration(opts["start"]);
      if (opts.contains("gap")) z.gap = to_duration(opts["gap"]);
      if (opts.contains("seed")) z.seed = to_uint(opts["seed"]);
      zipfs_.push_back(std::move(z));
    } else {
      fail("unknown schedule statement '" + kw + "'; expected at or zipf");
    }
  }

  void attack(const std::vector<std::string>& t) {
    if (t.size() != 2) fail("expected '<key> <value>'");
    AttackConfig& a = s_.attack;
    const std::string& k = t[0];
    const std::string& v = t[1];
    if (k == "kind") {
      static const std::map<std::string, AttackKind> kinds{
          {"none", AttackKind::None}, {"timing", AttackKind::Timing}, {"monitor", AttackKind::Monitor}, {"dump", AttackKind::Dump}};
      auto it = kinds.find(v);
      if (it == kinds.end()) fail("unknown attack '" + v + "'; expected one of: none, timing, monitor, dump");
      a.kind = it->second;
    } else if (k == "adversary") a.adversary = node(v, NodeKind::Consumer);
    else if (k == "victim_closest") a.victim_closest = node(v, NodeKind::Consumer);
    else if (k == "victim_distant") a.victim_distant = node(v, NodeKind::Consumer);
    else if (k == "trials") a.trials = to_uint(v);
    else if (k == "epsilon_fraction") a.epsilon_fraction = to_double(v);
    else if (k == "epsilon") a.epsilon = to_duration(v);
    else if (k == "target_prefix") a.target_prefix = to_name(v);
    else if (k == "target") a.target = to_name(v);
    else if (k == "prefix") a.prefix = to_name(v);
    else if (k == "scope") a.scope = static_cast<std::uint32_t>(to_uint(v));
    else if (k == "period") a.period = to_duration(v);
    else if (k == "start") a.start = to_duration(v);
    else if (k == "horizon") a.horizon = to_duration(v);
    else fail("unknown attack key '" + k + "'");
  }

  void defense(const std::vector<std::string>& t) {
    if (t.size() != 2) fail("expected '<key> <value>'");
    DefenseConfig& d = s_.defense;
    const std::string& k = t[0];
    const std::string& v = t[1];
    if (k == "kind") {
      auto kind = parse_defense(v);
      if (!kind) {
        std::string names;
        for (const auto& n : defense_names()) names += (names.empty() ? "" : ", ") + n;
        fail("unknown defense '" + v + "'; expected one of: " + names);
      }
      d.kind = *kind;
    } else if (k == "k_min") d.k_min = to_uint(v);
    else if (k == "k_max") d.k_max = to_uint(v);
    else if (k == "p0") {
      d.p0 = to_double(v);
      if (d.p0 < 0 || d.p0 > 1) fail("p0 must be in [0, 1]");
    } else if (k == "members" || k == "routers") {
      auto& list = k == "members" ? d.members : d.routers;
      list.clear();
      for (const auto& r : split_commas(v)) list.push_back(node(r, NodeKind::Router));
    } else fail("unknown defense key '" + k + "'");
    if (d.k_max < d.k_min) fail("k_max must not be below k_min");
  }

  void params(const std::vector<std::string>& t) {
    SimParams& p = s_.params;
    const std::string& k = t[0];
    if (k == "capacity") {
      if (t.size() != 3) fail("expected 'capacity <router> <objects>'");
      p.capacity[node(t[1], NodeKind::Router)] = to_uint(t[2]);
      return;
    }
    if (t.size() != 2) fail("expected '<key> <value>'");
    const std::string& v = t[1];
    if (k == "id") s_.id = v;
    else if (k == "seed") p.seed = to_uint(v);
    else if (k == "cache_capacity") p.cache_capacity = to_uint(v);
    else if (k == "pit_lifetime") p.pit_lifetime = to_duration(v);
    else if (k == "processing") p.processing = to_duration(v);
    else if (k == "jitter") p.jitter = to_duration(v);
    else if (k == "replacement") {
      if (v == "lru") p.replacement = Replacement::Lru;
      else if (v == "fifo") p.replacement = Replacement::Fifo;
      else fail("unknown replacement '" + v + "'; expected lru or fifo");
    } else fail("unknown params key '" + k + "'");
  }

  void finish() {
    if (seed_override_) s_.params.seed = *seed_override_;
    if (s_.params.jitter > s_.params.processing) {
      line_ = 0;
      throw ParseError("params: jitter must not exceed processing");
    }
    for (std::size_t zi = 0; zi < zipfs_.size(); ++zi) {
      const ZipfSpec& z = zipfs_[zi];
      line_ = z.line;
      const std::uint64_t seed = z.seed ? *z.seed : derive_seed(s_.params.seed, 0x7a697066, zi);
      const auto ranks = workload_zipf(z.n, z.exponent, z.requests, seed);
      for (std::size_t i = 0; i < ranks.size(); ++i) {
        ScheduledRequest r;
        r.at = z.start + static_cast<Duration::rep>(i) * z.gap;
        r.consumer = z.consumers[i % z.consumers.size()];
        try {
          r.interest.name = expand_template(z.name_template, ranks[i]);
        } catch (const std::exception& e) {
          fail(e.what());
        }
        requests_.emplace_back(z.line, std::move(r));
      }
    }
    for (const auto& [line, r] : requests_) {
      line_ = line;
      if (!s_.covering_entry(r.interest.name))
        fail("scheduled name " + r.interest.name.to_string() + " is not in the catalog");
    }
    std::stable_sort(requests_.begin(), requests_.end(),
                     [](const auto& a, const auto& b) { return a.second.at < b.second.at; });
    for (auto& [line, r] : requests_) s_.schedule.push_back(std::move(r));
  }

  std::optional<std::uint64_t> seed_override_;
  Scenario s_;
  std::string section_;
  std::size_t line_ = 0;
  std::vector<std::pair<std::size_t, ScheduledRequest>> requests_;
  std::vector<ZipfSpec> zipfs_;
};

}  // namespace

Scenario parse_scenario(std::string_view text, std::optional<std::uint64_t> seed_override) {
  return Parser(seed_override).parse(text);
}

Scenario load_scenario(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::filesystem::filesystem_error("cannot open scenario", path,
                                            std::make_error_code(std::errc::no_such_file_or_directory));
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Scenario s = parse_scenario(text, seed_override);
  if (s.id == "scenario") s.id = path.stem().string();
  return s;
}

// ---------------------------------------------------------------------------
// Workloads

std::vector<double> zipf_probabilities(std::size_t catalog_size, double exponent) {
  std::vector<double> p(catalog_size);
  double total = 0;
  for (std::size_t r = 0; r < catalog_size; ++r) total += p[r] = std::pow(static_cast<double>(r + 1), -exponent);
  for (auto& v : p) v /= total;
  return p;
}

std::vector<std::size_t> workload_zipf(std::size_t catalog_size, double exponent, std::size_t requests,
                                       std::uint64_t seed) {
  if (catalog_size == 0) throw std::invalid_argument("zipf: catalog size must be positive");
  const auto p = zipf_probabilities(catalog_size, exponent);
  std::vector<double> cdf(catalog_size);
  double acc = 0;
  for (std::size_t r = 0; r < catalog_size; ++r) cdf[r] = acc += p[r];
  Rng rng(seed);
  std::vector<std::size_t> out;
  out.reserve(requests);
  for (std::size_t i = 0; i < requests; ++i) {
    const double u = rng.uniform01() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    out.push_back(std::min(static_cast<std::size_t>(it - cdf.begin()), catalog_size - 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

std::optional<std::string> ExperimentResult::value(std::string_view metric) const {
  for (const auto& r : rows)
    if (r.metric == metric) return r.value;
  return std::nullopt;
}

std::string format_metric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

namespace {

void add(ExperimentResult& r, std::string metric, std::uint64_t v) { r.rows.push_back({std::move(metric), std::to_string(v)}); }
void add(ExperimentResult& r, std::string metric, double v) { r.rows.push_back({std::move(metric), format_metric(v)}); }
void add(ExperimentResult& r, std::string metric, std::string v) { r.rows.push_back({std::move(metric), std::move(v)}); }

std::vector<NodeId> edge_routers(const Topology& t) {
  std::set<NodeId> out;
  for (NodeId c : t.of_kind(NodeKind::Consumer)) out.insert(t.attachment(c));
  return {out.begin(), out.end()};
}

}  // namespace

ExperimentResult evaluate(const Scenario& scenario) { return evaluate(scenario, nullptr); }

ExperimentResult evaluate(const Scenario& scenario, Trace* trace_out) {
  ExperimentResult r;
  r.scenario_id = scenario.id;
  r.defense = std::string(to_string(scenario.defense.kind));
  r.attack = std::string(to_string(scenario.attack.kind));
  r.seed = scenario.params.seed;

  Network net(scenario);
  net.run();
  std::uint64_t relayed = 0, fallbacks = 0;
  for (NodeId id : net.routers())
    if (auto* c = dynamic_cast<const CollaborativeCache*>(&net.router(id).cache_policy())) {
      relayed += c->relayed();
      fallbacks += c->fallbacks();
    }
  Trace trace = net.take_trace();

  std::vector<Duration::rep> rtts;
  std::uint64_t from_cache = 0, timeouts = 0;
  for (const auto& req : trace.requests) {
    if (auto rtt = req.rtt()) {
      rtts.push_back(rtt->count());
      from_cache += req.from_cache;
    }
    timeouts += req.timed_out;
  }
  std::sort(rtts.begin(), rtts.end());
  double mean = 0;
  for (auto v : rtts) mean += static_cast<double>(v);
  if (!rtts.empty()) mean /= static_cast<double>(rtts.size());
  const Duration::rep p95 =
      rtts.empty() ? 0 : rtts[static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(rtts.size()))) - 1];

  RouterStats total;
  for (const auto& [id, s] : trace.router_stats) {
    total.cs_hits += s.cs_hits;
    total.cs_misses += s.cs_misses;
    total.inserted += s.inserted;
    total.evicted += s.evicted;
    total.forwarded += s.forwarded;
  }
  const auto requests = static_cast<std::uint64_t>(trace.requests.size());
  add(r, "requests", requests);
  add(r, "satisfied", static_cast<std::uint64_t>(rtts.size()));
  add(r, "timeouts", timeouts);
  add(r, "latency_mean_us", mean);
  add(r, "latency_p95_us", static_cast<std::uint64_t>(p95));
  add(r, "cache_hit_ratio", rtts.empty() ? 0.0 : static_cast<double>(from_cache) / static_cast<double>(rtts.size()));
  const auto lookups = total.cs_hits + total.cs_misses;
  add(r, "router_hit_ratio", lookups ? static_cast<double>(total.cs_hits) / static_cast<double>(lookups) : 0.0);
  add(r, "cache_inserts", total.inserted);
  add(r, "cache_evictions", total.evicted);
  add(r, "relayed_interests", relayed);
  add(r, "relay_overhead", requests ? static_cast<double>(relayed) / static_cast<double>(requests) : 0.0);
  add(r, "collab_fallbacks", fallbacks);

  const auto edges = edge_routers(scenario.topology);
  if (!edges.empty() && !scenario.topology.of_kind(NodeKind::Producer).empty()) {
    std::size_t smallest = SIZE_MAX;
    for (NodeId e : edges) smallest = std::min(smallest, anonymity_set(scenario.topology, e));
    add(r, "anonymity_set_edge_min", static_cast<std::uint64_t>(smallest));
    if (scenario.attack.adversary)
      add(r, "anonymity_set_adversary",
          static_cast<std::uint64_t>(anonymity_set(scenario.topology, scenario.topology.attachment(*scenario.attack.adversary))));
  }

  switch (scenario.attack.kind) {
    case AttackKind::None: break;
    case AttackKind::Timing: {
      const TimingReport rep = run_timing_attack(scenario);
      add(r, "attack_trials", static_cast<std::uint64_t>(rep.scores.total));
      add(r, "attack_accuracy", rep.scores.accuracy());
      for (const auto& [kind, cs] : rep.scores.per_class) {
        add(r, "attack_precision_" + std::string(to_string(kind)), cs.precision());
        add(r, "attack_recall_" + std::string(to_string(kind)), cs.recall());
      }
      add(r, "attack_calibration_failures", static_cast<std::uint64_t>(rep.calibration_failures));
      break;
    }
    case AttackKind::Monitor: {
      const MonitorReport rep = run_monitor(scenario);
      add(r, "monitor_probes", static_cast<std::uint64_t>(rep.probes.size()));
      add(r, "monitor_first_fetch_us",
          rep.first_fetch_time ? std::to_string(rep.first_fetch_time->count()) : std::string("none"));
      break;
    }
    case AttackKind::Dump: {
      const DumpResult rep = run_dump(scenario);
      add(r, "dump_probes", static_cast<std::uint64_t>(rep.probes));
      add(r, "dump_recovered", static_cast<std::uint64_t>(rep.recovered.size()));
      add(r, "dump_snapshot", static_cast<std::uint64_t>(rep.snapshot.size()));
      add(r, "dump_jaccard", jaccard(rep.recovered, rep.snapshot));
      add(r, "dump_inserted_during", static_cast<std::uint64_t>(rep.inserted_during.size()));
      break;
    }
  }
  if (trace_out) *trace_out = std::move(trace);
  return r;
}

Scenario with_defense(const Scenario& scenario, DefenseKind kind) {
  Scenario s = scenario;
  s.defense.kind = kind;
  if (kind == DefenseKind::Collaborative && s.defense.members.empty()) s.defense.members = edge_routers(s.topology);
  return s;
}

std::vector<ExperimentResult> compare_defenses(const Scenario& scenario, std::span<const DefenseKind> defenses) {
  std::vector<ExperimentResult> out;
  for (auto d : defenses) out.push_back(evaluate(with_defense(scenario, d)));
  return out;
}

void write_metrics_csv(std::ostream& out, std::span<const ExperimentResult> results) {
  out << kMetricsHeader << '\n';
  for (const auto& r : results)
    for (const auto& row : r.rows)
      out << csv_field(r.scenario_id) << ',' << r.seed << ',' << r.defense << ',' << r.attack << ',' << row.metric
          << ',' << csv_field(row.value) << '\n';
}

}  // namespace conlab
