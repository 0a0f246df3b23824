#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "conlab/forwarding.hpp"
#include "conlab/names.hpp"

namespace conlab {

struct BloomParams {
  std::uint64_t m = 2048;
  std::uint32_t h = 5;
  std::uint64_t seed = 0;

  bool operator==(const BloomParams&) const = default;
};

// g_i(x) = h1(x) + i * h2(x) mod m over two keyed SipHash-2-4 values; h2 is
// forced odd.
std::vector<std::uint64_t> bloom_positions(const BloomParams& params, std::string_view element);

// (1 - e^{-h n / m})^h
double expected_fp_rate(std::uint64_t m, std::uint32_t h, std::uint64_t n);

class BloomFilter {
 public:
  explicit BloomFilter(BloomParams params = {});

  void insert(std::string_view element);
  bool query(std::string_view element) const;

  // Every set bit of `other` is set here.
  bool contains(const BloomFilter& other) const;
  void merge(const BloomFilter& other);

  bool test(std::uint64_t bit) const { return (bits_[bit >> 3] >> (bit & 7)) & 1U; }
  void set(std::uint64_t bit) { bits_[bit >> 3] |= static_cast<std::uint8_t>(1U << (bit & 7)); }
  std::vector<std::uint64_t> set_bits() const;
  std::size_t popcount() const;

  const BloomParams& params() const { return params_; }
  // ceil(m / 8) bytes, bit j at byte j / 8, position j % 8 (LSB first).
  const Bytes& bytes() const { return bits_; }

  Bytes serialize() const;
  static BloomFilter deserialize(std::span<const std::uint8_t> data);

  bool operator==(const BloomFilter&) const = default;

 private:
  BloomParams params_;
  Bytes bits_;
};

bool bf_query(const BloomFilter& filter, std::string_view element);

// m saturating 8-bit counters.
class CountingBloom {
 public:
  static constexpr std::uint8_t kMax = 255;

  explicit CountingBloom(BloomParams params = {});

  void insert(std::string_view element);
  void insert(const BloomFilter& element);
  // Throws std::logic_error (and changes nothing) if any counter is already 0.
  void remove(std::string_view element);
  void remove(const BloomFilter& element);

  bool query(std::string_view element) const;
  bool query(const BloomFilter& element) const;

  std::uint8_t counter(std::uint64_t i) const { return counters_.at(i); }
  bool saturated() const { return saturated_; }
  void clear();

  const BloomParams& params() const { return params_; }
  Bytes serialize() const;
  static CountingBloom deserialize(std::span<const std::uint8_t> data);

  bool operator==(const CountingBloom&) const = default;

 private:
  void add_at(std::span<const std::uint64_t> positions);
  void remove_at(std::span<const std::uint64_t> positions);
  bool query_at(std::span<const std::uint64_t> positions) const;

  BloomParams params_;
  std::vector<std::uint8_t> counters_;
  bool saturated_ = false;
};

// (B_1 .. B_n); B_i holds the canonical text of the i-component prefix.
struct HierarchicalBloom {
  std::vector<BloomFilter> levels;

  std::size_t size() const { return levels.size(); }
  const BloomFilter& level(std::size_t i) const { return levels.at(i - 1); }
  const BloomFilter& last() const { return levels.back(); }
  bool operator==(const HierarchicalBloom&) const = default;
};

// Throws std::invalid_argument for the root name.
HierarchicalBloom encode_name(const Name& name, const BloomParams& params);
// Single-element filter for a prefix (the root prefix encodes "/").
BloomFilter encode_prefix(const Name& prefix, const BloomParams& params);

struct BloomAction {
  enum class Kind { SendData, Collapse, Forward, Drop };
  Kind kind = Kind::Drop;
  FaceId face = 0;
  bool from_cache = false;

  bool operator==(const BloomAction&) const = default;
};

std::string_view to_string(BloomAction::Kind kind);
BloomAction normalize(const Action& action);
std::string describe(std::span<const BloomAction> actions);

enum class BloomStage { ContentStore, Pit, Route, Drop };

struct BloomDecision {
  BloomStage stage = BloomStage::Drop;
  std::size_t level = 0;                  // Route: B_level matched
  std::optional<std::size_t> route_entry; // Route: index in routes()
  std::vector<FaceId> pit_faces;          // Pit: faces whose filter matched
};

// Forwarding pipeline keyed only by Bloom filters: content store index, one
// counting filter per face as PIT, one filter per routing entry.
class BloomRouter {
 public:
  struct Route {
    BloomFilter filter;
    FaceId face = 0;
  };

  BloomRouter(BloomParams params, std::size_t cs_capacity, Duration pit_lifetime = 4s);

  std::size_t add_route(const BloomFilter& prefix_filter, FaceId face);
  std::size_t add_route(const Name& prefix, FaceId face) { return add_route(encode_prefix(prefix, params_), face); }

  std::vector<BloomAction> on_interest(const HierarchicalBloom& hb, FaceId in_face, SimTime now);
  // `key` is B_n of the object's name, carried by the data packet.
  std::vector<BloomAction> on_data(const ContentObject& object, const BloomFilter& key, FaceId in_face,
                                   SimTime now);

  const BloomDecision& last_decision() const { return decision_; }
  const std::vector<Route>& routes() const { return routes_; }
  bool pit_query(FaceId face, const BloomFilter& key) const;
  bool cs_index_query(const BloomFilter& key) const { return cs_index_.query(key); }
  const ContentObject* cs_find(const BloomFilter& key) const;
  std::size_t cs_size() const { return store_.size(); }
  std::size_t pending() const { return pending_.size(); }
  std::uint64_t rebuilds() const { return rebuilds_; }

  // Replaces PIT and CS state with the plaintext router's (LRU order kept).
  void resync(const RouterState& plain);

 private:
  struct Pending {
    BloomFilter key;
    SimTime expiry{0};
    std::map<FaceId, std::uint32_t> faces;
  };
  struct Stored {
    ContentObject object;
    BloomFilter key;
  };

  void expire(SimTime now);
  void add_pending(const BloomFilter& key, FaceId face, SimTime now);
  void rebuild_pit();
  void rebuild_cs_index();
  void cs_insert(const ContentObject& object, const BloomFilter& key);
  // Most recently used slot whose key is exactly `key`.
  std::optional<std::uint64_t> cs_slot(const BloomFilter& key) const;
  void cs_touch(std::uint64_t slot);
  CountingBloom& face_filter(FaceId face);

  BloomParams params_;
  std::size_t capacity_;
  Duration lifetime_;
  std::vector<Route> routes_;
  std::map<FaceId, CountingBloom> pit_;
  std::map<Bytes, Pending> pending_;  // shadow state, keyed by B_n bits
  CountingBloom cs_index_;
  std::map<std::uint64_t, Stored> store_;  // one slot per object, oldest use first
  std::multimap<Bytes, std::uint64_t> by_key_;
  std::uint64_t seq_ = 0;
  std::uint64_t rebuilds_ = 0;
  BloomDecision decision_;
};

struct BloomRequest {
  SimTime at{0};
  FaceId face = 0;
  Name name;
};

enum class DivergenceCause { PitFalsePositive, RouteFalsePositive, CsFalsePositive, Bug };
std::string_view to_string(DivergenceCause cause);

struct Divergence {
  std::size_t step = 0;
  SimTime time{0};
  bool on_data = false;
  Name name;
  std::string plain;
  std::string bloom;
  DivergenceCause cause = DivergenceCause::Bug;
};

struct EquivalenceReport {
  std::size_t interests = 0;
  std::size_t data = 0;
  std::vector<Divergence> divergences;
  // Steps with identical actions where a false positive still changed Bloom
  // state (a colliding PIT key, or data cached with nothing pending).
  std::size_t silent_false_positives = 0;
  std::size_t confirmed_false_positives() const;
  std::size_t bugs() const;
};

struct EquivalenceConfig {
  BloomParams params;
  std::size_t cs_capacity = 50;
  Duration pit_lifetime = 4s;
  Duration upstream_rtt = 20ms;  // data returns this long after a plaintext forward
  std::size_t payload_size = 32;
};

// Lockstep replay through a plaintext router and a Bloom router with the same
// routes. Each divergence is checked against plaintext ground truth, then the
// Bloom state is resynchronised; so is any silent false positive.
EquivalenceReport equivalence_check(std::span<const FibTable::Entry> routes, std::span<const BloomRequest> workload,
                                    const EquivalenceConfig& config);

// Inserts "/member/<i>" for i < n, queries "/probe/<j>" for j < queries.
// With filters > 1 the rate is pooled over that many filters, each with its
// own derived seed and its own members and probes.
double measure_fp_rate(const BloomParams& params, std::size_t n, std::size_t queries, std::size_t filters = 1);

// Ten publishers /pub<p> split over upstream faces 1 and 2, with more
// specific /pub<p>/sec0 routes on the other face.
std::vector<FibTable::Entry> reference_routes();
// Zipf(1) requests over /pub<p>/sec<s>/item<i> from downstream faces 3..6,
// one request per millisecond, plus some names with no route.
std::vector<BloomRequest> reference_workload(std::size_t requests, std::uint64_t seed);

}  // namespace conlab
