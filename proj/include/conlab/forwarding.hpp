#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string_view>
#include <variant>
#include <vector>

#include "conlab/common.hpp"
#include "conlab/names.hpp"

namespace conlab {

using FaceId = std::uint32_t;

using namespace std::chrono_literals;

enum class DropReason { ScopeExhausted, NoRoute, DuplicateNonce };
std::string_view to_string(DropReason r);

struct SendData {
  ContentObject object;
  FaceId face = 0;
  Duration delay{0};  // added by the reply policy before the data leaves
  bool from_cache = false;
};

struct CollapsePit {
  Name name;
  FaceId face = 0;
};

struct ForwardInterest {
  Interest interest;  // scope already decremented
  FaceId face = 0;
};

struct Drop {
  Name name;
  DropReason reason = DropReason::NoRoute;
};

using Action = std::variant<SendData, CollapsePit, ForwardInterest, Drop>;

enum class Replacement { Lru, Fifo };

class ContentStore {
 public:
  struct Entry {
    ContentObject object;
    SimTime last_access{0};
    SimTime inserted{0};
    std::uint64_t access_seq = 0;  // recency order, strictly increasing
    std::uint64_t insert_seq = 0;
  };

  explicit ContentStore(std::size_t capacity, Replacement policy = Replacement::Lru);

  // Matching, non-excluded object with the lexicographically smallest name.
  const Entry* find(const Interest& interest) const;
  // find() plus a recency update.
  const ContentObject* lookup(const Interest& interest, SimTime now);

  // Inserts or refreshes; returns the evicted name when the store was full.
  std::optional<Name> insert(ContentObject object, SimTime now);
  bool erase(const Name& name);

  bool contains(const Name& name) const { return entries_.contains(name); }
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  double fill() const;
  Replacement policy() const { return policy_; }
  const std::map<Name, Entry>& entries() const { return entries_; }
  std::set<Name> names() const;
  // Name the store would evict next, if it is non-empty.
  std::optional<Name> victim() const;

 private:
  std::size_t capacity_;
  Replacement policy_;
  std::uint64_t seq_ = 0;
  std::map<Name, Entry> entries_;
  std::map<std::uint64_t, Name> order_;  // eviction order key -> name

  std::uint64_t order_key(const Entry& e) const {
    return policy_ == Replacement::Lru ? e.access_seq : e.insert_seq;
  }
};

std::optional<ContentObject> cs_lookup(const ContentStore& cs, const Interest& interest);

class PitTable {
 public:
  struct Entry {
    Interest interest;
    std::set<FaceId> faces;
    SimTime created{0};
    SimTime expiry{0};
    std::uint32_t hop_position = 0;  // routers between the requester and this one
  };

  explicit PitTable(Duration lifetime = 4s) : lifetime_(lifetime) {}

  void expire(SimTime now);
  Entry* find(const Name& name);
  const Entry* find(const Name& name) const;
  Entry& insert(const Interest& interest, FaceId face, SimTime now);
  // Removes and returns every entry the object satisfies.
  std::vector<Entry> take_matching(const ContentObject& object);

  std::size_t size() const { return entries_.size(); }
  Duration lifetime() const { return lifetime_; }
  const std::map<Name, Entry>& entries() const { return entries_; }

 private:
  Duration lifetime_;
  std::map<Name, Entry> entries_;
};

class FibTable {
 public:
  struct Entry {
    Name prefix;
    FaceId face = 0;
  };

  void add(const Name& prefix, FaceId face);
  // Longest prefix match; lowest face id among equal-length matches.
  std::optional<FaceId> lpm(const Name& name) const;
  std::vector<Entry> entries() const;

 private:
  std::map<Name, std::set<FaceId>> routes_;
};

std::optional<FaceId> fib_lpm(const FibTable& fib, const Name& name);

// Per (router, name) bookkeeping shared by the reply policies.
struct ContentMeta {
  std::optional<Duration> t_m;  // recorded upstream fetch RTT
  std::uint64_t served_count = 0;
  std::optional<std::uint64_t> k;  // delay-first-k threshold, sampled once

  // Refresh with weight 0.5, never decreasing.
  void record_fetch(Duration rtt);
};

struct CacheContext {
  const ContentObject& object;
  std::uint32_t path_position = 0;  // 0 = edge router
  std::uint32_t path_length = 1;    // routers on the delivery path
  double cache_fill = 0.0;
  FaceId in_face = 0;
};

class CachePolicy {
 public:
  virtual ~CachePolicy() = default;
  virtual std::string_view name() const = 0;
  virtual bool should_cache(const CacheContext& ctx) = 0;
  // Face to send the interest to instead of the FIB choice, if any.
  virtual std::optional<FaceId> redirect(const Interest&, FaceId /*in_face*/) { return std::nullopt; }
};

class ReplyPolicy {
 public:
  virtual ~ReplyPolicy() = default;
  virtual std::string_view name() const = 0;
  // Called once per served request for `name`. The returned delay is applied
  // to cache hits only; misses already pay the real upstream RTT.
  virtual Duration on_serve(ContentMeta& meta, const Name& name, bool cache_hit) = 0;
};

class AlwaysCache final : public CachePolicy {
 public:
  std::string_view name() const override { return "always"; }
  bool should_cache(const CacheContext&) override { return true; }
};

class ImmediateReply final : public ReplyPolicy {
 public:
  std::string_view name() const override { return "immediate"; }
  Duration on_serve(ContentMeta& meta, const Name&, bool) override {
    ++meta.served_count;
    return Duration{0};
  }
};

struct RouterConfig {
  std::size_t cache_capacity = 100;
  Replacement replacement = Replacement::Lru;
  Duration pit_lifetime = 4s;
};

struct RouterStats {
  std::uint64_t interests = 0;
  std::uint64_t cs_hits = 0;
  std::uint64_t cs_misses = 0;
  std::uint64_t collapsed = 0;
  std::uint64_t forwarded = 0;
  std::uint64_t dropped = 0;
  std::uint64_t data_in = 0;
  std::uint64_t unsolicited = 0;
  std::uint64_t inserted = 0;
  std::uint64_t evicted = 0;
};

struct CacheChange {
  Name name;
  bool inserted = true;  // false = evicted
};

// Content Store -> PIT -> FIB pipeline with injected cache and reply policies.
// Tables change only through on_interest / on_data.
class RouterState {
 public:
  explicit RouterState(RouterConfig config = {}, std::unique_ptr<CachePolicy> cache = nullptr,
                       std::unique_ptr<ReplyPolicy> reply = nullptr);

  std::vector<Action> on_interest(const Interest& interest, FaceId in_face, SimTime now);
  // upstream_hops: routers the data crossed before reaching this one.
  std::vector<Action> on_data(const ContentObject& object, FaceId in_face, SimTime now,
                              std::uint32_t upstream_hops = 0);

  FibTable& fib() { return fib_; }
  const FibTable& fib() const { return fib_; }
  const ContentStore& cs() const { return cs_; }
  const PitTable& pit() const { return pit_; }
  const std::map<Name, ContentMeta>& meta() const { return meta_; }
  const RouterStats& stats() const { return stats_; }
  CachePolicy& cache_policy() { return *cache_; }
  ReplyPolicy& reply_policy() { return *reply_; }

  std::vector<CacheChange> drain_cache_changes();

 private:
  void check_clock(SimTime now);
  void purge_nonces(SimTime now);

  RouterConfig config_;
  ContentStore cs_;
  PitTable pit_;
  FibTable fib_;
  std::unique_ptr<CachePolicy> cache_;
  std::unique_ptr<ReplyPolicy> reply_;
  std::map<Name, ContentMeta> meta_;
  std::set<std::pair<Name, std::uint64_t>> seen_nonces_;
  std::deque<std::pair<SimTime, std::pair<Name, std::uint64_t>>> nonce_log_;
  RouterStats stats_;
  std::vector<CacheChange> changes_;
  SimTime clock_{0};
};

}  // namespace conlab
