#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "conlab/forwarding.hpp"
#include "conlab/rng.hpp"

namespace conlab {

// t_m on a cache hit once recorded, zero on a miss.
Duration wait_before_reply_delay(const ContentMeta& meta, bool is_cache_hit);

// Samples k in [k_min, k_max] on the first request, delays while
// served_count < k, then counts the request.
Duration delay_first_k_delay(ContentMeta& meta, Rng& rng, std::uint64_t k_min, std::uint64_t k_max,
                             bool is_cache_hit);

class WaitBeforeReply final : public ReplyPolicy {
 public:
  std::string_view name() const override { return "wait_before_reply"; }
  Duration on_serve(ContentMeta& meta, const Name& name, bool cache_hit) override;
};

class DelayFirstK final : public ReplyPolicy {
 public:
  DelayFirstK(std::uint64_t k_min, std::uint64_t k_max, std::uint64_t seed);
  std::string_view name() const override { return "delay_first_k"; }
  Duration on_serve(ContentMeta& meta, const Name& name, bool cache_hit) override;

 private:
  std::uint64_t k_min_;
  std::uint64_t k_max_;
  Rng rng_;
};

class ProbabilisticCache final : public CachePolicy {
 public:
  ProbabilisticCache(double p0, std::uint64_t seed);
  std::string_view name() const override { return "probabilistic"; }
  bool should_cache(const CacheContext& ctx) override;

  // p0 * (1 - position / length) * (1 - fill), clamped to [0, 1].
  static double probability(double p0, std::uint32_t path_position, std::uint32_t path_length,
                            double cache_fill);
  bool decide(std::uint32_t path_position, std::uint32_t path_length, double cache_fill);

 private:
  double p0_;
  Rng rng_;
};

// Leading 64 bits of sha256 over the first name component.
std::uint64_t partition_digest(const Name& name);

// Disjoint, exhaustive split of the 64-bit digest space, one interval per member.
class Partition {
 public:
  struct Interval {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;  // inclusive
  };

  Partition(std::vector<NodeId> members, std::vector<Interval> intervals);
  static Partition uniform(std::vector<NodeId> members);

  NodeId owner(const Name& name) const { return owner_of_digest(partition_digest(name)); }
  NodeId owner_of_digest(std::uint64_t digest) const;

  const std::vector<NodeId>& members() const { return members_; }
  const std::vector<Interval>& intervals() const { return intervals_; }
  bool is_member(NodeId id) const;

 private:
  std::vector<NodeId> members_;
  std::vector<Interval> intervals_;
};

NodeId partition_owner(const Partition& p, const Name& name);

// Hash-partitioned cache shared by neighbouring routers. Non-owners relay
// interests to the owner before any upstream forward; only the owner caches.
// When the owner has no face from this router (member unreachable) the policy
// falls back to solo caching for that name and counts it.
class CollaborativeCache final : public CachePolicy {
 public:
  CollaborativeCache(Partition partition, NodeId self, std::map<NodeId, FaceId> member_faces);
  std::string_view name() const override { return "collaborative"; }
  bool should_cache(const CacheContext& ctx) override;
  std::optional<FaceId> redirect(const Interest& interest, FaceId in_face) override;

  std::uint64_t relayed() const { return relayed_; }
  std::uint64_t fallbacks() const { return fallbacks_; }
  bool fully_connected() const;
  const Partition& partition() const { return partition_; }

 private:
  bool from_member(FaceId face) const;

  Partition partition_;
  NodeId self_;
  std::map<NodeId, FaceId> member_faces_;
  std::uint64_t relayed_ = 0;
  std::uint64_t fallbacks_ = 0;
};

}  // namespace conlab
