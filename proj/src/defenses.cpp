#include "conlab/defenses.hpp"

#include <algorithm>
#include <stdexcept>

namespace conlab {

Duration wait_before_reply_delay(const ContentMeta& meta, bool is_cache_hit) {
  if (!is_cache_hit || !meta.t_m) return Duration{0};
  return *meta.t_m;
}

Duration delay_first_k_delay(ContentMeta& meta, Rng& rng, std::uint64_t k_min, std::uint64_t k_max,
                             bool is_cache_hit) {
  if (!meta.k) meta.k = rng.uniform_int(k_min, std::max(k_min, k_max));
  const bool delayed = meta.served_count < *meta.k;
  ++meta.served_count;
  if (!is_cache_hit || !delayed || !meta.t_m) return Duration{0};
  return *meta.t_m;
}

Duration WaitBeforeReply::on_serve(ContentMeta& meta, const Name&, bool cache_hit) {
  ++meta.served_count;
  return wait_before_reply_delay(meta, cache_hit);
}

DelayFirstK::DelayFirstK(std::uint64_t k_min, std::uint64_t k_max, std::uint64_t seed)
    : k_min_(k_min), k_max_(k_max), rng_(seed) {
  if (k_max < k_min) throw std::invalid_argument("delay_first_k: k_max < k_min");
}

Duration DelayFirstK::on_serve(ContentMeta& meta, const Name&, bool cache_hit) {
  return delay_first_k_delay(meta, rng_, k_min_, k_max_, cache_hit);
}

ProbabilisticCache::ProbabilisticCache(double p0, std::uint64_t seed) : p0_(p0), rng_(seed) {
  if (p0 < 0.0 || p0 > 1.0) throw std::invalid_argument("probabilistic: p0 must be in [0,1]");
}

double ProbabilisticCache::probability(double p0, std::uint32_t path_position, std::uint32_t path_length,
                                       double cache_fill) {
  if (path_length == 0) path_length = 1;
  const double position = std::min(1.0, static_cast<double>(path_position) / path_length);
  const double p = p0 * (1.0 - position) * (1.0 - std::clamp(cache_fill, 0.0, 1.0));
  return std::clamp(p, 0.0, 1.0);
}

bool ProbabilisticCache::decide(std::uint32_t path_position, std::uint32_t path_length, double cache_fill) {
  const double p = probability(p0_, path_position, path_length, cache_fill);
  // Always draw, so the stream does not depend on earlier outcomes.
  const double u = rng_.uniform01();
  return u < p;
}

bool ProbabilisticCache::should_cache(const CacheContext& ctx) {
  return decide(ctx.path_position, ctx.path_length, ctx.cache_fill);
}

std::uint64_t partition_digest(const Name& name) {
  const std::string first = name.is_root() ? std::string{} : name.components().front();
  const Digest d = sha256(first);
  return get_be64(d);
}

Partition::Partition(std::vector<NodeId> members, std::vector<Interval> intervals)
    : members_(std::move(members)), intervals_(std::move(intervals)) {
  if (members_.empty() || members_.size() != intervals_.size())
    throw std::invalid_argument("partition: one interval per member required");
  if (intervals_.front().lo != 0 || intervals_.back().hi != UINT64_MAX)
    throw std::invalid_argument("partition: intervals must cover the digest space");
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (intervals_[i].hi < intervals_[i].lo) throw std::invalid_argument("partition: empty interval");
    if (i > 0 && intervals_[i].lo != intervals_[i - 1].hi + 1)
      throw std::invalid_argument("partition: intervals must be contiguous and disjoint");
  }
}

Partition Partition::uniform(std::vector<NodeId> members) {
  const std::size_t j = members.size();
  if (j == 0) throw std::invalid_argument("partition: no members");
  std::vector<Interval> intervals(j);
  const unsigned __int128 space = static_cast<unsigned __int128>(1) << 64;
  for (std::size_t i = 0; i < j; ++i) {
    intervals[i].lo = static_cast<std::uint64_t>(space * i / j);
    intervals[i].hi = i + 1 == j ? UINT64_MAX : static_cast<std::uint64_t>(space * (i + 1) / j - 1);
  }
  return Partition(std::move(members), std::move(intervals));
}

NodeId Partition::owner_of_digest(std::uint64_t digest) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), digest,
                             [](std::uint64_t d, const Interval& iv) { return d < iv.lo; });
  return members_[static_cast<std::size_t>(std::distance(intervals_.begin(), it)) - 1];
}

bool Partition::is_member(NodeId id) const {
  return std::find(members_.begin(), members_.end(), id) != members_.end();
}

NodeId partition_owner(const Partition& p, const Name& name) { return p.owner(name); }

CollaborativeCache::CollaborativeCache(Partition partition, NodeId self, std::map<NodeId, FaceId> member_faces)
    : partition_(std::move(partition)), self_(self), member_faces_(std::move(member_faces)) {
  if (!partition_.is_member(self)) throw std::invalid_argument("collaborative: router is not a member");
}

bool CollaborativeCache::from_member(FaceId face) const {
  return std::any_of(member_faces_.begin(), member_faces_.end(),
                     [face](const auto& kv) { return kv.second == face; });
}

bool CollaborativeCache::fully_connected() const {
  for (NodeId m : partition_.members())
    if (m != self_ && !member_faces_.contains(m)) return false;
  return true;
}

bool CollaborativeCache::should_cache(const CacheContext& ctx) {
  const NodeId owner = partition_.owner(ctx.object.name);
  if (owner == self_) return true;
  // Owner unreachable from here: solo caching.
  return !member_faces_.contains(owner);
}

std::optional<FaceId> CollaborativeCache::redirect(const Interest& interest, FaceId in_face) {
  if (from_member(in_face)) return std::nullopt;
  const NodeId owner = partition_.owner(interest.name);
  if (owner == self_) return std::nullopt;
  auto it = member_faces_.find(owner);
  if (it == member_faces_.end()) {
    ++fallbacks_;
    return std::nullopt;
  }
  ++relayed_;
  return it->second;
}

}  // namespace conlab
