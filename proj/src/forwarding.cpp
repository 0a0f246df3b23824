#include "conlab/forwarding.hpp"

#include <algorithm>
#include <stdexcept>

namespace conlab {

std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::ScopeExhausted: return "scope";
    case DropReason::NoRoute: return "no_route";
    case DropReason::DuplicateNonce: return "duplicate_nonce";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// ContentStore

ContentStore::ContentStore(std::size_t capacity, Replacement policy)
    : capacity_(capacity), policy_(policy) {}

const ContentStore::Entry* ContentStore::find(const Interest& interest) const {
  for (auto it = entries_.lower_bound(interest.name); it != entries_.end(); ++it) {
    if (!is_prefix_of(interest.name, it->first)) break;
    if (!interest.exclusions.contains(it->first)) return &it->second;
  }
  return nullptr;
}

const ContentObject* ContentStore::lookup(const Interest& interest, SimTime now) {
  const Entry* found = find(interest);
  if (found == nullptr) return nullptr;
  auto& e = entries_.at(found->object.name);
  if (policy_ == Replacement::Lru) order_.erase(e.access_seq);
  e.access_seq = ++seq_;
  e.last_access = now;
  if (policy_ == Replacement::Lru) order_.emplace(e.access_seq, e.object.name);
  return &e.object;
}

std::optional<Name> ContentStore::insert(ContentObject object, SimTime now) {
  if (capacity_ == 0) return std::nullopt;
  if (auto it = entries_.find(object.name); it != entries_.end()) {
    auto& e = it->second;
    order_.erase(order_key(e));
    e.object = std::move(object);
    e.access_seq = ++seq_;
    e.last_access = now;
    order_.emplace(order_key(e), e.object.name);
    return std::nullopt;
  }
  std::optional<Name> evicted;
  if (entries_.size() >= capacity_) {
    auto victim_it = order_.begin();
    evicted = victim_it->second;
    entries_.erase(victim_it->second);
    order_.erase(victim_it);
  }
  Entry e;
  e.access_seq = e.insert_seq = ++seq_;
  e.last_access = e.inserted = now;
  e.object = std::move(object);
  const Name key = e.object.name;
  order_.emplace(order_key(e), key);
  entries_.emplace(key, std::move(e));
  return evicted;
}

bool ContentStore::erase(const Name& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) return false;
  order_.erase(order_key(it->second));
  entries_.erase(it);
  return true;
}

double ContentStore::fill() const {
  if (capacity_ == 0) return 1.0;
  return static_cast<double>(entries_.size()) / static_cast<double>(capacity_);
}

std::set<Name> ContentStore::names() const {
  std::set<Name> out;
  for (const auto& [n, _] : entries_) out.insert(n);
  return out;
}

std::optional<Name> ContentStore::victim() const {
  if (order_.empty()) return std::nullopt;
  return order_.begin()->second;
}

std::optional<ContentObject> cs_lookup(const ContentStore& cs, const Interest& interest) {
  if (const auto* e = cs.find(interest)) return e->object;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// PitTable

void PitTable::expire(SimTime now) {
  std::erase_if(entries_, [now](const auto& kv) { return kv.second.expiry <= now; });
}

PitTable::Entry* PitTable::find(const Name& name) {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

const PitTable::Entry* PitTable::find(const Name& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

PitTable::Entry& PitTable::insert(const Interest& interest, FaceId face, SimTime now) {
  auto [it, fresh] = entries_.try_emplace(interest.name);
  auto& e = it->second;
  if (fresh) {
    e.interest = interest;
    e.created = now;
    e.expiry = now + lifetime_;
    e.hop_position = interest.hop_count;
  }
  e.faces.insert(face);
  return e;
}

std::vector<PitTable::Entry> PitTable::take_matching(const ContentObject& object) {
  std::vector<Entry> out;
  // Only prefixes of the object name can be satisfied by it.
  for (std::size_t n = 0; n <= object.name.size(); ++n) {
    auto it = entries_.find(object.name.prefix(n));
    if (it == entries_.end() || !matches_interest(it->second.interest, object)) continue;
    out.push_back(std::move(it->second));
    entries_.erase(it);
  }
  return out;
}

// ---------------------------------------------------------------------------
// FibTable

void FibTable::add(const Name& prefix, FaceId face) { routes_[prefix].insert(face); }

std::optional<FaceId> FibTable::lpm(const Name& name) const {
  for (std::size_t n = name.size() + 1; n-- > 0;) {
    auto it = routes_.find(name.prefix(n));
    if (it != routes_.end() && !it->second.empty()) return *it->second.begin();
  }
  return std::nullopt;
}

std::vector<FibTable::Entry> FibTable::entries() const {
  std::vector<Entry> out;
  for (const auto& [prefix, faces] : routes_)
    for (FaceId f : faces) out.push_back({prefix, f});
  return out;
}

std::optional<FaceId> fib_lpm(const FibTable& fib, const Name& name) { return fib.lpm(name); }

// ---------------------------------------------------------------------------

void ContentMeta::record_fetch(Duration rtt) {
  if (!t_m) {
    t_m = rtt;
    return;
  }
  const Duration smoothed{(t_m->count() + rtt.count()) / 2};
  t_m = std::max(*t_m, smoothed);
}

// ---------------------------------------------------------------------------
// RouterState

RouterState::RouterState(RouterConfig config, std::unique_ptr<CachePolicy> cache,
                         std::unique_ptr<ReplyPolicy> reply)
    : config_(config),
      cs_(config.cache_capacity, config.replacement),
      pit_(config.pit_lifetime),
      cache_(cache ? std::move(cache) : std::make_unique<AlwaysCache>()),
      reply_(reply ? std::move(reply) : std::make_unique<ImmediateReply>()) {}

void RouterState::check_clock(SimTime now) {
  if (now < clock_) throw std::invalid_argument("router clock went backwards");
  clock_ = now;
}

void RouterState::purge_nonces(SimTime now) {
  while (!nonce_log_.empty() && nonce_log_.front().first + config_.pit_lifetime <= now) {
    seen_nonces_.erase(nonce_log_.front().second);
    nonce_log_.pop_front();
  }
}

std::vector<Action> RouterState::on_interest(const Interest& interest, FaceId in_face, SimTime now) {
  check_clock(now);
  pit_.expire(now);
  purge_nonces(now);
  ++stats_.interests;

  auto key = std::make_pair(interest.name, interest.nonce);
  if (seen_nonces_.contains(key)) {
    ++stats_.dropped;
    return {Drop{interest.name, DropReason::DuplicateNonce}};
  }
  seen_nonces_.insert(key);
  nonce_log_.emplace_back(now, std::move(key));

  // Decremented on arrival.
  std::optional<std::uint32_t> remaining;
  if (interest.scope) remaining = *interest.scope > 0 ? *interest.scope - 1 : 0;

  if (const ContentObject* hit = cs_.lookup(interest, now)) {
    ++stats_.cs_hits;
    const Duration delay = reply_->on_serve(meta_[hit->name], hit->name, true);
    return {SendData{*hit, in_face, delay, true}};
  }
  ++stats_.cs_misses;

  if (auto* pending = pit_.find(interest.name)) {
    pending->faces.insert(in_face);
    ++stats_.collapsed;
    return {CollapsePit{interest.name, in_face}};
  }

  if (remaining && *remaining == 0) {
    ++stats_.dropped;
    return {Drop{interest.name, DropReason::ScopeExhausted}};
  }

  std::optional<FaceId> out_face = cache_->redirect(interest, in_face);
  if (!out_face) out_face = fib_.lpm(interest.name);
  if (!out_face || *out_face == in_face) {
    ++stats_.dropped;
    return {Drop{interest.name, DropReason::NoRoute}};
  }

  Interest forwarded = interest;
  forwarded.scope = remaining;
  forwarded.hop_count = interest.hop_count + 1;
  pit_.insert(interest, in_face, now);
  ++stats_.forwarded;
  return {ForwardInterest{std::move(forwarded), *out_face}};
}

std::vector<Action> RouterState::on_data(const ContentObject& object, FaceId in_face, SimTime now,
                                         std::uint32_t upstream_hops) {
  check_clock(now);
  pit_.expire(now);
  ++stats_.data_in;

  auto satisfied = pit_.take_matching(object);
  if (satisfied.empty()) {
    ++stats_.unsolicited;
    return {};
  }

  std::set<FaceId> faces;
  SimTime earliest = satisfied.front().created;
  std::uint32_t position = satisfied.front().hop_position;
  for (const auto& e : satisfied) {
    faces.insert(e.faces.begin(), e.faces.end());
    earliest = std::min(earliest, e.created);
    position = std::min(position, e.hop_position);
  }
  faces.erase(in_face);

  auto& meta = meta_[object.name];
  meta.record_fetch(now - earliest);

  std::vector<Action> actions;
  for (FaceId f : faces) {
    reply_->on_serve(meta, object.name, false);
    actions.push_back(SendData{object, f, Duration{0}, false});
  }

  CacheContext ctx{object, position, position + 1 + upstream_hops, cs_.fill(), in_face};
  if (cs_.capacity() > 0 && cache_->should_cache(ctx)) {
    const bool existed = cs_.contains(object.name);
    if (auto evicted = cs_.insert(object, now)) {
      ++stats_.evicted;
      changes_.push_back({*evicted, false});
    }
    if (!existed) {
      ++stats_.inserted;
      changes_.push_back({object.name, true});
    }
  }
  return actions;
}

std::vector<CacheChange> RouterState::drain_cache_changes() {
  std::vector<CacheChange> out;
  out.swap(changes_);
  return out;
}

}  // namespace conlab
