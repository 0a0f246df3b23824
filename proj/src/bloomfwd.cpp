#include "conlab/bloomfwd.hpp"

#include <sodium.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "conlab/rng.hpp"

namespace conlab {

namespace {

struct SipKeys {
  std::uint8_t k1[crypto_shorthash_KEYBYTES];
  std::uint8_t k2[crypto_shorthash_KEYBYTES];
};

SipKeys derive_keys(std::uint64_t seed) {
  static_assert(2 * crypto_shorthash_KEYBYTES <= 32);
  Bytes material(as_bytes("conlab-bloom").begin(), as_bytes("conlab-bloom").end());
  put_be64(material, seed);
  const Digest d = sha256(material);
  SipKeys k;
  std::copy_n(d.begin(), crypto_shorthash_KEYBYTES, k.k1);
  std::copy_n(d.begin() + crypto_shorthash_KEYBYTES, crypto_shorthash_KEYBYTES, k.k2);
  return k;
}

const SipKeys& keys_for(std::uint64_t seed) {
  thread_local std::uint64_t cached_seed = 0;
  thread_local SipKeys cached = derive_keys(0);
  if (seed != cached_seed) {
    cached = derive_keys(seed);
    cached_seed = seed;
  }
  return cached;
}

std::uint64_t siphash(std::string_view element, const std::uint8_t* key) {
  std::uint8_t out[crypto_shorthash_BYTES];
  crypto_shorthash(out, reinterpret_cast<const unsigned char*>(element.data()), element.size(), key);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | out[i];
  return v;
}

void check_params(const BloomParams& p) {
  if (p.m == 0) throw std::invalid_argument("bloom: m must be positive");
  if (p.h == 0) throw std::invalid_argument("bloom: h must be positive");
}

BloomParams read_header(std::span<const std::uint8_t> data) {
  if (data.size() < 24) throw std::invalid_argument("bloom: truncated header");
  BloomParams p;
  p.m = get_be64(data.subspan(0, 8));
  const std::uint64_t h = get_be64(data.subspan(8, 8));
  if (h == 0 || h > UINT32_MAX) throw std::invalid_argument("bloom: bad hash count");
  p.h = static_cast<std::uint32_t>(h);
  p.seed = get_be64(data.subspan(16, 8));
  check_params(p);
  return p;
}

void write_header(Bytes& out, const BloomParams& p) {
  put_be64(out, p.m);
  put_be64(out, p.h);
  put_be64(out, p.seed);
}

}  // namespace

std::vector<std::uint64_t> bloom_positions(const BloomParams& params, std::string_view element) {
  check_params(params);
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  const SipKeys& k = keys_for(params.seed);
  const std::uint64_t h1 = siphash(element, k.k1) % params.m;
  const std::uint64_t h2 = (siphash(element, k.k2) | 1U) % params.m;
  std::vector<std::uint64_t> out(params.h);
  std::uint64_t g = h1;
  for (std::uint32_t i = 0; i < params.h; ++i) {
    out[i] = g;
    g = static_cast<std::uint64_t>((static_cast<unsigned __int128>(g) + h2) % params.m);
  }
  return out;
}

double expected_fp_rate(std::uint64_t m, std::uint32_t h, std::uint64_t n) {
  return std::pow(1.0 - std::exp(-static_cast<double>(h) * static_cast<double>(n) / static_cast<double>(m)), h);
}

// ---------------------------------------------------------------------------

BloomFilter::BloomFilter(BloomParams params) : params_(params) {
  check_params(params_);
  bits_.assign((params_.m + 7) / 8, 0);
}

void BloomFilter::insert(std::string_view element) {
  for (auto p : bloom_positions(params_, element)) set(p);
}

bool BloomFilter::query(std::string_view element) const {
  for (auto p : bloom_positions(params_, element))
    if (!test(p)) return false;
  return true;
}

bool BloomFilter::contains(const BloomFilter& other) const {
  if (!(other.params_ == params_)) throw std::invalid_argument("bloom: parameter mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if ((other.bits_[i] & ~bits_[i]) != 0) return false;
  return true;
}

void BloomFilter::merge(const BloomFilter& other) {
  if (!(other.params_ == params_)) throw std::invalid_argument("bloom: parameter mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
}

std::vector<std::uint64_t> BloomFilter::set_bits() const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 0; i < params_.m; ++i)
    if (test(i)) out.push_back(i);
  return out;
}

std::size_t BloomFilter::popcount() const {
  std::size_t n = 0;
  for (auto b : bits_) n += static_cast<std::size_t>(std::popcount(b));
  return n;
}

Bytes BloomFilter::serialize() const {
  Bytes out;
  write_header(out, params_);
  out.insert(out.end(), bits_.begin(), bits_.end());
  return out;
}

BloomFilter BloomFilter::deserialize(std::span<const std::uint8_t> data) {
  BloomFilter f(read_header(data));
  if (data.size() != 24 + f.bits_.size()) throw std::invalid_argument("bloom: bit array length mismatch");
  std::copy(data.begin() + 24, data.end(), f.bits_.begin());
  if (f.params_.m % 8 != 0 && (f.bits_.back() >> (f.params_.m % 8)) != 0)
    throw std::invalid_argument("bloom: padding bits set");
  return f;
}

bool bf_query(const BloomFilter& filter, std::string_view element) { return filter.query(element); }

// ---------------------------------------------------------------------------

CountingBloom::CountingBloom(BloomParams params) : params_(params) {
  check_params(params_);
  counters_.assign(params_.m, 0);
}

void CountingBloom::add_at(std::span<const std::uint64_t> positions) {
  for (auto p : positions) {
    if (counters_[p] == kMax) {
      saturated_ = true;
      continue;
    }
    ++counters_[p];
  }
}

void CountingBloom::remove_at(std::span<const std::uint64_t> positions) {
  for (auto p : positions)
    if (counters_[p] == 0) throw std::logic_error("counting bloom: remove without matching insert");
  for (auto p : positions)
    if (counters_[p] != kMax) --counters_[p];
}

bool CountingBloom::query_at(std::span<const std::uint64_t> positions) const {
  return std::all_of(positions.begin(), positions.end(), [this](auto p) { return counters_[p] > 0; });
}

void CountingBloom::insert(std::string_view element) {
  const auto pos = bloom_positions(params_, element);
  add_at(pos);
}

void CountingBloom::insert(const BloomFilter& element) {
  if (!(element.params() == params_)) throw std::invalid_argument("bloom: parameter mismatch");
  const auto pos = element.set_bits();
  add_at(pos);
}

void CountingBloom::remove(std::string_view element) {
  const auto pos = bloom_positions(params_, element);
  remove_at(pos);
}

void CountingBloom::remove(const BloomFilter& element) {
  if (!(element.params() == params_)) throw std::invalid_argument("bloom: parameter mismatch");
  const auto pos = element.set_bits();
  remove_at(pos);
}

bool CountingBloom::query(std::string_view element) const {
  const auto pos = bloom_positions(params_, element);
  return query_at(pos);
}

bool CountingBloom::query(const BloomFilter& element) const {
  if (!(element.params() == params_)) throw std::invalid_argument("bloom: parameter mismatch");
  const auto pos = element.set_bits();
  return query_at(pos);
}

void CountingBloom::clear() {
  std::fill(counters_.begin(), counters_.end(), 0);
  saturated_ = false;
}

Bytes CountingBloom::serialize() const {
  Bytes out;
  write_header(out, params_);
  out.insert(out.end(), counters_.begin(), counters_.end());
  return out;
}

CountingBloom CountingBloom::deserialize(std::span<const std::uint8_t> data) {
  CountingBloom f(read_header(data));
  if (data.size() != 24 + f.counters_.size()) throw std::invalid_argument("bloom: counter array length mismatch");
  std::copy(data.begin() + 24, data.end(), f.counters_.begin());
  f.saturated_ = std::find(f.counters_.begin(), f.counters_.end(), kMax) != f.counters_.end();
  return f;
}

// ---------------------------------------------------------------------------

BloomFilter encode_prefix(const Name& prefix, const BloomParams& params) {
  BloomFilter f(params);
  f.insert(prefix.to_string());
  return f;
}

HierarchicalBloom encode_name(const Name& name, const BloomParams& params) {
  if (name.is_root()) throw std::invalid_argument("encode_name: name needs at least one component");
  HierarchicalBloom hb;
  for (std::size_t i = 1; i <= name.size(); ++i) hb.levels.push_back(encode_prefix(name.prefix(i), params));
  return hb;
}

std::string_view to_string(BloomAction::Kind kind) {
  switch (kind) {
    case BloomAction::Kind::SendData: return "send_data";
    case BloomAction::Kind::Collapse: return "collapse_pit";
    case BloomAction::Kind::Forward: return "forward_interest";
    case BloomAction::Kind::Drop: return "drop";
  }
  return "unknown";
}

BloomAction normalize(const Action& action) {
  return std::visit(
      [](const auto& a) -> BloomAction {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, SendData>) return {BloomAction::Kind::SendData, a.face, a.from_cache};
        else if constexpr (std::is_same_v<T, CollapsePit>) return {BloomAction::Kind::Collapse, a.face, false};
        else if constexpr (std::is_same_v<T, ForwardInterest>) return {BloomAction::Kind::Forward, a.face, false};
        else return {BloomAction::Kind::Drop, 0, false};
      },
      action);
}

std::string describe(std::span<const BloomAction> actions) {
  std::ostringstream out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out << ' ';
    out << to_string(actions[i].kind);
    if (actions[i].kind != BloomAction::Kind::Drop) out << '@' << actions[i].face;
    if (actions[i].from_cache) out << "(cs)";
  }
  return actions.empty() ? "none" : out.str();
}

// ---------------------------------------------------------------------------

BloomRouter::BloomRouter(BloomParams params, std::size_t cs_capacity, Duration pit_lifetime)
    : params_(params), capacity_(cs_capacity), lifetime_(pit_lifetime), cs_index_(params) {}

std::size_t BloomRouter::add_route(const BloomFilter& prefix_filter, FaceId face) {
  if (!(prefix_filter.params() == params_)) throw std::invalid_argument("bloom: parameter mismatch");
  routes_.push_back({prefix_filter, face});
  return routes_.size() - 1;
}

CountingBloom& BloomRouter::face_filter(FaceId face) {
  return pit_.try_emplace(face, params_).first->second;
}

bool BloomRouter::pit_query(FaceId face, const BloomFilter& key) const {
  auto it = pit_.find(face);
  return it != pit_.end() && it->second.query(key);
}

std::optional<std::uint64_t> BloomRouter::cs_slot(const BloomFilter& key) const {
  std::optional<std::uint64_t> best;
  const auto [lo, hi] = by_key_.equal_range(key.bytes());
  for (auto it = lo; it != hi; ++it) best = std::max(best.value_or(0), it->second);
  return best;
}

void BloomRouter::cs_touch(std::uint64_t slot) {
  auto node = store_.extract(slot);
  const auto [lo, hi] = by_key_.equal_range(node.mapped().key.bytes());
  for (auto it = lo; it != hi; ++it)
    if (it->second == slot) it->second = ++seq_;
  node.key() = seq_;
  store_.insert(std::move(node));
}

const ContentObject* BloomRouter::cs_find(const BloomFilter& key) const {
  const auto slot = cs_slot(key);
  return slot ? &store_.at(*slot).object : nullptr;
}

void BloomRouter::rebuild_pit() {
  for (auto& [face, f] : pit_) f.clear();
  for (const auto& [bits, p] : pending_)
    for (const auto& [face, count] : p.faces)
      for (std::uint32_t i = 0; i < count; ++i) face_filter(face).insert(p.key);
  ++rebuilds_;
}

void BloomRouter::rebuild_cs_index() {
  cs_index_.clear();
  for (const auto& [slot, s] : store_) cs_index_.insert(s.key);
  ++rebuilds_;
}

void BloomRouter::expire(SimTime now) {
  bool removed = false;
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->second.expiry > now) {
      ++it;
      continue;
    }
    for (const auto& [face, count] : it->second.faces)
      for (std::uint32_t i = 0; i < count; ++i) face_filter(face).remove(it->second.key);
    it = pending_.erase(it);
    removed = true;
  }
  if (removed && std::any_of(pit_.begin(), pit_.end(), [](const auto& kv) { return kv.second.saturated(); }))
    rebuild_pit();
}

void BloomRouter::add_pending(const BloomFilter& key, FaceId face, SimTime now) {
  auto [it, fresh] = pending_.try_emplace(key.bytes(), Pending{key, now + lifetime_, {}});
  ++it->second.faces[face];
  auto& f = face_filter(face);
  f.insert(key);
  if (f.saturated()) rebuild_pit();
}

std::vector<BloomAction> BloomRouter::on_interest(const HierarchicalBloom& hb, FaceId in_face, SimTime now) {
  if (hb.size() == 0) throw std::invalid_argument("bloom interest needs at least one level");
  expire(now);
  decision_ = {};
  const BloomFilter& key = hb.last();

  if (cs_index_.query(key)) {
    if (const auto slot = cs_slot(key)) {
      cs_touch(*slot);
      decision_.stage = BloomStage::ContentStore;
      return {{BloomAction::Kind::SendData, in_face, true}};
    }
  }

  for (const auto& [face, f] : pit_)
    if (f.query(key)) decision_.pit_faces.push_back(face);
  if (!decision_.pit_faces.empty()) {
    decision_.stage = BloomStage::Pit;
    auto& p = pending_.try_emplace(key.bytes(), Pending{key, now + lifetime_, {}}).first->second;
    ++p.faces[in_face];
    auto& f = face_filter(in_face);
    f.insert(key);
    if (f.saturated()) rebuild_pit();
    return {{BloomAction::Kind::Collapse, in_face, false}};
  }

  // Longest prefix first, lowest face among hits at one level.
  for (std::size_t level = hb.size() + 1; level-- > 0;) {
    const BloomFilter probe = level == 0 ? encode_prefix(Name{}, params_) : hb.level(level);
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < routes_.size(); ++r)
      if (routes_[r].filter.contains(probe) && (!best || routes_[r].face < routes_[*best].face)) best = r;
    if (!best) continue;
    decision_.level = level;
    decision_.route_entry = best;
    const FaceId out = routes_[*best].face;
    if (out == in_face) break;
    decision_.stage = BloomStage::Route;
    add_pending(key, in_face, now);
    return {{BloomAction::Kind::Forward, out, false}};
  }
  decision_.stage = BloomStage::Drop;
  return {{BloomAction::Kind::Drop, 0, false}};
}

void BloomRouter::cs_insert(const ContentObject& object, const BloomFilter& key) {
  if (capacity_ == 0) return;
  const auto [lo, hi] = by_key_.equal_range(key.bytes());
  for (auto it = lo; it != hi; ++it) {
    auto& stored = store_.at(it->second);
    if (stored.object.name != object.name) continue;
    stored.object = object;
    cs_touch(it->second);
    return;
  }
  if (store_.size() >= capacity_) {
    const auto victim = store_.begin();
    const auto [vlo, vhi] = by_key_.equal_range(victim->second.key.bytes());
    for (auto it = vlo; it != vhi; ++it)
      if (it->second == victim->first) {
        by_key_.erase(it);
        break;
      }
    cs_index_.remove(victim->second.key);
    store_.erase(victim);
  }
  const std::uint64_t s = ++seq_;
  store_.emplace(s, Stored{object, key});
  by_key_.emplace(key.bytes(), s);
  cs_index_.insert(key);
  if (cs_index_.saturated()) rebuild_cs_index();
}

std::vector<BloomAction> BloomRouter::on_data(const ContentObject& object, const BloomFilter& key, FaceId in_face,
                                              SimTime now) {
  expire(now);
  std::vector<FaceId> faces;
  for (const auto& [face, f] : pit_)
    if (f.query(key)) faces.push_back(face);
  if (faces.empty()) return {};

  if (auto it = pending_.find(key.bytes()); it != pending_.end()) {
    for (const auto& [face, count] : it->second.faces)
      for (std::uint32_t i = 0; i < count; ++i) face_filter(face).remove(key);
    pending_.erase(it);
  }

  std::vector<BloomAction> out;
  for (FaceId f : faces)
    if (f != in_face) out.push_back({BloomAction::Kind::SendData, f, false});
  cs_insert(object, key);
  return out;
}

void BloomRouter::resync(const RouterState& plain) {
  pending_.clear();
  for (const auto& [name, e] : plain.pit().entries()) {
    const BloomFilter key = encode_name(name, params_).last();
    auto& p = pending_.try_emplace(key.bytes(), Pending{key, e.expiry, {}}).first->second;
    p.expiry = std::max(p.expiry, e.expiry);
    for (FaceId f : e.faces) ++p.faces[f];
  }
  rebuild_pit();

  store_.clear();
  by_key_.clear();
  cs_index_.clear();
  std::vector<const ContentStore::Entry*> order;
  for (const auto& [name, e] : plain.cs().entries()) order.push_back(&e);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->access_seq < b->access_seq; });
  for (const auto* e : order) cs_insert(e->object, encode_name(e->object.name, params_).last());
}

// ---------------------------------------------------------------------------

std::string_view to_string(DivergenceCause cause) {
  switch (cause) {
    case DivergenceCause::PitFalsePositive: return "pit_false_positive";
    case DivergenceCause::RouteFalsePositive: return "route_false_positive";
    case DivergenceCause::CsFalsePositive: return "cs_false_positive";
    case DivergenceCause::Bug: return "bug";
  }
  return "unknown";
}

std::size_t EquivalenceReport::confirmed_false_positives() const {
  return static_cast<std::size_t>(std::count_if(divergences.begin(), divergences.end(),
                                                [](const auto& d) { return d.cause != DivergenceCause::Bug; }));
}

std::size_t EquivalenceReport::bugs() const { return divergences.size() - confirmed_false_positives(); }

namespace {

struct ReplayEvent {
  SimTime at;
  std::uint64_t seq;
  bool data;
  FaceId face;
  Name name;
};

struct ReplayLater {
  bool operator()(const ReplayEvent& a, const ReplayEvent& b) const {
    return a.at != b.at ? a.at > b.at : a.seq > b.seq;
  }
};

std::vector<BloomAction> normalize_all(const std::vector<Action>& actions) {
  std::vector<BloomAction> out;
  for (const auto& a : actions) out.push_back(normalize(a));
  return out;
}

}  // namespace

EquivalenceReport equivalence_check(std::span<const FibTable::Entry> routes, std::span<const BloomRequest> workload,
                                    const EquivalenceConfig& config) {
  RouterConfig rc;
  rc.cache_capacity = config.cs_capacity;
  rc.pit_lifetime = config.pit_lifetime;
  RouterState plain(rc);
  BloomRouter bloom(config.params, config.cs_capacity, config.pit_lifetime);
  std::vector<Name> route_prefix;
  for (const auto& r : routes) {
    plain.fib().add(r.prefix, r.face);
    bloom.add_route(r.prefix, r.face);
    route_prefix.push_back(r.prefix);
  }

  std::priority_queue<ReplayEvent, std::vector<ReplayEvent>, ReplayLater> queue;
  std::uint64_t seq = 0;
  for (const auto& w : workload) queue.push({w.at, seq++, false, w.face, w.name});

  EquivalenceReport report;
  std::size_t step = 0;
  while (!queue.empty()) {
    ReplayEvent ev = queue.top();
    queue.pop();
    ++step;
    const HierarchicalBloom hb = encode_name(ev.name, config.params);
    const BloomFilter& key = hb.last();

    // Plaintext ground truth before either router moves.
    const PitTable::Entry* pending = plain.pit().find(ev.name);
    const bool truly_pending = pending != nullptr && pending->expiry > ev.at;
    const std::set<FaceId> true_faces = truly_pending ? pending->faces : std::set<FaceId>{};

    std::vector<BloomAction> want, got;
    bool silent = false;
    bool wrong_object = false;  // same actions, another name's object
    if (!ev.data) {
      ++report.interests;
      Interest interest;
      interest.name = ev.name;
      interest.nonce = ev.seq + 1;
      const auto actions = plain.on_interest(interest, ev.face, ev.at);
      for (const auto& a : actions)
        if (const auto* fw = std::get_if<ForwardInterest>(&a))
          queue.push({ev.at + config.upstream_rtt, seq++, true, fw->face, ev.name});
      want = normalize_all(actions);
      got = bloom.on_interest(hb, ev.face, ev.at);
      if (bloom.last_decision().stage == BloomStage::ContentStore) {
        const ContentObject* served = bloom.cs_find(key);
        wrong_object = served && served->name != ev.name;
      }
    } else {
      ++report.data;
      for (const auto& [name, e] : plain.pit().entries())
        if (name != ev.name && e.expiry > ev.at && encode_name(name, config.params).last() == key)
          silent = true;  // this data also takes the other name's Bloom PIT entry
      ContentObject obj;
      obj.name = ev.name;
      obj.payload.assign(config.payload_size, 0);
      want = normalize_all(plain.on_data(obj, ev.face, ev.at));
      got = bloom.on_data(obj, key, ev.face, ev.at);
      const ContentObject* cached = bloom.cs_find(key);
      if (!truly_pending && cached && cached->name == ev.name && !plain.cs().entries().contains(ev.name))
        silent = true;  // a face filter matched with nothing pending
    }
    if (want == got && !wrong_object) {
      if (silent) {
        ++report.silent_false_positives;
        bloom.resync(plain);
      }
      continue;
    }

    Divergence d{step, ev.at, ev.data, ev.name, describe(want), describe(got), DivergenceCause::Bug};
    if (!ev.data) {
      const BloomDecision& dec = bloom.last_decision();
      if (dec.stage == BloomStage::Pit && !truly_pending &&
          std::any_of(dec.pit_faces.begin(), dec.pit_faces.end(),
                      [&](FaceId f) { return !true_faces.contains(f); })) {
        d.cause = DivergenceCause::PitFalsePositive;
      } else if (dec.route_entry) {
        const Name& matched = route_prefix.at(*dec.route_entry);
        const Name truth = ev.name.prefix(dec.level);
        const bool filter_hit = bloom.routes()[*dec.route_entry].filter.contains(
            dec.level == 0 ? encode_prefix(Name{}, config.params) : hb.level(dec.level));
        if (filter_hit && matched != truth) d.cause = DivergenceCause::RouteFalsePositive;
      }
      if (d.cause == DivergenceCause::Bug && dec.stage == BloomStage::ContentStore && !got.empty()) {
        const ContentObject* served = bloom.cs_find(key);
        if (served && served->name != ev.name) d.cause = DivergenceCause::CsFalsePositive;
      }
    } else {
      // Extra faces must be ones the plaintext PIT never held.
      bool extra_only = true, any_extra = false;
      std::set<FaceId> got_faces, want_faces;
      for (const auto& a : got) got_faces.insert(a.face);
      for (const auto& a : want) want_faces.insert(a.face);
      for (FaceId f : want_faces)
        if (!got_faces.contains(f)) extra_only = false;
      for (FaceId f : got_faces)
        if (!want_faces.contains(f)) {
          any_extra = true;
          if (true_faces.contains(f)) extra_only = false;
        }
      if (extra_only && any_extra) d.cause = DivergenceCause::PitFalsePositive;
    }
    report.divergences.push_back(std::move(d));
    bloom.resync(plain);
  }
  return report;
}

}  // namespace conlab

namespace conlab {

double measure_fp_rate(const BloomParams& params, std::size_t n, std::size_t queries, std::size_t filters) {
  std::size_t hits = 0;
  for (std::size_t f = 0; f < filters; ++f) {
    BloomParams p = params;
    if (f > 0) p.seed = derive_seed(params.seed, 0x6670, f);
    const std::string tag = filters > 1 ? std::to_string(f) + "/" : std::string{};
    BloomFilter filter(p);
    for (std::size_t i = 0; i < n; ++i) filter.insert("/member/" + tag + std::to_string(i));
    for (std::size_t j = 0; j < queries; ++j) hits += filter.query("/probe/" + tag + std::to_string(j));
  }
  const std::size_t total = queries * filters;
  return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

std::vector<FibTable::Entry> reference_routes() {
  std::vector<FibTable::Entry> routes;
  for (std::uint32_t p = 0; p < 10; ++p) {
    const FaceId face = 1 + p % 2;
    routes.push_back({Name({"pub" + std::to_string(p)}), face});
    routes.push_back({Name({"pub" + std::to_string(p), "sec0"}), face == 1 ? 2U : 1U});
  }
  return routes;
}

std::vector<BloomRequest> reference_workload(std::size_t requests, std::uint64_t seed) {
  constexpr std::size_t kNames = 400;
  std::vector<Name> names;
  for (std::size_t i = 0; i < kNames; ++i) {
    const std::string pub = i % 41 == 40 ? "unrouted" + std::to_string(i) : "pub" + std::to_string(i % 10);
    names.push_back(Name({pub, "sec" + std::to_string((i / 10) % 4), "item" + std::to_string(i)}));
  }
  std::vector<double> cdf(kNames);
  double total = 0;
  for (std::size_t r = 0; r < kNames; ++r) cdf[r] = (total += 1.0 / static_cast<double>(r + 1));
  Rng rng(seed);
  std::vector<BloomRequest> out;
  for (std::size_t i = 0; i < requests; ++i) {
    const double u = rng.uniform01() * total;
    const std::size_t r = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    out.push_back({SimTime{static_cast<SimTime::rep>(i) * 1000}, static_cast<FaceId>(3 + rng.uniform_int(0, 3)),
                   names[std::min(r, kNames - 1)]});
  }
  return out;
}

}  // namespace conlab
