#include "conlab/simnet.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

namespace conlab {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Consumer: return "consumer";
    case NodeKind::Router: return "router";
    case NodeKind::Producer: return "producer";
  }
  return "unknown";
}

std::string_view to_string(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::None: return "none";
    case DefenseKind::WaitBeforeReply: return "wait_before_reply";
    case DefenseKind::DelayFirstK: return "delay_first_k";
    case DefenseKind::Collaborative: return "collaborative";
    case DefenseKind::Probabilistic: return "probabilistic";
  }
  return "unknown";
}

std::vector<std::string> defense_names() {
  return {"none", "wait_before_reply", "delay_first_k", "collaborative", "probabilistic"};
}

std::optional<DefenseKind> parse_defense(std::string_view text) {
  for (auto kind : {DefenseKind::None, DefenseKind::WaitBeforeReply, DefenseKind::DelayFirstK,
                    DefenseKind::Collaborative, DefenseKind::Probabilistic})
    if (to_string(kind) == text) return kind;
  return std::nullopt;
}

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::None: return "none";
    case AttackKind::Timing: return "timing";
    case AttackKind::Monitor: return "monitor";
    case AttackKind::Dump: return "dump";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Topology

NodeId Topology::add_node(std::string label, NodeKind kind) {
  if (label.empty()) throw ScenarioError("node label must not be empty");
  if (find(label)) throw ScenarioError("duplicate node label '" + label + "'");
  nodes_.push_back({std::move(label), kind});
  ports_.emplace_back();
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Topology::add_link(NodeId a, NodeId b, Duration latency) {
  if (a >= nodes_.size() || b >= nodes_.size()) throw ScenarioError("link references unknown node");
  if (a == b) throw ScenarioError("self-link on '" + nodes_[a].label + "'");
  if (latency < Duration{0}) throw ScenarioError("negative link latency");
  if (face_to(a, b)) throw ScenarioError("duplicate link " + nodes_[a].label + " - " + nodes_[b].label);
  links_.push_back({a, b, latency});
  ports_[a].push_back({static_cast<FaceId>(ports_[a].size() + 1), b, latency});
  ports_[b].push_back({static_cast<FaceId>(ports_[b].size() + 1), a, latency});
}

std::optional<NodeId> Topology::find(std::string_view label) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].label == label) return static_cast<NodeId>(i);
  return std::nullopt;
}

NodeId Topology::at(std::string_view label) const {
  if (auto id = find(label)) return *id;
  throw ScenarioError("unknown node '" + std::string(label) + "'");
}

std::vector<NodeId> Topology::of_kind(NodeKind kind) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].kind == kind) out.push_back(static_cast<NodeId>(i));
  return out;
}

std::optional<FaceId> Topology::face_to(NodeId from, NodeId to) const {
  for (const auto& p : ports_.at(from))
    if (p.peer == to) return p.face;
  return std::nullopt;
}

const Topology::Port& Topology::port(NodeId node, FaceId face) const {
  const auto& ps = ports_.at(node);
  if (face == 0 || face > ps.size()) throw std::out_of_range("no such face");
  return ps[face - 1];
}

NodeId Topology::attachment(NodeId endpoint) const {
  const auto& ps = ports_.at(endpoint);
  if (ps.empty()) throw ScenarioError("'" + nodes_[endpoint].label + "' is not attached to a router");
  return ps.front().peer;
}

std::optional<std::vector<NodeId>> Topology::shortest_path(NodeId from, NodeId to) const {
  constexpr auto inf = std::numeric_limits<Duration::rep>::max();
  std::vector<Duration::rep> dist(nodes_.size(), inf);
  std::vector<NodeId> prev(nodes_.size(), std::numeric_limits<NodeId>::max());
  using Item = std::pair<Duration::rep, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[from] = 0;
  pq.emplace(0, from);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d != dist[u]) continue;
    if (u == to) break;
    if (u != from && nodes_[u].kind != NodeKind::Router) continue;
    for (const auto& p : ports_[u]) {
      const auto nd = d + p.latency.count();
      if (nd < dist[p.peer]) {
        dist[p.peer] = nd;
        prev[p.peer] = u;
        pq.emplace(nd, p.peer);
      }
    }
  }
  if (dist[to] == inf) return std::nullopt;
  std::vector<NodeId> path{to};
  while (path.back() != from) path.push_back(prev[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

bool Topology::connected() const {
  if (nodes_.empty()) return true;
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<NodeId> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (const auto& p : ports_[u])
      if (!seen[p.peer]) {
        seen[p.peer] = true;
        stack.push_back(p.peer);
      }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

void Topology::validate() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeKind::Router) continue;
    const auto& ps = ports_[i];
    if (ps.size() != 1)
      throw ScenarioError(std::string(to_string(nodes_[i].kind)) + " '" + nodes_[i].label +
                          "' must attach to exactly one router");
    if (nodes_[ps.front().peer].kind != NodeKind::Router)
      throw ScenarioError("'" + nodes_[i].label + "' must attach to a router");
  }
  if (!connected()) throw ScenarioError("topology is not connected");
}

// ---------------------------------------------------------------------------
// Scenario / Trace

std::size_t Scenario::capacity_of(NodeId router) const {
  if (auto it = params.capacity.find(router); it != params.capacity.end()) return it->second;
  return params.cache_capacity;
}

const CatalogEntry* Scenario::covering_entry(const Name& name) const {
  for (const auto& e : catalog)
    if (e.name == name || (e.serves_prefix && is_prefix_of(e.name, name))) return &e;
  for (const auto& e : catalog)
    if (is_prefix_of(name, e.name)) return &e;
  return nullptr;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void Trace::write_csv(std::ostream& out) const {
  out << kHeader << '\n';
  for (const auto& e : events) {
    out << e.time.count() << ',' << csv_field(labels.at(e.node)) << ',' << e.action << ','
        << csv_field(e.name) << ',';
    if (e.face) out << *e.face;
    out << ',' << csv_field(e.detail) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Network

Network::Network(Scenario scenario) : scenario_(std::move(scenario)), rng_(derive_seed(scenario_.params.seed, 0x51)) {
  scenario_.topology.validate();
  for (const auto& n : scenario_.topology.nodes()) trace_.labels.push_back(n.label);
  validate_schedule();
  build_routers();
  build_fib();
  for (NodeId p : scenario_.topology.of_kind(NodeKind::Producer))
    producers_[p].key = make_ephemeral_identity(derive_seed(scenario_.params.seed, 0x9a, p));
  for (const auto& req : scenario_.schedule) request(req.consumer, req.interest, req.at, req.lifetime);
}

void Network::validate_schedule() const {
  const auto& topo = scenario_.topology;
  SimTime last{0};
  for (const auto& req : scenario_.schedule) {
    if (req.at < last) throw ScenarioError("schedule times must be sorted");
    last = req.at;
    if (req.consumer >= topo.size() || topo.node(req.consumer).kind != NodeKind::Consumer)
      throw ScenarioError("scheduled request from a non-consumer node");
    const CatalogEntry* entry = scenario_.covering_entry(req.interest.name);
    if (entry == nullptr)
      throw ScenarioError("scheduled name " + req.interest.name.to_string() + " is not in the catalog");
    if (!topo.shortest_path(req.consumer, entry->producer))
      throw ScenarioError("producer '" + topo.node(entry->producer).label + "' unreachable from '" +
                          topo.node(req.consumer).label + "' for " + req.interest.name.to_string());
  }
}

void Network::build_routers() {
  const auto& topo = scenario_.topology;
  const auto& def = scenario_.defense;
  const std::uint64_t seed = scenario_.params.seed;
  auto runs_defense = [&](NodeId r) {
    return def.routers.empty() || std::find(def.routers.begin(), def.routers.end(), r) != def.routers.end();
  };
  std::optional<Partition> partition;
  if (def.kind == DefenseKind::Collaborative) {
    if (def.members.empty()) throw ScenarioError("collaborative defense needs members");
    for (NodeId m : def.members)
      if (topo.node(m).kind != NodeKind::Router) throw ScenarioError("partition members must be routers");
    partition = Partition::uniform(def.members);
  }

  for (NodeId r : topo.of_kind(NodeKind::Router)) {
    RouterConfig cfg;
    cfg.cache_capacity = scenario_.capacity_of(r);
    cfg.replacement = scenario_.params.replacement;
    cfg.pit_lifetime = scenario_.params.pit_lifetime;
    std::unique_ptr<CachePolicy> cache;
    std::unique_ptr<ReplyPolicy> reply;
    switch (def.kind) {
      case DefenseKind::None: break;
      case DefenseKind::WaitBeforeReply:
        if (runs_defense(r)) reply = std::make_unique<WaitBeforeReply>();
        break;
      case DefenseKind::DelayFirstK:
        if (runs_defense(r)) reply = std::make_unique<DelayFirstK>(def.k_min, def.k_max, derive_seed(seed, 0x4b, r));
        break;
      case DefenseKind::Probabilistic:
        if (runs_defense(r)) cache = std::make_unique<ProbabilisticCache>(def.p0, derive_seed(seed, 0x50, r));
        break;
      case DefenseKind::Collaborative:
        if (partition->is_member(r)) {
          std::map<NodeId, FaceId> faces;
          for (NodeId m : def.members)
            if (m != r)
              if (auto f = topo.face_to(r, m)) faces[m] = *f;
          auto collab = std::make_unique<CollaborativeCache>(*partition, r, faces);
          if (!collab->fully_connected()) log(r, "collab_fallback", "", std::nullopt, "unreachable_member");
          cache = std::move(collab);
        }
        break;
    }
    routers_[r] = std::make_unique<RouterState>(cfg, std::move(cache), std::move(reply));
  }
}

void Network::build_fib() {
  const auto& topo = scenario_.topology;
  std::map<Name, std::set<NodeId>> by_first;
  for (const auto& e : scenario_.catalog) by_first[e.name.prefix(1)].insert(e.producer);
  std::vector<std::pair<Name, NodeId>> routes;
  for (const auto& [first, producers] : by_first)
    if (producers.size() == 1) routes.emplace_back(first, *producers.begin());
  for (const auto& e : scenario_.catalog)
    if (by_first[e.name.prefix(1)].size() > 1) routes.emplace_back(e.name, e.producer);

  std::map<std::pair<NodeId, NodeId>, std::optional<FaceId>> next_hop;
  for (auto& [r, state] : routers_) {
    for (const auto& [prefix, producer] : routes) {
      auto key = std::make_pair(r, producer);
      if (!next_hop.contains(key)) {
        auto path = topo.shortest_path(r, producer);
        next_hop[key] = path && path->size() >= 2 ? topo.face_to(r, (*path)[1]) : std::nullopt;
      }
      if (auto face = next_hop[key]) state->fib().add(prefix, *face);
    }
  }
}

RequestId Network::request(NodeId consumer, Interest interest, SimTime at, std::optional<Duration> lifetime) {
  if (consumer >= topology().size() || topology().node(consumer).kind != NodeKind::Consumer)
    throw std::invalid_argument("requests must come from a consumer node");
  if (at < now_) throw std::invalid_argument("cannot schedule a request in the past");
  if (interest.nonce == 0) interest.nonce = rng_.next() | 1;
  RequestRecord rec;
  rec.id = trace_.requests.size();
  rec.consumer = consumer;
  rec.interest = std::move(interest);
  rec.issued = at;
  rec.deadline = at + lifetime.value_or(scenario_.params.pit_lifetime);
  trace_.requests.push_back(std::move(rec));
  const RequestId id = trace_.requests.back().id;
  schedule(at, Emit{id});
  schedule(trace_.requests.back().deadline, Timeout{id});
  return id;
}

void Network::schedule(SimTime t, std::variant<Emit, Arrive, Process, Timeout> what) {
  queue_.push(Event{t, seq_++, std::move(what)});
}

bool Network::step() {
  if (queue_.empty()) return false;
  Event e = queue_.top();
  queue_.pop();
  now_ = std::max(now_, e.time);
  dispatch(e);
  if (observer_) observer_(*this);
  return true;
}

void Network::run() {
  while (step()) {
  }
}

void Network::run_until(SimTime t) {
  while (!queue_.empty() && queue_.top().time <= t) step();
  now_ = std::max(now_, t);
}

void Network::run_until_resolved(RequestId id) {
  while (record(id).pending() && step()) {
  }
}

std::optional<Duration> Network::measure_rtt(NodeId node, Interest interest, SimTime at) {
  const RequestId id = request(node, std::move(interest), at);
  run_until_resolved(id);
  return record(id).rtt();
}

RouterState& Network::router(NodeId id) {
  auto it = routers_.find(id);
  if (it == routers_.end()) throw std::out_of_range("not a router");
  return *it->second;
}

const RouterState& Network::router(NodeId id) const {
  auto it = routers_.find(id);
  if (it == routers_.end()) throw std::out_of_range("not a router");
  return *it->second;
}

std::vector<NodeId> Network::routers() const {
  std::vector<NodeId> out;
  for (const auto& [id, _] : routers_) out.push_back(id);
  return out;
}

Trace Network::take_trace() {
  for (const auto& [id, r] : routers_) trace_.router_stats[id] = r->stats();
  Trace out = std::move(trace_);
  trace_ = Trace{};
  trace_.labels = out.labels;
  return out;
}

std::optional<NodeId> Network::producer_for(const Name& name) const {
  if (const auto* e = scenario_.covering_entry(name)) return e->producer;
  return std::nullopt;
}

std::vector<NodeId> Network::router_path(NodeId consumer, const Name& name) const {
  std::vector<NodeId> out;
  auto producer = producer_for(name);
  if (!producer) return out;
  auto path = topology().shortest_path(consumer, *producer);
  if (!path) return out;
  for (NodeId n : *path)
    if (topology().node(n).kind == NodeKind::Router) out.push_back(n);
  return out;
}

const KeyPair& Network::producer_key(NodeId producer) const { return producers_.at(producer).key; }

Duration Network::processing_delay() {
  const auto base = scenario_.params.processing.count();
  const auto j = scenario_.params.jitter.count();
  if (j <= 0) return scenario_.params.processing;
  const auto offset = static_cast<Duration::rep>(rng_.uniform_int(0, static_cast<std::uint64_t>(2 * j))) - j;
  return Duration{std::max<Duration::rep>(0, base + offset)};
}

void Network::log(NodeId node, std::string action, std::string name, std::optional<FaceId> face,
                  std::string detail) {
  trace_.events.push_back({now_, node, std::move(action), std::move(name), face, std::move(detail)});
}

void Network::dispatch(const Event& e) {
  std::visit(
      [this](auto ev) {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, Emit>) on_emit(ev);
        else if constexpr (std::is_same_v<T, Arrive>) on_arrive(ev);
        else if constexpr (std::is_same_v<T, Process>) on_process(ev);
        else on_timeout(ev);
      },
      e.what);
}

void Network::send(NodeId from, FaceId face, SimTime depart, std::variant<InterestPacket, DataPacket> packet) {
  const auto& port = topology().port(from, face);
  const auto back = topology().face_to(port.peer, from);
  schedule(depart + port.latency, Arrive{port.peer, *back, std::move(packet)});
}

// Every request is emitted through the consumer's local forwarder, which
// counts as the first scope hop.
void Network::on_emit(const Emit& e) {
  auto& rec = trace_.requests.at(e.id);
  std::string detail;
  if (rec.interest.scope) detail = "scope=" + std::to_string(*rec.interest.scope);
  log(rec.consumer, "request", rec.interest.name.to_string(), 1, detail);
  Interest out = rec.interest;
  out.hop_count = 0;
  if (out.scope) {
    out.scope = *out.scope > 0 ? *out.scope - 1 : 0;
    if (*out.scope == 0) {
      log(rec.consumer, "drop", out.name.to_string(), std::nullopt, "reason=scope_local");
      rec.timed_out = true;
      return;
    }
  }
  // Registered as pending only once emitted.
  rec.deadline = std::max(rec.deadline, now_);
  send(rec.consumer, 1, now_, InterestPacket{std::move(out)});
}

void Network::on_timeout(const Timeout& t) {
  auto& rec = trace_.requests.at(t.id);
  if (!rec.pending()) return;
  rec.timed_out = true;
  log(rec.consumer, "timeout", rec.interest.name.to_string(), std::nullopt,
      "after=" + format_us(rec.deadline - rec.issued));
}

void Network::on_arrive(Arrive& a) {
  const NodeKind kind = topology().node(a.node).kind;
  if (auto* ip = std::get_if<InterestPacket>(&a.packet)) {
    if (kind == NodeKind::Router) {
      schedule(now_ + processing_delay(), Process{a.node, a.face, std::move(ip->interest)});
    } else if (kind == NodeKind::Producer) {
      producer_interest(a.node, a.face, ip->interest);
    }
    return;
  }
  auto& dp = std::get<DataPacket>(a.packet);
  if (kind == NodeKind::Consumer) {
    consumer_data(a.node, dp);
  } else if (kind == NodeKind::Router) {
    auto& r = router(a.node);
    auto actions = r.on_data(*dp.object, a.face, now_, dp.upstream_hops);
    if (actions.empty()) log(a.node, "unsolicited", dp.object->name.to_string(), a.face);
    apply_actions(a.node, std::move(actions), &dp);
  }
}

void Network::on_process(Process& p) {
  auto actions = router(p.router).on_interest(p.interest, p.face, now_);
  apply_actions(p.router, std::move(actions), nullptr);
}

void Network::apply_actions(NodeId node, std::vector<Action> actions, const DataPacket* incoming) {
  for (auto& action : actions) {
    if (auto* sd = std::get_if<SendData>(&action)) {
      std::string detail = "delay=" + format_us(sd->delay);
      if (sd->from_cache) detail += ";source=cache";
      log(node, "send_data", sd->object.name.to_string(), sd->face, detail);
      DataPacket pkt;
      if (sd->from_cache || incoming == nullptr) {
        pkt.object = std::make_shared<const ContentObject>(std::move(sd->object));
        pkt.upstream_hops = 1;
        pkt.origin = node;
        pkt.from_cache = true;
      } else {
        pkt = *incoming;
        pkt.upstream_hops = incoming->upstream_hops + 1;
      }
      send(node, sd->face, now_ + sd->delay + processing_delay(), std::move(pkt));
    } else if (auto* cp = std::get_if<CollapsePit>(&action)) {
      log(node, "collapse_pit", cp->name.to_string(), cp->face);
    } else if (auto* fw = std::get_if<ForwardInterest>(&action)) {
      std::string detail;
      if (fw->interest.scope) detail = "scope=" + std::to_string(*fw->interest.scope);
      log(node, "forward_interest", fw->interest.name.to_string(), fw->face, detail);
      send(node, fw->face, now_, InterestPacket{std::move(fw->interest)});
    } else if (auto* dr = std::get_if<Drop>(&action)) {
      log(node, "drop", dr->name.to_string(), std::nullopt, "reason=" + std::string(to_string(dr->reason)));
    }
  }
  if (topology().node(node).kind == NodeKind::Router)
    for (auto& change : router(node).drain_cache_changes())
      log(node, change.inserted ? "cache_insert" : "cache_evict", change.name.to_string(), std::nullopt);
}

void Network::consumer_data(NodeId consumer, const DataPacket& pkt) {
  bool any = false;
  for (auto& rec : trace_.requests) {
    if (rec.consumer != consumer || !rec.pending() || rec.issued > now_) continue;
    if (!matches_interest(rec.interest, *pkt.object)) continue;
    rec.satisfied = now_;
    rec.data_name = pkt.object->name;
    rec.origin = pkt.origin;
    rec.from_cache = pkt.from_cache;
    any = true;
    log(consumer, "deliver", pkt.object->name.to_string(), 1,
        "rtt=" + format_us(now_ - rec.issued) + ";origin=" + trace_.labels.at(pkt.origin));
  }
  if (!any) log(consumer, "unsolicited", pkt.object->name.to_string(), 1);
}

std::shared_ptr<const ContentObject> Network::produce(NodeId producer, const Name& name, std::size_t size) {
  auto& state = producers_.at(producer);
  if (auto it = state.signed_objects.find(name); it != state.signed_objects.end()) return it->second;
  Rng fill(get_be64(sha256(name.to_string())));
  Bytes payload(size);
  for (auto& b : payload) b = static_cast<std::uint8_t>(fill.next());
  auto obj = std::make_shared<const ContentObject>(sign_object(name, std::move(payload), state.key));
  state.signed_objects.emplace(name, obj);
  return obj;
}

void Network::producer_interest(NodeId producer, FaceId face, const Interest& interest) {
  std::optional<std::pair<Name, std::size_t>> best;
  auto consider = [&](const Name& n, std::size_t size) {
    if (!best || n < best->first) best.emplace(n, size);
  };
  for (const auto& e : scenario_.catalog) {
    if (e.producer != producer) continue;
    if (e.serves_prefix) {
      if (is_prefix_of(e.name, interest.name) && !interest.exclusions.contains(interest.name))
        consider(interest.name, e.payload_size);
    } else if (matches_interest(interest, e.name)) {
      consider(e.name, e.payload_size);
    }
  }
  if (!best) {
    log(producer, "no_content", interest.name.to_string(), face);
    return;
  }
  log(producer, "produce", best->first.to_string(), face);
  DataPacket pkt;
  pkt.object = produce(producer, best->first, best->second);
  pkt.upstream_hops = 0;
  pkt.origin = producer;
  send(producer, face, now_, std::move(pkt));
}

Trace run(const Scenario& scenario) {
  Network net(scenario);
  net.run();
  return net.take_trace();
}

std::size_t anonymity_set(const Topology& topology, NodeId router, std::optional<NodeId> producer) {
  if (!producer) {
    const auto producers = topology.of_kind(NodeKind::Producer);
    if (producers.empty()) throw ScenarioError("topology has no producer");
    producer = producers.front();
  }
  std::size_t count = 0;
  for (NodeId c : topology.of_kind(NodeKind::Consumer)) {
    auto path = topology.shortest_path(c, *producer);
    if (path && std::find(path->begin(), path->end(), router) != path->end()) ++count;
  }
  return count;
}

}  // namespace conlab
