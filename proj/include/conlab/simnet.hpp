#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "conlab/defenses.hpp"
#include "conlab/forwarding.hpp"
#include "conlab/names.hpp"
#include "conlab/provenance.hpp"
#include "conlab/rng.hpp"

namespace conlab {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeKind { Consumer, Router, Producer };
std::string_view to_string(NodeKind kind);

// Nodes and undirected links with fixed one-way latency. Each node numbers its
// faces from 1 in the order its links were added.
class Topology {
 public:
  struct Node {
    std::string label;
    NodeKind kind = NodeKind::Router;
  };
  struct Link {
    NodeId a = 0;
    NodeId b = 0;
    Duration latency{0};
  };
  struct Port {
    FaceId face = 0;
    NodeId peer = 0;
    Duration latency{0};
  };

  NodeId add_node(std::string label, NodeKind kind);
  void add_link(NodeId a, NodeId b, Duration latency);

  std::optional<NodeId> find(std::string_view label) const;
  NodeId at(std::string_view label) const;
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Port>& ports(NodeId id) const { return ports_.at(id); }
  std::vector<NodeId> of_kind(NodeKind kind) const;

  std::optional<FaceId> face_to(NodeId from, NodeId to) const;
  const Port& port(NodeId node, FaceId face) const;

  // Router a consumer or producer is attached to.
  NodeId attachment(NodeId endpoint) const;

  // Minimum-latency path; only routers may be transit nodes.
  std::optional<std::vector<NodeId>> shortest_path(NodeId from, NodeId to) const;

  bool connected() const;
  // Consumers and producers attach to exactly one router each.
  void validate() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<std::vector<Port>> ports_;
};

struct CatalogEntry {
  Name name;
  std::size_t payload_size = 1024;
  NodeId producer = 0;
  // Producer answers any name under `name` with an object of that exact name.
  bool serves_prefix = false;
};

struct ScheduledRequest {
  SimTime at{0};
  NodeId consumer = 0;
  Interest interest;
  std::optional<Duration> lifetime;
};

enum class DefenseKind { None, WaitBeforeReply, DelayFirstK, Collaborative, Probabilistic };
std::string_view to_string(DefenseKind kind);
std::optional<DefenseKind> parse_defense(std::string_view text);
std::vector<std::string> defense_names();

struct DefenseConfig {
  DefenseKind kind = DefenseKind::None;
  std::uint64_t k_min = 1;
  std::uint64_t k_max = 8;
  double p0 = 0.7;
  std::vector<NodeId> members;  // collaborative partition
  std::vector<NodeId> routers;  // routers running the defense; empty = all
};

enum class AttackKind { None, Timing, Monitor, Dump };
std::string_view to_string(AttackKind kind);

struct AttackConfig {
  AttackKind kind = AttackKind::None;
  std::optional<NodeId> adversary;
  std::optional<NodeId> victim_closest;  // timing: consumer sharing the adversary's first hop
  std::optional<NodeId> victim_distant;  // timing: consumer in another subtree
  std::size_t trials = 200;
  double epsilon_fraction = 0.5;  // of per-hop RTT / 2
  std::optional<Duration> epsilon;
  Name target_prefix;  // timing: fresh targets are target_prefix/t<i>
  Name target;         // monitor
  Name prefix;         // dump
  std::uint32_t scope = 2;
  Duration period = std::chrono::milliseconds(500);
  SimTime start{0};
  SimTime horizon = std::chrono::seconds(10);
};

struct SimParams {
  std::uint64_t seed = 1;
  std::size_t cache_capacity = 100;
  std::map<NodeId, std::size_t> capacity;  // per-router override
  Replacement replacement = Replacement::Lru;
  Duration pit_lifetime = std::chrono::seconds(4);
  Duration processing = std::chrono::microseconds(100);
  Duration jitter{0};  // processing is uniform in [processing - jitter, processing + jitter]
};

struct Scenario {
  std::string id = "scenario";
  Topology topology;
  std::vector<CatalogEntry> catalog;
  std::vector<ScheduledRequest> schedule;
  AttackConfig attack;
  DefenseConfig defense;
  SimParams params;

  std::size_t capacity_of(NodeId router) const;
  // Catalog entry responsible for a name, if any.
  const CatalogEntry* covering_entry(const Name& name) const;
};

struct TraceRecord {
  SimTime time{0};
  NodeId node = 0;
  std::string action;
  std::string name;
  std::optional<FaceId> face;
  std::string detail;
};

using RequestId = std::size_t;

struct RequestRecord {
  RequestId id = 0;
  NodeId consumer = 0;
  Interest interest;
  SimTime issued{0};
  SimTime deadline{0};
  std::optional<SimTime> satisfied;
  bool timed_out = false;
  std::optional<Name> data_name;
  std::optional<NodeId> origin;  // node that supplied the data
  bool from_cache = false;

  bool pending() const { return !satisfied && !timed_out; }
  std::optional<Duration> rtt() const {
    if (!satisfied) return std::nullopt;
    return *satisfied - issued;
  }
};

struct Trace {
  static constexpr std::string_view kHeader = "time,node,action,name,face,detail";

  std::vector<std::string> labels;  // node id -> label
  std::vector<TraceRecord> events;
  std::vector<RequestRecord> requests;
  std::map<NodeId, RouterStats> router_stats;

  void write_csv(std::ostream& out) const;
};

std::string csv_field(std::string_view text);

// Deterministic discrete-event simulation of one scenario. Events at equal
// times run in scheduling order.
class Network {
 public:
  explicit Network(Scenario scenario);

  RequestId request(NodeId consumer, Interest interest, SimTime at,
                    std::optional<Duration> lifetime = std::nullopt);

  bool step();
  void run();
  // Runs every event with time <= t and advances the clock to t.
  void run_until(SimTime t);
  void run_until_resolved(RequestId id);

  // Issues the interest at `at` and runs until data or timeout.
  std::optional<Duration> measure_rtt(NodeId node, Interest interest, SimTime at);

  SimTime now() const { return now_; }
  const Scenario& scenario() const { return scenario_; }
  const Topology& topology() const { return scenario_.topology; }
  RouterState& router(NodeId id);
  const RouterState& router(NodeId id) const;
  std::vector<NodeId> routers() const;
  const RequestRecord& record(RequestId id) const { return trace_.requests.at(id); }
  const Trace& trace() const { return trace_; }
  Trace take_trace();

  NodeId first_hop(NodeId endpoint) const { return topology().attachment(endpoint); }
  std::optional<NodeId> producer_for(const Name& name) const;
  // Routers between a consumer and the producer of `name`, nearest first.
  std::vector<NodeId> router_path(NodeId consumer, const Name& name) const;

  // Called after every processed event.
  void set_observer(std::function<void(const Network&)> observer) { observer_ = std::move(observer); }

  const KeyPair& producer_key(NodeId producer) const;

 private:
  struct InterestPacket {
    Interest interest;
  };
  struct DataPacket {
    std::shared_ptr<const ContentObject> object;
    std::uint32_t upstream_hops = 0;
    NodeId origin = 0;
    bool from_cache = false;
  };
  struct Emit {
    RequestId id;
  };
  struct Arrive {
    NodeId node;
    FaceId face;
    std::variant<InterestPacket, DataPacket> packet;
  };
  struct Process {
    NodeId router;
    FaceId face;
    Interest interest;
  };
  struct Timeout {
    RequestId id;
  };
  struct Event {
    SimTime time;
    std::uint64_t seq;
    std::variant<Emit, Arrive, Process, Timeout> what;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  struct ProducerState {
    KeyPair key;
    std::map<Name, std::shared_ptr<const ContentObject>> signed_objects;
  };

  void build_routers();
  void build_fib();
  void validate_schedule() const;
  void schedule(SimTime t, std::variant<Emit, Arrive, Process, Timeout> what);
  void dispatch(const Event& e);
  void on_emit(const Emit& e);
  void on_arrive(Arrive& a);
  void on_process(Process& p);
  void on_timeout(const Timeout& t);
  void consumer_data(NodeId consumer, const DataPacket& pkt);
  void producer_interest(NodeId producer, FaceId face, const Interest& interest);
  void apply_actions(NodeId router, std::vector<Action> actions, const DataPacket* incoming);
  void send(NodeId from, FaceId face, SimTime depart, std::variant<InterestPacket, DataPacket> packet);
  Duration processing_delay();
  void log(NodeId node, std::string action, std::string name, std::optional<FaceId> face,
           std::string detail = {});
  std::shared_ptr<const ContentObject> produce(NodeId producer, const Name& name, std::size_t size);

  Scenario scenario_;
  std::map<NodeId, std::unique_ptr<RouterState>> routers_;
  std::map<NodeId, ProducerState> producers_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t seq_ = 0;
  SimTime now_{0};
  Rng rng_;
  Trace trace_;
  std::function<void(const Network&)> observer_;
};

Trace run(const Scenario& scenario);

// Consumers whose path to the producer traverses `router`. Uses the only
// producer when none is given.
std::size_t anonymity_set(const Topology& topology, NodeId router,
                          std::optional<NodeId> producer = std::nullopt);

}  // namespace conlab
