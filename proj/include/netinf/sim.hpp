#pragma once

#include <functional>
#include <queue>
#include <random>

#include "netinf/edge.hpp"
#include "netinf/lcs.hpp"
#include "netinf/node.hpp"
#include "netinf/trace.hpp"
#include "netinf/vnl_ops.hpp"

namespace netinf::sim {

// Protocol-level run failure (bad handshake, impossible action); distinct
// from SimBug, which always marks an engine defect.
struct RunAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LinkSpec {
  Tick latency{1};
  double loss{0.0};
};

// Latency/loss between locations. A location is an edge-network name or
// "core". Unconfigured pairs fall back to the distance defaults.
class LinkModel {
 public:
  static constexpr Tick kIntraEn = 1;
  static constexpr Tick kEnToCore = 5;
  static constexpr Tick kEnToEn = 10;

  void set_link(const std::string& a, const std::string& b, Tick latency, double loss);
  LinkSpec resolve(const std::string& a, const std::string& b) const;
  bool any_lossy() const { return any_lossy_; }

 private:
  std::map<std::pair<std::string, std::string>, LinkSpec> links_;
  bool any_lossy_{false};
};

struct ClassCounters {
  std::uint64_t sent{0};
  std::uint64_t delivered{0};
  std::uint64_t dropped{0};
  std::uint64_t stranded{0};
  std::uint64_t in_flight{0};
};

struct NetMetrics {
  ClassCounters by_class[3];
  std::uint64_t map_replies{0};

  ClassCounters& of(msg::MsgClass cls) { return by_class[static_cast<int>(cls)]; }
  const ClassCounters& of(msg::MsgClass cls) const { return by_class[static_cast<int>(cls)]; }
};

// Deterministic discrete-event engine: integer ticks, (tick, seqno) event
// order, and a single RNG consumed only by loss draws on lossy links.
class Engine {
 public:
  Engine(Params params, std::uint64_t seed);

  // --- construction; silent, happens before any event at t=0 ---
  void add_edge_network(const EdgeNetworkId& en);
  void set_link(const std::string& a, const std::string& b, Tick latency, double loss);
  NodeId add_node(const std::string& label, const EdgeNetworkId& home, bool vnl_capable);
  void add_session(const std::string& sid, const std::string& label_a,
                   const std::string& label_b);

  // --- scenario actions; callable from the action handler mid-run ---
  void schedule_action(Tick at, std::size_t index);
  void set_action_handler(std::function<void(std::size_t, Tick)> handler) {
    action_handler_ = std::move(handler);
  }
  void start_move(const std::string& label, const EdgeNetworkId& dest, Tick travel,
                  bool use_delegate, bool expect_peer);
  void send_payload(const std::string& label, const std::string& sid, std::size_t bytes);
  void set_param(const std::string& key, Tick value);

  void run(Tick until);

  // --- inspection ---
  Tick now() const { return now_; }
  std::uint64_t event_count() const { return event_count_; }
  std::uint64_t seed() const { return seed_; }
  const Params& params() const { return params_; }
  const NetMetrics& metrics() const { return metrics_; }
  TraceSink& trace() { return trace_; }
  const TraceSink& trace() const { return trace_; }
  lcs::LcsState& lcs() { return lcs_; }
  const lcs::LcsState& lcs() const { return lcs_; }
  edge::LocalServerState& local_server(const EdgeNetworkId& en);
  const edge::LocalServerState& local_server(const EdgeNetworkId& en) const;
  const std::vector<std::string>& node_order() const { return node_order_; }
  const std::vector<EdgeNetworkId>& en_order() const { return en_order_; }
  const node::MobileNodeState& node_state(const std::string& label) const;
  node::MobileNodeState& node_state(const std::string& label);
  const std::optional<EdgeNetworkId>& presence(const NodeId& id) const {
    return presence_.at(id);
  }
  bool has_node(const std::string& label) const { return label_to_id_.count(label) != 0; }
  bool has_en(const EdgeNetworkId& en) const { return servers_.count(en) != 0; }

 private:
  struct Deliver {
    msg::Message message;
  };
  struct MobilityArrive {
    NodeId nid;
    EdgeNetworkId en;
  };
  struct NodeTimer {
    Timer timer;
  };
  struct LsSweep {
    EdgeNetworkId en;
  };
  struct ActionAt {
    std::size_t index;
  };
  using EventBody = std::variant<Deliver, MobilityArrive, NodeTimer, LsSweep, ActionAt>;

  struct Event {
    Tick at{0};
    std::uint64_t seqno{0};
    EventBody body;
  };
  struct LaterEvent {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seqno > b.seqno;
    }
  };

  void schedule(Tick at, EventBody body);
  double next_unit(); // one RNG draw in [0,1)

  // Send paths. src_loc is where the message physically leaves from.
  void transmit(msg::Message&& message, const std::string& src_loc);
  void send_from_ls(const EdgeNetworkId& en, msg::Endpoint dst, msg::Body body);
  void send_from_lcs(msg::Endpoint dst, msg::Body body);
  void dispatch_node_effects(node::MobileNodeState& actor,
                             const std::optional<std::string>& loc, Effects&& effects);

  void on_deliver(msg::Message&& message);
  void deliver_to_node(msg::Message&& message, const EdgeNetworkId& target_en);
  void ls_dispatch(const EdgeNetworkId& en, const msg::Message& message);
  void lcs_dispatch(const msg::Message& message);
  void on_sweep(const EdgeNetworkId& en);

  std::string net_line(const char* verb, const msg::Message& message) const;
  std::string ls_line(const EdgeNetworkId& en, const std::string& rest) const;

  Params params_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  TraceSink trace_;
  lcs::LcsState lcs_;
  LinkModel links_;
  IdRegistry registry_;

  std::map<EdgeNetworkId, edge::LocalServerState> servers_;
  std::vector<EdgeNetworkId> en_order_;
  std::map<NodeId, node::MobileNodeState> nodes_;
  std::map<std::string, NodeId> label_to_id_;
  std::vector<std::string> node_order_;
  std::map<NodeId, std::optional<EdgeNetworkId>> presence_;
  std::map<std::pair<std::string, std::string>, std::uint64_t> send_index_;

  std::priority_queue<Event, std::vector<Event>, LaterEvent> queue_;
  std::uint64_t seqno_counter_{0};
  std::uint64_t msg_id_counter_{0};
  Tick now_{0};
  std::uint64_t event_count_{0};
  NetMetrics metrics_;
  std::function<void(std::size_t, Tick)> action_handler_;
  bool running_{false};
};

// Deterministic payload content for generated sends: a function of the
// session id, the per-session send index, and the byte offset only.
std::vector<std::uint8_t> make_payload(const std::string& sid, std::uint64_t index,
                                       std::size_t bytes);

} // namespace netinf::sim
