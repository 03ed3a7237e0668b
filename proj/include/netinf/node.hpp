#pragma once

#include <deque>

#include "netinf/effects.hpp"
#include "netinf/params.hpp"
#include "netinf/vnl.hpp"

namespace netinf::node {

enum class SessionState { Active, Interrupted, Delegated, Reestablishing, Closed };

const char* session_state_name(SessionState state);

struct Session {
  std::string sid;
  NodeId peer;
  std::uint64_t next_seq_out{0};
  std::uint64_t next_seq_in{0};
  SessionState state{SessionState::Active};
  std::optional<Where> peer_hint;

  // Reliability: copies of sent-but-unacked payloads and their retry counts.
  std::map<std::uint64_t, std::vector<std::uint8_t>> unacked;
  std::map<std::uint64_t, int> tries;
  // Out-of-order arrivals parked until the gap fills.
  std::map<std::uint64_t, std::vector<std::uint8_t>> reorder;
  // Payloads accepted while the session could not send; flushed in order.
  std::deque<std::vector<std::uint8_t>> send_buffer;
  // Application-visible deliveries, in order.
  std::vector<std::vector<std::uint8_t>> delivered;

  Tick interrupted_since{-1};
  Tick interruption_total{0};
  std::uint32_t resume_epoch{0};
};

struct Detached {};
struct Attached {
  EdgeNetworkId en;
  LocalAddress addr;
};
struct InTransit {
  EdgeNetworkId dest_en;
  Tick arrive_at{0};
  bool expect_peer{false};
};
using Attachment = std::variant<Detached, Attached, InTransit>;

struct PlainRole {};
struct DelegateFor {
  vnl::DelegationState st;
};
struct Delegating {
  NodeId delegate;
  LocalAddress delegate_addr;
  EdgeNetworkId old_en;
};
using Role = std::variant<PlainRole, DelegateFor, Delegating>;

struct TceCounters {
  std::uint64_t edge_sent{0};
  std::uint64_t core_sent{0};
  std::uint64_t data_sent{0};
  std::uint64_t map_requests{0};
  std::uint64_t delegations{0};
  std::uint64_t delegate_losses{0};
  std::uint64_t send_queue_full{0};
  std::uint64_t reorder_drops{0};
};

// Transport-coordination bookkeeping: outstanding waits and emit counters.
struct TceState {
  std::map<NodeId, Tick> pending_lookups; // peer -> local deadline estimate
  std::map<NodeId, int> map_tries;
  TceCounters counters;
};

struct MobileNodeState {
  NodeId id;
  std::string label;
  bool vnl_capable{false};
  Attachment attachment{Detached{}};
  std::map<std::string, Session> sessions;
  Role role{PlainRole{}};
  TceState tce;

  // Attach handshake staging: granted address until RegisterAck lands.
  std::optional<EdgeNetworkId> staging_en;
  std::optional<LocalAddress> pending_addr;
  bool staging_expect{false};

  bool attached() const { return std::holds_alternative<Attached>(attachment); }
  const Attached* attached_at() const { return std::get_if<Attached>(&attachment); }
  Session* find_session(const std::string& sid);
};

// Session state transition with interruption accounting and a trace line.
// The only place session.state changes.
void set_session_state(MobileNodeState& state, Session& session, SessionState next, Tick now,
                       Effects& effects);

std::string mn_line(const MobileNodeState& state, Tick now, const std::string& rest);

Effects attach(MobileNodeState& state, const EdgeNetworkId& en, Tick now, const Params& params);
Effects detach(MobileNodeState& state, Tick now, const EdgeNetworkId& dest_en, Tick arrive_at,
               bool expect_peer, std::optional<std::pair<NodeId, LocalAddress>> delegate,
               const Params& params);
Effects resume_session(MobileNodeState& state, const std::string& sid, const Where& where,
                       Tick now, const Params& params);
Effects rendezvous_lookup(MobileNodeState& state, const NodeId& peer, Tick ttl, Tick now,
                          const Params& params);
Effects send_data(MobileNodeState& state, const std::string& sid, std::vector<std::uint8_t> payload,
                  Tick now, const Params& params);
Effects handle_message(MobileNodeState& state, const msg::Message& message, Tick now,
                       const Params& params);
Effects on_timer(MobileNodeState& state, const Timer& timer, Tick now, const Params& params);

} // namespace netinf::node
