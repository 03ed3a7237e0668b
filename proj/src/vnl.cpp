#include "netinf/vnl_ops.hpp"

#include <algorithm>

#include "netinf/node.hpp"

namespace netinf::vnl {
namespace {

std::string vnl_line(Tick now, const std::string& op, const NodeId& principal,
                     const NodeId& delegate) {
  return "t=" + std::to_string(now) + " vnl " + op + " principal=" + principal.short_hex() +
         " delegate=" + delegate.short_hex();
}

void emit_edge(node::MobileNodeState& state, Effects& effects, const EdgeNetworkId& en,
               msg::Body body) {
  ++state.tce.counters.edge_sent;
  effects.messages.push_back(Outbound{msg::LsEndpoint{en}, std::move(body), {}, {}, false});
}

void emit_core(node::MobileNodeState& state, Effects& effects, msg::Body body) {
  ++state.tce.counters.core_sent;
  effects.messages.push_back(Outbound{msg::LcsEndpoint{}, std::move(body), {}, {}, false});
}

void emit_as(node::MobileNodeState& state, Effects& effects, const NodeId& to, const Where& hint,
             msg::Body body, std::optional<NodeId> claimed_src, std::optional<Where> reply_to,
             bool omit_reply_to) {
  ++state.tce.counters.data_sent;
  effects.messages.push_back(Outbound{msg::NodeEndpoint{to, hint}, std::move(body),
                                      std::move(claimed_src), std::move(reply_to),
                                      omit_reply_to});
}

} // namespace

SessionSnapshot* DelegationState::find_session(const std::string& sid) {
  for (auto& snap : sessions) {
    if (snap.sid == sid) return &snap;
  }
  return nullptr;
}

std::optional<NodeId> select_delegate(const std::vector<Candidate>& candidates) {
  std::optional<NodeId> best;
  for (const auto& candidate : candidates) {
    if (!candidate.vnl_capable) continue;
    if (!best || candidate.id < *best) best = candidate.id;
  }
  return best;
}

Effects accept_delegation(node::MobileNodeState& delegate, const msg::DelegateRequest& request,
                          const msg::Message& envelope, Tick now, const Params&) {
  Effects effects;
  auto reject = [&](const std::string& reason) {
    effects.trace.push_back(node::mn_line(
        delegate, now, "delegate_refuse principal=" + request.principal.short_hex() +
                           " reason=" + reason));
    std::optional<Where> hint = envelope.reply_to;
    if (!hint) hint = Where{request.principal_addr};
    emit_as(delegate, effects, request.principal, *hint,
            msg::DelegateReject{delegate.id, request.principal, reason}, {}, {}, true);
    return std::move(effects);
  };
  if (!std::holds_alternative<node::PlainRole>(delegate.role)) {
    return reject("busy");
  }
  const auto* attached = delegate.attached_at();
  if (attached == nullptr || attached->en != request.principal_addr.en) {
    return reject("not-local");
  }

  DelegationState st;
  st.principal = request.principal;
  st.principal_old_addr = request.principal_addr;
  st.dest_en = request.dest_en;
  st.sessions = request.sessions;
  st.started_at = now;
  delegate.role = node::DelegateFor{std::move(st)};
  ++delegate.tce.counters.delegations;

  effects.trace.push_back(vnl_line(now, "DelegateStart", request.principal, delegate.id));
  emit_edge(delegate, effects, attached->en,
            msg::BindingRegister{request.principal, delegate.id, attached->addr});
  // The principal is already off the air; this ack strands by design and the
  // handover is reconciled at sync time.
  emit_as(delegate, effects, request.principal, Where{request.principal_addr},
          msg::DelegateAck{delegate.id, request.principal, attached->addr}, {}, {}, true);
  return effects;
}

Effects proxy_handle(node::MobileNodeState& delegate, const msg::DelegateData& wrapped,
                     const msg::Message& envelope, Tick now, const Params& params) {
  Effects effects;
  auto* role = std::get_if<node::DelegateFor>(&delegate.role);
  if (role == nullptr || role->st.principal != wrapped.principal) {
    effects.trace.push_back(node::mn_line(
        delegate, now, "proxy_drop principal=" + wrapped.principal.short_hex() +
                           " reason=no_delegation"));
    return effects;
  }
  DelegationState& st = role->st;
  const msg::Data& data = wrapped.inner;
  SessionSnapshot* snap = st.find_session(data.sid);
  if (snap == nullptr) {
    if (envelope.reply_to) {
      emit_as(delegate, effects, data.from, *envelope.reply_to,
              msg::SessionReject{data.sid, st.principal, "unknown session"}, st.principal, {},
              true);
    }
    return effects;
  }
  auto ack = [&](std::uint64_t seq) {
    if (!envelope.reply_to) return;
    emit_as(delegate, effects, data.from, *envelope.reply_to,
            msg::DataAck{data.sid, st.principal, seq}, st.principal, {}, true);
  };
  if (data.seq < snap->next_seq_in) {
    ack(data.seq); // duplicate; the earlier ack may have been lost
    return effects;
  }
  if (st.overflowed || st.total_buffered() >= params.delegate_buffer_cap) {
    if (!st.overflowed) {
      st.overflowed = true;
      effects.trace.push_back(vnl_line(now, "BufferOverflow", st.principal, delegate.id));
    }
    return effects; // silence: no ack, sender's loss machinery takes over
  }
  if (data.seq > snap->next_seq_in) {
    st.held[{data.sid, data.seq}] = data.payload;
    return effects;
  }
  st.buffer.push_back(BufferedData{data.sid, data.seq, data.payload});
  ++snap->next_seq_in;
  effects.trace.push_back(vnl_line(now, "ProxyData", st.principal, delegate.id) +
                          " sid=" + data.sid + " seq=" + std::to_string(data.seq));
  ack(data.seq);
  while (true) {
    auto held = st.held.find({data.sid, snap->next_seq_in});
    if (held == st.held.end()) break;
    std::uint64_t seq = held->first.second;
    st.buffer.push_back(BufferedData{data.sid, seq, std::move(held->second)});
    st.held.erase(held);
    ++snap->next_seq_in;
    effects.trace.push_back(vnl_line(now, "ProxyData", st.principal, delegate.id) + " sid=" +
                            data.sid + " seq=" + std::to_string(seq));
    ack(seq);
  }
  return effects;
}

Effects proxy_handle_resume(node::MobileNodeState& delegate, const msg::Resume& resume,
                            const msg::Message& envelope, Tick now, const Params&) {
  Effects effects;
  auto* role = std::get_if<node::DelegateFor>(&delegate.role);
  if (role == nullptr) {
    effects.trace.push_back(
        node::mn_line(delegate, now, "proxy_drop sid=" + resume.sid + " reason=no_delegation"));
    return effects;
  }
  DelegationState& st = role->st;
  SessionSnapshot* snap = st.find_session(resume.sid);
  if (snap == nullptr) {
    if (envelope.reply_to) {
      emit_as(delegate, effects, resume.from, *envelope.reply_to,
              msg::SessionReject{resume.sid, st.principal, "unknown session"}, st.principal, {},
              true);
    }
    return effects;
  }
  if (envelope.reply_to) snap->peer_hint = envelope.reply_to;
  if (envelope.reply_to) {
    // Answer under the principal's identity, anchored at its old address so
    // the peer keeps sending through the binding.
    emit_as(delegate, effects, resume.from, *envelope.reply_to,
            msg::ResumeAck{resume.sid, st.principal, snap->next_seq_in}, st.principal,
            Where{st.principal_old_addr}, false);
  }
  return effects;
}

Effects sync_begin(node::MobileNodeState& principal, Tick now, const Params& params) {
  Effects effects;
  const auto* role = std::get_if<node::Delegating>(&principal.role);
  if (role == nullptr) {
    effects.abort = true;
    effects.abort_why = "sync_begin without a delegation in progress";
    return effects;
  }
  effects.trace.push_back(
      node::mn_line(principal, now, "sync_request delegate=" + role->delegate.short_hex()));
  emit_as(principal, effects, role->delegate, Where{role->delegate_addr},
          msg::SyncRequest{principal.id}, {}, {}, false);
  effects.timers.push_back(
      TimerArm{now + params.resume_timeout,
               Timer{TimerKind::SyncTimeout, principal.id, "", 0, role->delegate, 0}});
  return effects;
}

Effects handle_sync_request(node::MobileNodeState& delegate, const msg::SyncRequest& request,
                            const msg::Message& envelope, Tick now, const Params&) {
  Effects effects;
  auto* role = std::get_if<node::DelegateFor>(&delegate.role);
  if (role == nullptr || role->st.principal != request.principal) {
    if (envelope.reply_to) {
      emit_as(delegate, effects, request.principal, *envelope.reply_to,
              msg::SyncReject{delegate.id, request.principal}, {}, {}, true);
    }
    return effects;
  }
  DelegationState st = std::move(role->st);
  delegate.role = node::PlainRole{};
  effects.trace.push_back(
      node::mn_line(delegate, now, "sync_reply principal=" + st.principal.short_hex()));
  if (const auto* attached = delegate.attached_at()) {
    emit_edge(delegate, effects, attached->en, msg::BindingRelease{st.principal, delegate.id});
  }
  if (envelope.reply_to) {
    emit_as(delegate, effects, st.principal, *envelope.reply_to,
            msg::SyncReply{delegate.id, st.principal, std::move(st.sessions),
                           std::move(st.buffer)},
            {}, {}, false);
  }
  return effects;
}

Effects sync_apply(node::MobileNodeState& principal, const msg::SyncReply& reply, Tick now,
                   const Params& params) {
  Effects effects;
  const auto* role = std::get_if<node::Delegating>(&principal.role);
  if (role == nullptr || role->delegate != reply.delegate) {
    effects.trace.push_back(node::mn_line(
        principal, now, "sync_stale delegate=" + reply.delegate.short_hex()));
    return effects;
  }
  // Replay what the delegate acked on our behalf: contiguous from the point
  // we left off, so delivery order is exactly the acked order.
  for (const BufferedData& entry : reply.buffer) {
    node::Session* session = principal.find_session(entry.sid);
    if (session == nullptr) throw SimBug("sync replay for unknown session " + entry.sid);
    if (entry.seq != session->next_seq_in) {
      throw SimBug("sync replay out of order for session " + entry.sid);
    }
    session->delivered.push_back(entry.payload);
    ++session->next_seq_in;
    effects.trace.push_back(node::mn_line(
        principal, now, "data_deliver sid=" + entry.sid + " seq=" + std::to_string(entry.seq) +
                            " replay=1"));
  }
  effects.trace.push_back(vnl_line(now, "SyncDone", principal.id, reply.delegate));
  principal.role = node::PlainRole{};
  for (const SessionSnapshot& snap : reply.sessions) {
    node::Session* session = principal.find_session(snap.sid);
    if (session == nullptr) throw SimBug("sync snapshot for unknown session " + snap.sid);
    if (session->next_seq_in != snap.next_seq_in) {
      throw SimBug("sync replay left a gap for session " + snap.sid);
    }
    if (snap.peer_hint) session->peer_hint = snap.peer_hint;
    if (session->state == node::SessionState::Delegated) {
      node::set_session_state(principal, *session, node::SessionState::Active, now, effects);
    }
    if (session->peer_hint) {
      effects.merge(
          node::resume_session(principal, snap.sid, *session->peer_hint, now, params));
    } else {
      ++principal.tce.counters.map_requests;
      effects.trace.push_back(
          node::mn_line(principal, now, "map_request target=" + snap.peer.short_hex()));
      emit_core(principal, effects, msg::MapRequestMsg{principal.id, snap.peer});
    }
  }
  return effects;
}

Effects delegate_lost(node::MobileNodeState& principal, Tick now, const Params&) {
  Effects effects;
  const auto* role = std::get_if<node::Delegating>(&principal.role);
  if (role == nullptr) return effects;
  NodeId delegate = role->delegate;
  principal.role = node::PlainRole{};
  ++principal.tce.counters.delegate_losses;
  effects.trace.push_back(vnl_line(now, "DelegateLost", principal.id, delegate));

  std::set<NodeId> peers;
  for (auto& [sid, session] : principal.sessions) {
    if (session.state != node::SessionState::Delegated) continue;
    node::set_session_state(principal, session, node::SessionState::Interrupted, now, effects);
    peers.insert(session.peer);
  }
  if (const auto* attached = principal.attached_at()) {
    for (const NodeId& peer : peers) {
      effects.trace.push_back(node::mn_line(
          principal, now, "cache_query sid=- target=" + peer.short_hex()));
      emit_edge(principal, effects, attached->en, msg::CacheQuery{principal.id, peer});
    }
  }
  return effects;
}

} // namespace netinf::vnl
