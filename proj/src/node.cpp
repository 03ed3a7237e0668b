#include "netinf/node.hpp"

#include <algorithm>
#include <sstream>

#include "netinf/vnl_ops.hpp"

namespace netinf {

void Effects::merge(Effects&& other) {
  for (auto& m : other.messages) messages.push_back(std::move(m));
  for (auto& t : other.timers) timers.push_back(std::move(t));
  for (auto& line : other.trace) trace.push_back(std::move(line));
  if (other.abort && !abort) {
    abort = true;
    abort_why = std::move(other.abort_why);
  }
}

} // namespace netinf

namespace netinf::node {
namespace {

Effects abort_with(std::string why) {
  Effects effects;
  effects.abort = true;
  effects.abort_why = std::move(why);
  return effects;
}

std::string seq_str(std::uint64_t seq) { return std::to_string(seq); }

// Outbound constructors keep the class counters honest in one place.
void emit_edge(MobileNodeState& state, Effects& effects, const EdgeNetworkId& en, msg::Body body) {
  ++state.tce.counters.edge_sent;
  effects.messages.push_back(Outbound{msg::LsEndpoint{en}, std::move(body), {}, {}, false});
}

void emit_core(MobileNodeState& state, Effects& effects, msg::Body body) {
  ++state.tce.counters.core_sent;
  effects.messages.push_back(Outbound{msg::LcsEndpoint{}, std::move(body), {}, {}, false});
}

void emit_node(MobileNodeState& state, Effects& effects, const NodeId& to, const Where& hint,
               msg::Body body, bool is_ack = false) {
  ++state.tce.counters.data_sent;
  Outbound out{msg::NodeEndpoint{to, hint}, std::move(body), {}, {}, is_ack};
  effects.messages.push_back(std::move(out));
}

EdgeNetworkId current_en(const MobileNodeState& state) {
  if (const auto* attached = state.attached_at()) return attached->en;
  if (state.staging_en) return *state.staging_en;
  throw SimBug("node has no current edge network");
}

Effects send_one_data(MobileNodeState& state, Session& session, std::vector<std::uint8_t> payload,
                      Tick now, const Params& params, bool flushed) {
  Effects effects;
  std::uint64_t seq = session.next_seq_out++;
  session.unacked[seq] = payload;
  session.tries[seq] = 0;
  effects.timers.push_back(
      TimerArm{now + params.retransmit_every,
               Timer{TimerKind::Retransmit, state.id, session.sid, seq, session.peer, 0}});
  effects.trace.push_back(mn_line(state, now,
                                  "data_tx sid=" + session.sid + " seq=" + seq_str(seq) +
                                      (flushed ? " flushed=1" : "")));
  emit_node(state, effects, session.peer, *session.peer_hint,
            msg::Data{session.sid, state.id, seq, std::move(payload)});
  return effects;
}

Effects flush_send_buffer(MobileNodeState& state, Session& session, Tick now,
                          const Params& params) {
  Effects effects;
  while (!session.send_buffer.empty() && session.state == SessionState::Active &&
         session.peer_hint && state.attached()) {
    std::vector<std::uint8_t> payload = std::move(session.send_buffer.front());
    session.send_buffer.pop_front();
    effects.merge(send_one_data(state, session, std::move(payload), now, params, true));
  }
  return effects;
}

// Peer told us what it has delivered so far: clear what it holds, resend the
// rest it may have missed.
Effects resync_unacked(MobileNodeState& state, Session& session, std::uint64_t peer_next_seq_in,
                       Tick now, const Params& params) {
  Effects effects;
  for (auto it = session.unacked.begin(); it != session.unacked.end();) {
    if (it->first < peer_next_seq_in) {
      session.tries.erase(it->first);
      it = session.unacked.erase(it);
    } else {
      ++it;
    }
  }
  if (!session.peer_hint || !state.attached()) return effects;
  for (const auto& [seq, payload] : session.unacked) {
    // The handshake moved us to a fresh path; attempts on the dead one no
    // longer count against the retry budget.
    session.tries[seq] = 0;
    effects.trace.push_back(
        mn_line(state, now, "retransmit sid=" + session.sid + " seq=" + seq_str(seq)));
    emit_node(state, effects, session.peer, *session.peer_hint,
              msg::Data{session.sid, state.id, seq, payload});
    effects.timers.push_back(
        TimerArm{now + params.retransmit_every,
                 Timer{TimerKind::Retransmit, state.id, session.sid, seq, session.peer, 0}});
  }
  return effects;
}

Effects deliver_in_order(MobileNodeState& state, Session& session, std::uint64_t seq,
                         std::vector<std::uint8_t> payload, const std::optional<Where>& ack_to,
                         Tick now, const Params& params) {
  Effects effects;
  session.delivered.push_back(std::move(payload));
  ++session.next_seq_in;
  effects.trace.push_back(
      mn_line(state, now, "data_deliver sid=" + session.sid + " seq=" + seq_str(seq)));
  if (ack_to) {
    emit_node(state, effects, session.peer, *ack_to, msg::DataAck{session.sid, state.id, seq},
              /*is_ack=*/true);
  }
  // Drain whatever the gap was holding back.
  while (true) {
    auto held = session.reorder.find(session.next_seq_in);
    if (held == session.reorder.end()) break;
    std::uint64_t held_seq = held->first;
    std::vector<std::uint8_t> held_payload = std::move(held->second);
    session.reorder.erase(held);
    session.delivered.push_back(std::move(held_payload));
    ++session.next_seq_in;
    effects.trace.push_back(
        mn_line(state, now, "data_deliver sid=" + session.sid + " seq=" + seq_str(held_seq)));
    if (ack_to) {
      emit_node(state, effects, session.peer, *ack_to,
                msg::DataAck{session.sid, state.id, held_seq}, /*is_ack=*/true);
    }
  }
  (void)params;
  return effects;
}

Effects handle_data(MobileNodeState& state, const msg::Data& data, const msg::Message& envelope,
                    Tick now, const Params& params) {
  Session* session = state.find_session(data.sid);
  if (session == nullptr || session->state == SessionState::Closed) {
    Effects effects;
    effects.trace.push_back(mn_line(state, now, "reject sid=" + data.sid + " reason=unknown"));
    if (envelope.reply_to) {
      emit_node(state, effects, data.from, *envelope.reply_to,
                msg::SessionReject{data.sid, state.id, "unknown session"}, /*is_ack=*/true);
    }
    return effects;
  }
  if (data.seq == session->next_seq_in) {
    return deliver_in_order(state, *session, data.seq, data.payload, envelope.reply_to, now,
                            params);
  }
  Effects effects;
  if (data.seq < session->next_seq_in) {
    // Duplicate — our ack may have been lost; ack again, deliver nothing.
    effects.trace.push_back(
        mn_line(state, now, "data_dup sid=" + data.sid + " seq=" + seq_str(data.seq)));
    if (envelope.reply_to) {
      emit_node(state, effects, data.from, *envelope.reply_to,
                msg::DataAck{data.sid, state.id, data.seq}, /*is_ack=*/true);
    }
    return effects;
  }
  if (session->reorder.size() >= params.reorder_cap && session->reorder.count(data.seq) == 0) {
    ++state.tce.counters.reorder_drops;
    effects.trace.push_back(
        mn_line(state, now, "reorder_drop sid=" + data.sid + " seq=" + seq_str(data.seq)));
    return effects;
  }
  session->reorder[data.seq] = data.payload;
  effects.trace.push_back(
      mn_line(state, now, "data_held sid=" + data.sid + " seq=" + seq_str(data.seq)));
  return effects;
}

Effects handle_resume(MobileNodeState& state, const msg::Resume& resume,
                      const msg::Message& envelope, Tick now, const Params& params) {
  Session* session = state.find_session(resume.sid);
  Effects effects;
  if (session == nullptr || session->state == SessionState::Closed) {
    effects.trace.push_back(mn_line(state, now, "reject sid=" + resume.sid + " reason=unknown"));
    if (envelope.reply_to) {
      emit_node(state, effects, resume.from, *envelope.reply_to,
                msg::SessionReject{resume.sid, state.id, "unknown session"}, /*is_ack=*/true);
    }
    return effects;
  }
  effects.trace.push_back(mn_line(state, now, "resume_rx sid=" + resume.sid));
  if (envelope.reply_to) session->peer_hint = envelope.reply_to;
  if (session->state == SessionState::Interrupted) {
    set_session_state(state, *session, SessionState::Reestablishing, now, effects);
  }
  if (session->state == SessionState::Reestablishing) {
    ++session->resume_epoch; // cancels any outstanding resume timer
    set_session_state(state, *session, SessionState::Active, now, effects);
  }
  if (envelope.reply_to) {
    emit_node(state, effects, session->peer, *envelope.reply_to,
              msg::ResumeAck{resume.sid, state.id, session->next_seq_in});
  }
  effects.merge(resync_unacked(state, *session, resume.next_seq_in, now, params));
  effects.merge(flush_send_buffer(state, *session, now, params));
  return effects;
}

Effects handle_resume_ack(MobileNodeState& state, const msg::ResumeAck& ack,
                          const msg::Message& envelope, Tick now, const Params& params) {
  Session* session = state.find_session(ack.sid);
  Effects effects;
  if (session == nullptr || session->state == SessionState::Closed) {
    effects.trace.push_back(mn_line(state, now, "reject sid=" + ack.sid + " reason=unknown"));
    return effects;
  }
  if (envelope.reply_to) session->peer_hint = envelope.reply_to;
  if (session->state == SessionState::Reestablishing) {
    ++session->resume_epoch;
    set_session_state(state, *session, SessionState::Active, now, effects);
  }
  effects.merge(resync_unacked(state, *session, ack.next_seq_in, now, params));
  effects.merge(flush_send_buffer(state, *session, now, params));
  return effects;
}

Effects handle_register_ack(MobileNodeState& state, Tick now, const Params& params) {
  if (!state.staging_en || !state.pending_addr) {
    return abort_with("RegisterAck without a pending attach handshake");
  }
  Effects effects;
  EdgeNetworkId en = *state.staging_en;
  LocalAddress addr = *state.pending_addr;
  bool expect_peer = state.staging_expect;
  state.attachment = Attached{en, addr};
  state.staging_en.reset();
  state.pending_addr.reset();
  state.staging_expect = false;

  effects.trace.push_back(
      mn_line(state, now, "attach_update en=" + en + " parent=" + edge_ar(en).render()));
  emit_core(state, effects, msg::AttachUpdate{state.id, edge_ar(en)});

  if (params.update_policy == UpdatePolicy::Eager) {
    for (auto& [sid, session] : state.sessions) {
      if (session.state == SessionState::Closed) continue;
      effects.trace.push_back(mn_line(state, now, "correspondent_update sid=" + sid));
      emit_core(state, effects, msg::CorrespondentUpdate{state.id, session.peer, Where{addr}});
    }
  }

  if (std::holds_alternative<Delegating>(state.role)) {
    effects.merge(vnl::sync_begin(state, now, params));
    return effects;
  }

  for (auto& [sid, session] : state.sessions) {
    if (session.state == SessionState::Closed || session.state == SessionState::Delegated) {
      continue;
    }
    if (expect_peer) {
      effects.merge(rendezvous_lookup(state, session.peer, params.lookup_ttl, now, params));
    } else {
      effects.trace.push_back(mn_line(state, now, "cache_query sid=" + sid + " target=" +
                                                      session.peer.short_hex()));
      emit_edge(state, effects, en, msg::CacheQuery{state.id, session.peer});
    }
  }
  return effects;
}

Effects resume_sessions_with_peer(MobileNodeState& state, const NodeId& peer, const Where& where,
                                  Tick now, const Params& params) {
  Effects effects;
  std::vector<std::string> sids;
  for (auto& [sid, session] : state.sessions) {
    if (session.peer != peer) continue;
    bool down = session.state == SessionState::Interrupted ||
                session.state == SessionState::Reestablishing;
    // Active with a hint: the hint came from a live handshake, which is never
    // older than a looked-up locator — leave it alone. Active without one is
    // the buffered send_data path waiting on exactly this answer.
    bool blind = session.state == SessionState::Active && !session.peer_hint;
    if (down || blind) sids.push_back(sid);
  }
  for (const std::string& sid : sids) {
    effects.merge(resume_session(state, sid, where, now, params));
  }
  return effects;
}

Effects emit_map_request(MobileNodeState& state, const NodeId& peer, Tick now) {
  Effects effects;
  ++state.tce.counters.map_requests;
  effects.trace.push_back(mn_line(state, now, "map_request target=" + peer.short_hex()));
  emit_core(state, effects, msg::MapRequestMsg{state.id, peer});
  return effects;
}

Effects handle_map_reply(MobileNodeState& state, const msg::MapReplyMsg& reply, Tick now,
                         const Params& params) {
  Effects effects;
  if (!reply.locator) {
    effects.trace.push_back(mn_line(state, now, "map_notfound target=" + reply.target.short_hex()));
    int tries = ++state.tce.map_tries[reply.target];
    bool still_wanted = false;
    for (auto& [sid, session] : state.sessions) {
      if (session.peer == reply.target && session.state == SessionState::Interrupted) {
        still_wanted = true;
      }
    }
    if (still_wanted && tries < params.map_retry_max) {
      effects.timers.push_back(TimerArm{
          now + params.resume_timeout,
          Timer{TimerKind::MapRetry, state.id, "", 0, reply.target, 0}});
    } else if (still_wanted) {
      effects.trace.push_back(
          mn_line(state, now, "map_dormant target=" + reply.target.short_hex()));
    }
    return effects;
  }
  state.tce.map_tries.erase(reply.target);
  effects.trace.push_back(mn_line(state, now, "map_reply target=" + reply.target.short_hex() +
                                                  " where=" + reply.locator->render()));
  if (state.attached()) {
    // Leave the freshly learned locator at the local server: a trace of the
    // target's whereabouts for later arrivals.
    emit_edge(state, effects, current_en(state),
              msg::CacheStore{state.id, reply.target, Where{*reply.locator}});
  }
  effects.merge(resume_sessions_with_peer(state, reply.target, Where{*reply.locator}, now, params));
  return effects;
}

} // namespace

const char* session_state_name(SessionState state) {
  switch (state) {
    case SessionState::Active: return "active";
    case SessionState::Interrupted: return "interrupted";
    case SessionState::Delegated: return "delegated";
    case SessionState::Reestablishing: return "reestablishing";
    case SessionState::Closed: return "closed";
  }
  throw SimBug("unknown SessionState");
}

Session* MobileNodeState::find_session(const std::string& sid) {
  auto it = sessions.find(sid);
  return it == sessions.end() ? nullptr : &it->second;
}

std::string mn_line(const MobileNodeState& state, Tick now, const std::string& rest) {
  return "t=" + std::to_string(now) + " mn:" + state.id.short_hex() + ' ' + rest;
}

void set_session_state(MobileNodeState& state, Session& session, SessionState next, Tick now,
                       Effects& effects) {
  if (session.state == next) return;
  bool was_down = session.state == SessionState::Interrupted ||
                  session.state == SessionState::Reestablishing;
  bool is_down =
      next == SessionState::Interrupted || next == SessionState::Reestablishing;
  if (!was_down && is_down) {
    session.interrupted_since = now;
  } else if (was_down && !is_down) {
    if (session.interrupted_since >= 0) {
      session.interruption_total += now - session.interrupted_since;
    }
    session.interrupted_since = -1;
  }
  session.state = next;
  effects.trace.push_back(mn_line(
      state, now, std::string("session_") + session_state_name(next) + " sid=" + session.sid));
}

Effects attach(MobileNodeState& state, const EdgeNetworkId& en, Tick now, const Params&) {
  if (state.attached()) {
    return abort_with("attach while already attached: " + state.label);
  }
  if (const auto* transit = std::get_if<InTransit>(&state.attachment)) {
    if (transit->arrive_at > now) {
      return abort_with("attach before arrival: " + state.label);
    }
    if (transit->dest_en != en) {
      return abort_with("attach to unexpected edge network: " + state.label);
    }
    state.staging_expect = transit->expect_peer;
  } else {
    state.staging_expect = false;
  }
  state.staging_en = en;
  state.pending_addr.reset();
  Effects effects;
  effects.trace.push_back(mn_line(state, now, "addr_request en=" + en));
  emit_edge(state, effects, en, msg::AddressRequest{state.id});
  return effects;
}

Effects detach(MobileNodeState& state, Tick now, const EdgeNetworkId& dest_en, Tick arrive_at,
               bool expect_peer, std::optional<std::pair<NodeId, LocalAddress>> delegate,
               const Params&) {
  const Attached* attached = state.attached_at();
  if (attached == nullptr) {
    return abort_with("detach while not attached: " + state.label);
  }
  Effects effects;
  EdgeNetworkId old_en = attached->en;
  LocalAddress old_addr = attached->addr;

  if (delegate) {
    std::vector<vnl::SessionSnapshot> snapshots;
    for (auto& [sid, session] : state.sessions) {
      if (session.state == SessionState::Closed) continue;
      snapshots.push_back(vnl::SessionSnapshot{sid, session.peer, session.next_seq_out,
                                               session.next_seq_in, session.peer_hint});
      set_session_state(state, session, SessionState::Delegated, now, effects);
    }
    effects.trace.push_back(
        mn_line(state, now, "delegate_request delegate=" + delegate->first.short_hex() +
                                " dest=" + dest_en));
    emit_node(state, effects, delegate->first, Where{delegate->second},
              msg::DelegateRequest{state.id, old_addr, dest_en, std::move(snapshots)});
    state.role = Delegating{delegate->first, delegate->second, old_en};
  } else {
    for (auto& [sid, session] : state.sessions) {
      if (session.state == SessionState::Closed) continue;
      set_session_state(state, session, SessionState::Interrupted, now, effects);
    }
  }

  effects.trace.push_back(mn_line(state, now, "detach en=" + old_en + " dest=" + dest_en));
  emit_edge(state, effects, old_en, msg::DeregisterRequest{state.id});
  state.attachment = InTransit{dest_en, arrive_at, expect_peer};
  state.staging_en.reset();
  state.pending_addr.reset();
  state.tce.pending_lookups.clear();
  return effects;
}

Effects resume_session(MobileNodeState& state, const std::string& sid, const Where& where,
                       Tick now, const Params& params) {
  Session* session = state.find_session(sid);
  if (session == nullptr || session->state == SessionState::Closed) {
    return abort_with("resume for unknown or closed session " + sid);
  }
  if (session->state == SessionState::Delegated) {
    return abort_with("resume while session is delegated " + sid);
  }
  Effects effects;
  session->peer_hint = where;
  if (session->state == SessionState::Interrupted) {
    set_session_state(state, *session, SessionState::Reestablishing, now, effects);
  }
  std::uint32_t epoch = ++session->resume_epoch;
  effects.trace.push_back(
      mn_line(state, now, "resume_tx sid=" + sid + " where=" + render_where(where)));
  emit_node(state, effects, session->peer, where,
            msg::Resume{sid, state.id, session->next_seq_in});
  effects.timers.push_back(TimerArm{
      now + params.resume_timeout,
      Timer{TimerKind::ResumeTimeout, state.id, sid, 0, session->peer, epoch}});
  return effects;
}

Effects rendezvous_lookup(MobileNodeState& state, const NodeId& peer, Tick ttl, Tick now,
                          const Params&) {
  if (!state.attached()) {
    return abort_with("rendezvous lookup while not attached: " + state.label);
  }
  Effects effects;
  state.tce.pending_lookups[peer] = now + ttl;
  effects.trace.push_back(mn_line(state, now, "lookup_tx target=" + peer.short_hex() +
                                                  " ttl=" + std::to_string(ttl)));
  emit_edge(state, effects, current_en(state), msg::LookupRequest{state.id, peer, ttl});
  return effects;
}

Effects send_data(MobileNodeState& state, const std::string& sid, std::vector<std::uint8_t> payload,
                  Tick now, const Params& params) {
  Session* session = state.find_session(sid);
  if (session == nullptr) {
    return abort_with("send for unknown session " + sid);
  }
  Effects effects;
  if (session->state == SessionState::Closed) {
    effects.trace.push_back(mn_line(state, now, "send_on_closed sid=" + sid));
    return effects;
  }
  if (session->state == SessionState::Active && state.attached() && session->peer_hint) {
    effects.merge(send_one_data(state, *session, std::move(payload), now, params, false));
    return effects;
  }
  if (session->state == SessionState::Active && state.attached() && !session->peer_hint) {
    // No idea where the peer is: queue the payload and ask the core.
    session->send_buffer.push_back(std::move(payload));
    effects.trace.push_back(mn_line(state, now, "buffered sid=" + sid + " reason=no_hint"));
    effects.merge(emit_map_request(state, session->peer, now));
    return effects;
  }
  if (session->send_buffer.size() >= params.send_buffer_cap) {
    ++state.tce.counters.send_queue_full;
    effects.trace.push_back(mn_line(state, now, "send_queue_full sid=" + sid));
    return effects;
  }
  session->send_buffer.push_back(std::move(payload));
  effects.trace.push_back(mn_line(state, now, "buffered sid=" + sid));
  return effects;
}

Effects handle_message(MobileNodeState& state, const msg::Message& message, Tick now,
                       const Params& params) {
  using namespace msg;
  return std::visit(
      [&](const auto& body) -> Effects {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, AddressGrant>) {
          if (!state.staging_en) return abort_with("AddressGrant without handshake");
          state.pending_addr = body.addr;
          Effects effects;
          effects.trace.push_back(mn_line(state, now, "register addr=" + body.addr.render()));
          emit_edge(state, effects, *state.staging_en,
                    RegisterRequest{state.id, body.addr});
          return effects;
        } else if constexpr (std::is_same_v<T, AddressReject>) {
          return abort_with("address allocation rejected: " + body.reason);
        } else if constexpr (std::is_same_v<T, RegisterAck>) {
          return handle_register_ack(state, now, params);
        } else if constexpr (std::is_same_v<T, CacheResponse>) {
          Effects effects;
          if (body.where) {
            effects.trace.push_back(
                mn_line(state, now, "cache_hit target=" + body.target.short_hex() +
                                        " where=" + render_where(*body.where) +
                                        " age=" + std::to_string(body.age)));
            effects.merge(
                resume_sessions_with_peer(state, body.target, *body.where, now, params));
          } else {
            effects.trace.push_back(
                mn_line(state, now, "cache_miss target=" + body.target.short_hex()));
            effects.merge(emit_map_request(state, body.target, now));
          }
          return effects;
        } else if constexpr (std::is_same_v<T, LookupResponse>) {
          Effects effects;
          state.tce.pending_lookups.erase(body.target);
          effects.trace.push_back(
              mn_line(state, now, std::string("lookup_answer target=") + body.target.short_hex() +
                                      " where=" + render_where(body.where) +
                                      (body.rendezvous ? " rendezvous=1" : "")));
          effects.merge(resume_sessions_with_peer(state, body.target, body.where, now, params));
          return effects;
        } else if constexpr (std::is_same_v<T, LookupExpired>) {
          Effects effects;
          state.tce.pending_lookups.erase(body.target);
          effects.trace.push_back(
              mn_line(state, now, "lookup_expired target=" + body.target.short_hex()));
          effects.merge(emit_map_request(state, body.target, now));
          return effects;
        } else if constexpr (std::is_same_v<T, MapReplyMsg>) {
          return handle_map_reply(state, body, now, params);
        } else if constexpr (std::is_same_v<T, CorrespondentUpdate>) {
          Effects effects;
          effects.trace.push_back(
              mn_line(state, now, "correspondent_moved peer=" + body.mover.short_hex() +
                                      " where=" + render_where(body.where)));
          for (auto& [sid, session] : state.sessions) {
            if (session.peer == body.mover) session.peer_hint = body.where;
          }
          return effects;
        } else if constexpr (std::is_same_v<T, Resume>) {
          if (const auto* role = std::get_if<DelegateFor>(&state.role);
              role != nullptr && role->st.principal != state.id &&
              message.dst.index() == 0 &&
              std::get<NodeEndpoint>(message.dst).id == role->st.principal) {
            return vnl::proxy_handle_resume(state, body, message, now, params);
          }
          return handle_resume(state, body, message, now, params);
        } else if constexpr (std::is_same_v<T, ResumeAck>) {
          return handle_resume_ack(state, body, message, now, params);
        } else if constexpr (std::is_same_v<T, Data>) {
          return handle_data(state, body, message, now, params);
        } else if constexpr (std::is_same_v<T, DataAck>) {
          Effects effects;
          Session* session = state.find_session(body.sid);
          if (session == nullptr) {
            effects.trace.push_back(mn_line(state, now, "reject sid=" + body.sid));
            return effects;
          }
          session->unacked.erase(body.seq);
          session->tries.erase(body.seq);
          return effects;
        } else if constexpr (std::is_same_v<T, SessionReject>) {
          Effects effects;
          effects.trace.push_back(mn_line(state, now, "peer_reject sid=" + body.sid));
          return effects;
        } else if constexpr (std::is_same_v<T, DelegateRequest>) {
          return vnl::accept_delegation(state, body, message, now, params);
        } else if constexpr (std::is_same_v<T, DelegateAck>) {
          Effects effects;
          effects.trace.push_back(
              mn_line(state, now, "delegate_ack delegate=" + body.delegate.short_hex()));
          return effects;
        } else if constexpr (std::is_same_v<T, DelegateReject>) {
          Effects effects;
          effects.trace.push_back(
              mn_line(state, now, "delegate_reject delegate=" + body.delegate.short_hex()));
          return effects;
        } else if constexpr (std::is_same_v<T, DelegateData>) {
          return vnl::proxy_handle(state, body, message, now, params);
        } else if constexpr (std::is_same_v<T, SyncRequest>) {
          return vnl::handle_sync_request(state, body, message, now, params);
        } else if constexpr (std::is_same_v<T, SyncReply>) {
          return vnl::sync_apply(state, body, now, params);
        } else if constexpr (std::is_same_v<T, SyncReject>) {
          Effects effects;
          effects.trace.push_back(
              mn_line(state, now, "sync_reject delegate=" + body.delegate.short_hex()));
          effects.merge(vnl::delegate_lost(state, now, params));
          return effects;
        } else if constexpr (std::is_same_v<T, Malformed>) {
          return abort_with("malformed message dispatched to " + state.label);
        } else {
          return abort_with(std::string("node cannot handle ") + kind_name(message.body));
        }
      },
      message.body);
}

Effects on_timer(MobileNodeState& state, const Timer& timer, Tick now, const Params& params) {
  Effects effects;
  switch (timer.kind) {
    case TimerKind::Retransmit: {
      Session* session = state.find_session(timer.sid);
      if (session == nullptr) return effects;
      auto payload = session->unacked.find(timer.seq);
      if (payload == session->unacked.end()) return effects; // acked meanwhile
      if (session->state != SessionState::Active || !state.attached() || !session->peer_hint) {
        return effects; // resumption machinery owns recovery now
      }
      int tries = ++session->tries[timer.seq];
      if (tries > params.retransmit_max) {
        effects.trace.push_back(mn_line(state, now, "retransmit_exhausted sid=" + timer.sid +
                                                        " seq=" + seq_str(timer.seq)));
        set_session_state(state, *session, SessionState::Interrupted, now, effects);
        return effects;
      }
      effects.trace.push_back(mn_line(state, now, "retransmit sid=" + timer.sid + " seq=" +
                                                      seq_str(timer.seq) + " try=" +
                                                      std::to_string(tries)));
      emit_node(state, effects, session->peer, *session->peer_hint,
                msg::Data{timer.sid, state.id, timer.seq, payload->second});
      effects.timers.push_back(TimerArm{now + params.retransmit_every, timer});
      return effects;
    }
    case TimerKind::ResumeTimeout: {
      Session* session = state.find_session(timer.sid);
      if (session == nullptr || session->resume_epoch != timer.epoch) return effects;
      if (session->state != SessionState::Reestablishing) return effects;
      // The place we resumed toward was stale; ask the core for a fresh one.
      effects.trace.push_back(mn_line(state, now, "resume_timeout sid=" + timer.sid));
      effects.merge(emit_map_request(state, session->peer, now));
      return effects;
    }
    case TimerKind::MapRetry: {
      bool wanted = false;
      for (auto& [sid, session] : state.sessions) {
        if (session.peer == timer.peer && session.state == SessionState::Interrupted) {
          wanted = true;
        }
      }
      if (!wanted || !state.attached()) return effects;
      return emit_map_request(state, timer.peer, now);
    }
    case TimerKind::SyncTimeout: {
      const auto* role = std::get_if<Delegating>(&state.role);
      if (role == nullptr) return effects;
      bool any_delegated = false;
      for (auto& [sid, session] : state.sessions) {
        if (session.state == SessionState::Delegated) any_delegated = true;
      }
      if (!any_delegated) return effects;
      return vnl::delegate_lost(state, now, params);
    }
  }
  return effects;
}

} // namespace netinf::node
