#include "netinf/sim.hpp"

#include <algorithm>

namespace netinf::sim {
namespace {

constexpr const char* kCoreLoc = "core";

std::pair<std::string, std::string> norm_pair(const std::string& a, const std::string& b) {
  return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

} // namespace

void LinkModel::set_link(const std::string& a, const std::string& b, Tick latency, double loss) {
  if (latency < 1) throw SimBug("link latency must be at least one tick");
  if (loss < 0.0 || loss >= 1.0) throw SimBug("link loss must be in [0,1)");
  links_[norm_pair(a, b)] = LinkSpec{latency, loss};
  if (loss > 0.0) any_lossy_ = true;
}

LinkSpec LinkModel::resolve(const std::string& a, const std::string& b) const {
  auto it = links_.find(norm_pair(a, b));
  if (it != links_.end()) return it->second;
  if (a == b) return LinkSpec{kIntraEn, 0.0};
  if (a == kCoreLoc || b == kCoreLoc) return LinkSpec{kEnToCore, 0.0};
  return LinkSpec{kEnToEn, 0.0};
}

std::vector<std::uint8_t> make_payload(const std::string& sid, std::uint64_t index,
                                       std::size_t bytes) {
  std::string material = sid + '#' + std::to_string(index);
  auto digest = detail::stable_hash128(
      reinterpret_cast<const std::uint8_t*>(material.data()), material.size(), 0);
  std::vector<std::uint8_t> payload(bytes);
  for (std::size_t j = 0; j < bytes; ++j) {
    payload[j] = static_cast<std::uint8_t>(digest[j % 16] + j / 16);
  }
  return payload;
}

Engine::Engine(Params params, std::uint64_t seed)
    : params_(params), seed_(seed), rng_(seed) {}

void Engine::add_edge_network(const EdgeNetworkId& en) {
  if (servers_.count(en) != 0) throw SimBug("duplicate edge network " + en);
  lcs::AttachmentRegister ar;
  ar.ar_id = edge_ar(en);
  ar.owner = en;
  ar.neighbors = {core_root_ar()};
  if (lcs_.register_ar(std::move(ar)) != lcs::RegisterArOutcome::Ok) {
    throw SimBug("edge network registration failed for " + en);
  }
  servers_.emplace(en, edge::LocalServerState(en, params_.cache_ttl));
  en_order_.push_back(en);
}

NodeId Engine::add_node(const std::string& label, const EdgeNetworkId& home, bool vnl_capable) {
  if (label_to_id_.count(label) != 0) throw SimBug("duplicate node label " + label);
  auto server = servers_.find(home);
  if (server == servers_.end()) throw SimBug("unknown home edge network " + home);

  NodeId id = registry_.mint(label);
  lcs::AttachmentRegister ar;
  ar.ar_id = host_ar(label);
  ar.owner = id;
  ar.neighbors = {edge_ar(home)};
  if (lcs_.register_ar(std::move(ar)) != lcs::RegisterArOutcome::Ok) {
    throw SimBug("host registration failed for " + label);
  }

  auto granted = server->second.allocate_local_address(id);
  const auto* addr = std::get_if<LocalAddress>(&granted);
  if (addr == nullptr) throw SimBug("initial address allocation failed for " + label);
  if (server->second.register_node(id, *addr, 0).error) {
    throw SimBug("initial registration failed for " + label);
  }

  node::MobileNodeState state;
  state.id = id;
  state.label = label;
  state.vnl_capable = vnl_capable;
  state.attachment = node::Attached{home, *addr};
  nodes_.emplace(id, std::move(state));
  label_to_id_.emplace(label, id);
  node_order_.push_back(label);
  presence_[id] = home;
  return id;
}

void Engine::add_session(const std::string& sid, const std::string& label_a,
                         const std::string& label_b) {
  node::MobileNodeState& a = node_state(label_a);
  node::MobileNodeState& b = node_state(label_b);
  if (a.sessions.count(sid) != 0 || b.sessions.count(sid) != 0) {
    throw SimBug("duplicate session " + sid);
  }
  const auto* a_at = a.attached_at();
  const auto* b_at = b.attached_at();
  if (a_at == nullptr || b_at == nullptr) throw SimBug("session endpoints must start attached");

  node::Session sa;
  sa.sid = sid;
  sa.peer = b.id;
  sa.peer_hint = Where{b_at->addr};
  node::Session sb;
  sb.sid = sid;
  sb.peer = a.id;
  sb.peer_hint = Where{a_at->addr};
  a.sessions.emplace(sid, std::move(sa));
  b.sessions.emplace(sid, std::move(sb));
}

void Engine::set_link(const std::string& a, const std::string& b, Tick latency, double loss) {
  links_.set_link(a, b, latency, loss);
}

edge::LocalServerState& Engine::local_server(const EdgeNetworkId& en) {
  auto it = servers_.find(en);
  if (it == servers_.end()) throw SimBug("unknown edge network " + en);
  return it->second;
}

const edge::LocalServerState& Engine::local_server(const EdgeNetworkId& en) const {
  auto it = servers_.find(en);
  if (it == servers_.end()) throw SimBug("unknown edge network " + en);
  return it->second;
}

const node::MobileNodeState& Engine::node_state(const std::string& label) const {
  auto it = label_to_id_.find(label);
  if (it == label_to_id_.end()) throw SimBug("unknown node " + label);
  return nodes_.at(it->second);
}

node::MobileNodeState& Engine::node_state(const std::string& label) {
  auto it = label_to_id_.find(label);
  if (it == label_to_id_.end()) throw SimBug("unknown node " + label);
  return nodes_.at(it->second);
}

void Engine::schedule(Tick at, EventBody body) {
  if (at < now_) throw SimBug("event scheduled into the past");
  queue_.push(Event{at, ++seqno_counter_, std::move(body)});
}

void Engine::schedule_action(Tick at, std::size_t index) { schedule(at, ActionAt{index}); }

double Engine::next_unit() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::string Engine::net_line(const char* verb, const msg::Message& message) const {
  std::string out = "t=" + std::to_string(now_) + " net " + verb +
                    " id=" + std::to_string(message.id) + " kind=" + kind_name(message.body) +
                    " class=" + msg::class_name(msg::classify(message)) +
                    " src=" + msg::render_endpoint(message.src) +
                    " dst=" + msg::render_endpoint(message.dst);
  return out;
}

std::string Engine::ls_line(const EdgeNetworkId& en, const std::string& rest) const {
  return "t=" + std::to_string(now_) + " ls:" + en + ' ' + rest;
}

void Engine::transmit(msg::Message&& message, const std::string& src_loc) {
  msg::MsgClass cls = msg::classify(message);
  metrics_.of(cls).sent += 1;
  trace_.line(net_line("sent", message));

  std::optional<std::string> dst_loc;
  if (const auto* to_node = std::get_if<msg::NodeEndpoint>(&message.dst)) {
    if (to_node->hint) {
      auto en = en_of(*to_node->hint);
      if (en) dst_loc = *en;
    }
  } else if (const auto* to_ls = std::get_if<msg::LsEndpoint>(&message.dst)) {
    dst_loc = to_ls->en;
  } else {
    dst_loc = kCoreLoc;
  }
  if (!dst_loc || (*dst_loc != kCoreLoc && servers_.count(*dst_loc) == 0)) {
    metrics_.of(cls).stranded += 1;
    trace_.line(net_line("stranded", message) + " reason=unroutable");
    return;
  }

  LinkSpec link = links_.resolve(src_loc, *dst_loc);
  if (link.loss > 0.0 && next_unit() < link.loss) {
    metrics_.of(cls).dropped += 1;
    trace_.line(net_line("dropped", message) + " link=" + src_loc + "~" + *dst_loc);
    return;
  }
  metrics_.of(cls).in_flight += 1;
  schedule(now_ + link.latency, Deliver{std::move(message)});
}

void Engine::send_from_ls(const EdgeNetworkId& en, msg::Endpoint dst, msg::Body body) {
  msg::Message message;
  message.src = msg::LsEndpoint{en};
  message.dst = std::move(dst);
  message.body = std::move(body);
  message.sent_at = now_;
  message.id = ++msg_id_counter_;
  transmit(std::move(message), en);
}

void Engine::send_from_lcs(msg::Endpoint dst, msg::Body body) {
  msg::Message message;
  message.src = msg::LcsEndpoint{};
  message.dst = std::move(dst);
  message.body = std::move(body);
  message.sent_at = now_;
  message.id = ++msg_id_counter_;
  transmit(std::move(message), kCoreLoc);
}

void Engine::dispatch_node_effects(node::MobileNodeState& actor,
                                   const std::optional<std::string>& loc, Effects&& effects) {
  trace_.take(std::move(effects.trace));
  for (TimerArm& arm : effects.timers) schedule(arm.at, NodeTimer{arm.timer});
  for (Outbound& out : effects.messages) {
    if (!loc) throw SimBug("message emitted by an absent node: " + actor.label);
    msg::Message message;
    message.src = msg::NodeEndpoint{out.claimed_src.value_or(actor.id), std::nullopt};
    message.dst = std::move(out.dst);
    message.body = std::move(out.body);
    message.sent_at = now_;
    message.id = ++msg_id_counter_;
    if (out.reply_to) {
      message.reply_to = std::move(out.reply_to);
    } else if (!out.omit_reply_to) {
      if (const auto* attached = actor.attached_at()) {
        message.reply_to = Where{attached->addr};
      } else if (actor.pending_addr) {
        message.reply_to = Where{*actor.pending_addr};
      }
    }
    transmit(std::move(message), *loc);
  }
  if (effects.abort) throw RunAbort(effects.abort_why);
}

void Engine::run(Tick until) {
  if (until < now_) throw SimBug("run target precedes current tick");
  running_ = true;
  while (!queue_.empty() && queue_.top().at <= until) {
    Event event = queue_.top();
    queue_.pop();
    now_ = event.at;
    ++event_count_;
    std::visit(
        [&](auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, Deliver>) {
            on_deliver(std::move(body.message));
          } else if constexpr (std::is_same_v<T, MobilityArrive>) {
            presence_[body.nid] = body.en;
            node::MobileNodeState& state = nodes_.at(body.nid);
            dispatch_node_effects(state, body.en,
                                  node::attach(state, body.en, now_, params_));
          } else if constexpr (std::is_same_v<T, NodeTimer>) {
            node::MobileNodeState& state = nodes_.at(body.timer.owner);
            dispatch_node_effects(state, presence_.at(body.timer.owner),
                                  node::on_timer(state, body.timer, now_, params_));
          } else if constexpr (std::is_same_v<T, LsSweep>) {
            on_sweep(body.en);
          } else {
            if (!action_handler_) throw SimBug("action scheduled without a handler");
            action_handler_(body.index, now_);
          }
        },
        event.body);
  }
  now_ = until;
  running_ = false;
}

void Engine::on_deliver(msg::Message&& message) {
  msg::MsgClass cls = msg::classify(message);
  metrics_.of(cls).in_flight -= 1;
  if (const auto* to_ls = std::get_if<msg::LsEndpoint>(&message.dst)) {
    metrics_.of(cls).delivered += 1;
    trace_.line(net_line("delivered", message));
    ls_dispatch(to_ls->en, message);
    return;
  }
  if (std::holds_alternative<msg::LcsEndpoint>(message.dst)) {
    metrics_.of(cls).delivered += 1;
    trace_.line(net_line("delivered", message));
    lcs_dispatch(message);
    return;
  }
  const auto& to_node = std::get<msg::NodeEndpoint>(message.dst);
  auto target_en = en_of(*to_node.hint);
  deliver_to_node(std::move(message), *target_en);
}

void Engine::deliver_to_node(msg::Message&& message, const EdgeNetworkId& target_en) {
  msg::MsgClass cls = msg::classify(message);
  const auto& to_node = std::get<msg::NodeEndpoint>(message.dst);
  auto where = presence_.find(to_node.id);
  if (where != presence_.end() && where->second == target_en) {
    metrics_.of(cls).delivered += 1;
    trace_.line(net_line("delivered", message));
    node::MobileNodeState& state = nodes_.at(to_node.id);
    dispatch_node_effects(state, target_en,
                          node::handle_message(state, message, now_, params_));
    return;
  }

  // The addressee is gone from this network; a delegation binding at the
  // local server may still take the message in.
  edge::LocalServerState& server = local_server(target_en);
  std::optional<NodeId> delegate = server.delegate_for(to_node.id);
  if (delegate && presence_.at(*delegate) == target_en) {
    node::MobileNodeState& proxy = nodes_.at(*delegate);
    if (const auto* data = std::get_if<msg::Data>(&message.body)) {
      metrics_.of(cls).delivered += 1;
      trace_.line(net_line("delivered", message) + " proxied=1");
      msg::DelegateData wrapped{to_node.id, *data};
      dispatch_node_effects(proxy, target_en,
                            vnl::proxy_handle(proxy, wrapped, message, now_, params_));
      return;
    }
    if (const auto* resume = std::get_if<msg::Resume>(&message.body)) {
      metrics_.of(cls).delivered += 1;
      trace_.line(net_line("delivered", message) + " proxied=1");
      dispatch_node_effects(proxy, target_en,
                            vnl::proxy_handle_resume(proxy, *resume, message, now_, params_));
      return;
    }
    metrics_.of(cls).stranded += 1;
    trace_.line(net_line("stranded", message) + " reason=binding_cannot_proxy");
    return;
  }
  metrics_.of(cls).stranded += 1;
  trace_.line(net_line("stranded", message) + " reason=absent");
}

void Engine::ls_dispatch(const EdgeNetworkId& en, const msg::Message& message) {
  edge::LocalServerState& server = local_server(en);
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, msg::AddressRequest>) {
          auto result = server.allocate_local_address(body.node);
          if (const auto* addr = std::get_if<LocalAddress>(&result)) {
            trace_.line(ls_line(en, "allocate node=" + body.node.short_hex() + " -> " +
                                        addr->render()));
            send_from_ls(en, msg::NodeEndpoint{body.node, Where{*addr}},
                         msg::AddressGrant{body.node, *addr});
          } else {
            trace_.line(
                ls_line(en, "allocate node=" + body.node.short_hex() + " -> already_attached"));
            auto back = server.registered_addr(body.node);
            std::optional<Where> hint;
            if (back) hint = Where{*back};
            send_from_ls(en, msg::NodeEndpoint{body.node, hint},
                         msg::AddressReject{body.node, "already attached"});
          }
        } else if constexpr (std::is_same_v<T, msg::RegisterRequest>) {
          auto result = server.register_node(body.node, body.addr, now_);
          if (result.error) {
            const char* why = *result.error == edge::RegisterError::ForeignAddress
                                  ? "foreign_address"
                                  : "already_registered";
            trace_.line(ls_line(en, "register node=" + body.node.short_hex() + " addr=" +
                                        body.addr.render() + " -> " + why));
            return;
          }
          trace_.line(ls_line(en, "register node=" + body.node.short_hex() + " addr=" +
                                      body.addr.render() + " -> ok notified=" +
                                      std::to_string(result.notifications.size())));
          send_from_ls(en, msg::NodeEndpoint{body.node, Where{body.addr}},
                       msg::RegisterAck{body.node});
          for (const auto& note : result.notifications) {
            auto requester_addr = server.registered_addr(note.requester);
            std::optional<Where> hint;
            if (requester_addr) hint = Where{*requester_addr};
            send_from_ls(en, msg::NodeEndpoint{note.requester, hint},
                         msg::LookupResponse{note.requester, note.target, Where{note.addr},
                                             true});
          }
        } else if constexpr (std::is_same_v<T, msg::CacheQuery>) {
          auto hit = server.query_cache(body.target, now_);
          trace_.line(ls_line(
              en, "cache_query node=" + body.node.short_hex() + " target=" +
                      body.target.short_hex() +
                      (hit ? " -> hit age=" + std::to_string(hit->age) : " -> miss")));
          auto back = server.registered_addr(body.node);
          std::optional<Where> hint;
          if (back) hint = Where{*back};
          msg::CacheResponse response{body.node, body.target, std::nullopt, 0};
          if (hit) {
            response.where = hit->where;
            response.age = hit->age;
          }
          send_from_ls(en, msg::NodeEndpoint{body.node, hint}, std::move(response));
        } else if constexpr (std::is_same_v<T, msg::CacheStore>) {
          server.store_locator(body.target, body.where, now_);
          trace_.line(ls_line(en, "cache_store target=" + body.target.short_hex() + " where=" +
                                      render_where(body.where) + " -> ok"));
        } else if constexpr (std::is_same_v<T, msg::LookupRequest>) {
          auto result = server.lookup_request(body.requester, body.target, body.ttl, now_);
          std::string head = "lookup requester=" + body.requester.short_hex() +
                             " target=" + body.target.short_hex();
          if (const auto* answer = std::get_if<edge::LookupAnswer>(&result)) {
            trace_.line(ls_line(en, head + " -> answer"));
            auto back = server.registered_addr(body.requester);
            std::optional<Where> hint;
            if (back) hint = Where{*back};
            send_from_ls(en, msg::NodeEndpoint{body.requester, hint},
                         msg::LookupResponse{body.requester, body.target, Where{answer->addr},
                                             false});
          } else if (const auto* waiting = std::get_if<edge::LookupWaiting>(&result)) {
            trace_.line(
                ls_line(en, head + " -> wait deadline=" + std::to_string(waiting->deadline)));
            schedule(waiting->deadline, LsSweep{en});
          } else {
            const char* why = std::get<edge::LookupError>(result) ==
                                      edge::LookupError::NotAttached
                                  ? "not_attached"
                                  : "bad_ttl";
            trace_.line(ls_line(en, head + " -> " + why));
          }
        } else if constexpr (std::is_same_v<T, msg::DeregisterRequest>) {
          auto outcome = server.deregister(body.node, now_);
          trace_.line(ls_line(en, "deregister node=" + body.node.short_hex() + " -> " +
                                      (outcome == edge::DeregisterOutcome::Ok ? "ok"
                                                                              : "not_found")));
        } else if constexpr (std::is_same_v<T, msg::BindingRegister>) {
          server.bind_delegate(body.principal, body.delegate);
          trace_.line(ls_line(en, "bind principal=" + body.principal.short_hex() +
                                      " delegate=" + body.delegate.short_hex() + " -> ok"));
        } else if constexpr (std::is_same_v<T, msg::BindingRelease>) {
          server.release_binding(body.principal);
          trace_.line(ls_line(en, "release principal=" + body.principal.short_hex() + " -> ok"));
        } else {
          trace_.line(ls_line(en, std::string("drop kind=") + msg::kind_name(message.body) +
                                      " -> unhandled"));
        }
      },
      message.body);
}

void Engine::on_sweep(const EdgeNetworkId& en) {
  edge::LocalServerState& server = local_server(en);
  auto expired = server.expire(now_);
  trace_.line(ls_line(en, "sweep -> expired=" + std::to_string(expired.size())));
  for (const auto& entry : expired) {
    auto back = server.registered_addr(entry.requester);
    std::optional<Where> hint;
    if (back) hint = Where{*back};
    send_from_ls(en, msg::NodeEndpoint{entry.requester, hint},
                 msg::LookupExpired{entry.requester, entry.target});
  }
}

void Engine::lcs_dispatch(const msg::Message& message) {
  std::string head = "t=" + std::to_string(now_) + " lcs ";
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, msg::AttachUpdate>) {
          auto outcome = lcs_.update_attachment(body.node, body.new_parent, now_);
          const char* word = outcome == lcs::UpdateOutcome::Ok
                                 ? "ok"
                                 : (outcome == lcs::UpdateOutcome::NotFound ? "not_found"
                                                                            : "bad_parent");
          trace_.line(head + "update_attachment node=" + body.node.short_hex() + " parent=" +
                      body.new_parent.render() + " -> " + word +
                      " counter=" + std::to_string(lcs_.core_msg_counter()));
        } else if constexpr (std::is_same_v<T, msg::MapRequestMsg>) {
          auto reply = lcs_.handle_map_request({body.requester, body.target}, now_);
          metrics_.map_replies += 1;
          trace_.line(head + "map_request requester=" + body.requester.short_hex() +
                      " target=" + body.target.short_hex() + " -> " +
                      (reply.locator ? "found" : "not_found") +
                      " counter=" + std::to_string(lcs_.core_msg_counter()));
          send_from_lcs(msg::NodeEndpoint{body.requester, message.reply_to},
                        msg::MapReplyMsg{body.requester, body.target, reply.locator});
        } else if constexpr (std::is_same_v<T, msg::CorrespondentUpdate>) {
          auto locator = lcs_.construct_locator(body.peer, now_);
          trace_.line(head + "correspondent_update mover=" + body.mover.short_hex() +
                      " peer=" + body.peer.short_hex() + " -> " +
                      (locator ? "relayed" : "no_locator") +
                      " counter=" + std::to_string(lcs_.core_msg_counter()));
          if (locator) {
            send_from_lcs(msg::NodeEndpoint{body.peer, Where{*locator}}, body);
          }
        } else {
          trace_.line(head + std::string("drop kind=") + msg::kind_name(message.body) +
                      " -> unhandled counter=" + std::to_string(lcs_.core_msg_counter()));
        }
      },
      message.body);
}

void Engine::start_move(const std::string& label, const EdgeNetworkId& dest, Tick travel,
                        bool use_delegate, bool expect_peer) {
  if (travel < 1) throw RunAbort("move travel must be at least one tick");
  if (servers_.count(dest) == 0) throw RunAbort("move to unknown edge network " + dest);
  node::MobileNodeState& state = node_state(label);
  const auto* attached = state.attached_at();
  if (attached == nullptr) throw RunAbort("move while not attached: " + label);
  EdgeNetworkId old_en = attached->en;

  std::optional<std::pair<NodeId, LocalAddress>> delegate;
  if (use_delegate) {
    std::vector<vnl::Candidate> candidates;
    for (const auto& [id, other] : nodes_) {
      if (id == state.id) continue;
      const auto* other_at = other.attached_at();
      if (other_at == nullptr || other_at->en != old_en) continue;
      if (!std::holds_alternative<node::PlainRole>(other.role)) continue;
      candidates.push_back(vnl::Candidate{id, other.vnl_capable});
    }
    auto chosen = vnl::select_delegate(candidates);
    if (chosen) {
      delegate = std::make_pair(*chosen, nodes_.at(*chosen).attached_at()->addr);
    } else {
      trace_.line(node::mn_line(state, now_, "delegate_unavailable en=" + old_en));
    }
  }

  Effects effects =
      node::detach(state, now_, dest, now_ + travel, expect_peer, delegate, params_);
  dispatch_node_effects(state, old_en, std::move(effects));
  presence_[state.id] = std::nullopt;
  schedule(now_ + travel, MobilityArrive{state.id, dest});
}

void Engine::send_payload(const std::string& label, const std::string& sid, std::size_t bytes) {
  node::MobileNodeState& state = node_state(label);
  std::uint64_t index = send_index_[{label, sid}]++;
  dispatch_node_effects(state, presence_.at(state.id),
                        node::send_data(state, sid, make_payload(sid, index, bytes), now_,
                                        params_));
}

void Engine::set_param(const std::string& key, Tick value) {
  if (key == "cache_ttl") {
    params_.cache_ttl = value;
    for (auto& [en, server] : servers_) server.set_default_cache_ttl(value);
  } else if (key == "lookup_ttl") {
    params_.lookup_ttl = value;
  } else if (key == "resume_timeout") {
    params_.resume_timeout = value;
  } else if (key == "mtu") {
    params_.mtu = static_cast<std::size_t>(value);
  } else {
    throw RunAbort("set action for unknown parameter " + key);
  }
  trace_.line("t=" + std::to_string(now_) + " set " + key + "=" + std::to_string(value));
}

} // namespace netinf::sim
