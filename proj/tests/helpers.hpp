#pragma once

#include <string>

#include "netinf/node.hpp"

namespace testsupport {

inline netinf::NodeId test_id(std::uint8_t tag) {
  netinf::NodeId id;
  id.value.fill(tag);
  return id;
}

inline netinf::node::MobileNodeState make_node(const std::string& label, std::uint8_t tag,
                                               bool vnl = false) {
  netinf::node::MobileNodeState state;
  state.id = test_id(tag);
  state.label = label;
  state.vnl_capable = vnl;
  return state;
}

inline void attach_at(netinf::node::MobileNodeState& state, const netinf::EdgeNetworkId& en,
                      int slot) {
  state.attachment = netinf::node::Attached{en, netinf::LocalAddress{en, slot}};
}

inline netinf::node::Session& add_session(netinf::node::MobileNodeState& state,
                                          const std::string& sid, const netinf::NodeId& peer,
                                          std::optional<netinf::Where> hint = std::nullopt) {
  netinf::node::Session session;
  session.sid = sid;
  session.peer = peer;
  session.peer_hint = std::move(hint);
  return state.sessions.emplace(sid, std::move(session)).first->second;
}

inline bool trace_contains(const netinf::Effects& effects, const std::string& needle) {
  for (const auto& line : effects.trace) {
    if (line.find(needle) != std::string::npos) return true;
  }
  return false;
}

template <typename T>
const T* find_sent(const netinf::Effects& effects) {
  for (const auto& out : effects.messages) {
    if (const T* body = std::get_if<T>(&out.body)) return body;
  }
  return nullptr;
}

template <typename T>
const netinf::Outbound* find_outbound(const netinf::Effects& effects) {
  for (const auto& out : effects.messages) {
    if (std::holds_alternative<T>(out.body)) return &out;
  }
  return nullptr;
}

// Minimal delivered-message envelope for driving handle_message directly.
inline netinf::msg::Message envelope(netinf::msg::Body body,
                                     std::optional<netinf::Where> reply_to = std::nullopt,
                                     netinf::Tick sent_at = 0) {
  netinf::msg::Message message;
  message.src = netinf::msg::LcsEndpoint{};
  message.dst = netinf::msg::LcsEndpoint{};
  message.body = std::move(body);
  message.reply_to = std::move(reply_to);
  message.sent_at = sent_at;
  return message;
}

} // namespace testsupport
