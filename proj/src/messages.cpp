#include "netinf/messages.hpp"

namespace netinf::msg {
namespace {

struct KindNameVisitor {
  const char* operator()(const AddressRequest&) const { return "AddressRequest"; }
  const char* operator()(const AddressGrant&) const { return "AddressGrant"; }
  const char* operator()(const AddressReject&) const { return "AddressReject"; }
  const char* operator()(const RegisterRequest&) const { return "RegisterRequest"; }
  const char* operator()(const RegisterAck&) const { return "RegisterAck"; }
  const char* operator()(const CacheQuery&) const { return "CacheQuery"; }
  const char* operator()(const CacheResponse&) const { return "CacheResponse"; }
  const char* operator()(const CacheStore&) const { return "CacheStore"; }
  const char* operator()(const LookupRequest&) const { return "LookupRequest"; }
  const char* operator()(const LookupResponse&) const { return "LookupResponse"; }
  const char* operator()(const LookupExpired&) const { return "LookupExpired"; }
  const char* operator()(const DeregisterRequest&) const { return "DeregisterRequest"; }
  const char* operator()(const BindingRegister&) const { return "BindingRegister"; }
  const char* operator()(const BindingRelease&) const { return "BindingRelease"; }
  const char* operator()(const AttachUpdate&) const { return "AttachUpdate"; }
  const char* operator()(const MapRequestMsg&) const { return "MapRequest"; }
  const char* operator()(const MapReplyMsg&) const { return "MapReply"; }
  const char* operator()(const CorrespondentUpdate&) const { return "CorrespondentUpdate"; }
  const char* operator()(const Resume&) const { return "Resume"; }
  const char* operator()(const ResumeAck&) const { return "ResumeAck"; }
  const char* operator()(const Data&) const { return "Data"; }
  const char* operator()(const DataAck&) const { return "DataAck"; }
  const char* operator()(const SessionReject&) const { return "SessionReject"; }
  const char* operator()(const DelegateRequest&) const { return "DelegateRequest"; }
  const char* operator()(const DelegateAck&) const { return "DelegateAck"; }
  const char* operator()(const DelegateReject&) const { return "DelegateReject"; }
  const char* operator()(const DelegateData&) const { return "DelegateData"; }
  const char* operator()(const SyncRequest&) const { return "SyncRequest"; }
  const char* operator()(const SyncReply&) const { return "SyncReply"; }
  const char* operator()(const SyncReject&) const { return "SyncReject"; }
  const char* operator()(const Malformed&) const { return "Malformed"; }
};

} // namespace

const char* kind_name(const Body& body) { return std::visit(KindNameVisitor{}, body); }

std::string render_endpoint(const Endpoint& ep) {
  if (const auto* node = std::get_if<NodeEndpoint>(&ep)) return "mn:" + node->id.short_hex();
  if (const auto* ls = std::get_if<LsEndpoint>(&ep)) return "ls:" + ls->en;
  return "lcs";
}

const char* class_name(MsgClass cls) {
  switch (cls) {
    case MsgClass::Edge: return "edge";
    case MsgClass::Core: return "core";
    case MsgClass::Data: return "data";
  }
  throw SimBug("unknown MsgClass");
}

MsgClass classify(const Message& message) {
  auto is_lcs = [](const Endpoint& ep) { return std::holds_alternative<LcsEndpoint>(ep); };
  auto is_ls = [](const Endpoint& ep) { return std::holds_alternative<LsEndpoint>(ep); };
  if (is_lcs(message.src) || is_lcs(message.dst)) return MsgClass::Core;
  if (is_ls(message.src) || is_ls(message.dst)) return MsgClass::Edge;
  return MsgClass::Data;
}

} // namespace netinf::msg
