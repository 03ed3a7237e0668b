#pragma once

#include "netinf/ids.hpp"
#include "netinf/vnl.hpp"

namespace netinf::msg {

// --- node <-> local server ---
struct AddressRequest {
  NodeId node;
};
struct AddressGrant {
  NodeId node;
  LocalAddress addr;
};
struct AddressReject {
  NodeId node;
  std::string reason;
};
struct RegisterRequest {
  NodeId node;
  LocalAddress addr;
};
struct RegisterAck {
  NodeId node;
};
struct CacheQuery {
  NodeId node;
  NodeId target;
};
struct CacheResponse {
  NodeId node;
  NodeId target;
  std::optional<Where> where; // empty = miss
  Tick age{0};
};
struct CacheStore {
  NodeId node;
  NodeId target;
  Where where;
};
struct LookupRequest {
  NodeId requester;
  NodeId target;
  Tick ttl{0};
};
struct LookupResponse {
  NodeId requester;
  NodeId target;
  Where where;
  bool rendezvous{false}; // answered by a later registration
};
struct LookupExpired {
  NodeId requester;
  NodeId target;
};
struct DeregisterRequest {
  NodeId node;
};
struct BindingRegister {
  NodeId principal;
  NodeId delegate;
  LocalAddress delegate_addr;
};
struct BindingRelease {
  NodeId principal;
  NodeId delegate;
};

// --- node <-> core ---
struct AttachUpdate {
  NodeId node;
  ArId new_parent;
};
struct MapRequestMsg {
  NodeId requester;
  NodeId target;
};
struct MapReplyMsg {
  NodeId requester;
  NodeId target;
  std::optional<GlobalLocator> locator; // empty = NotFound
};
// Eager policy only: mover pushes its new place to each correspondent,
// relayed through the core.
struct CorrespondentUpdate {
  NodeId mover;
  NodeId peer;
  Where where;
};

// --- node <-> node ---
struct Resume {
  std::string sid;
  NodeId from;
  std::uint64_t next_seq_in{0};
};
struct ResumeAck {
  std::string sid;
  NodeId from;
  std::uint64_t next_seq_in{0};
};
struct Data {
  std::string sid;
  NodeId from;
  std::uint64_t seq{0};
  std::vector<std::uint8_t> payload;
};
struct DataAck {
  std::string sid;
  NodeId from;
  std::uint64_t seq{0};
};
struct SessionReject {
  std::string sid;
  NodeId from;
  std::string reason;
};

// --- delegation ---
struct DelegateRequest {
  NodeId principal;
  LocalAddress principal_addr;
  EdgeNetworkId dest_en;
  std::vector<vnl::SessionSnapshot> sessions;
};
struct DelegateAck {
  NodeId delegate;
  NodeId principal;
  LocalAddress delegate_addr;
};
struct DelegateReject {
  NodeId delegate;
  NodeId principal;
  std::string reason;
};
// Fabric wrapper for traffic handed to a delegate through a binding.
struct DelegateData {
  NodeId principal;
  Data inner;
};
struct SyncRequest {
  NodeId principal;
};
struct SyncReply {
  NodeId delegate;
  NodeId principal;
  std::vector<vnl::SessionSnapshot> sessions;
  std::vector<vnl::BufferedData> buffer;
};
struct SyncReject {
  NodeId delegate;
  NodeId principal;
};

// Test hook: dispatching this aborts the run (a malformed PDU is a bug).
struct Malformed {};

using Body = std::variant<AddressRequest, AddressGrant, AddressReject, RegisterRequest,
                          RegisterAck, CacheQuery, CacheResponse, CacheStore, LookupRequest,
                          LookupResponse, LookupExpired, DeregisterRequest, BindingRegister,
                          BindingRelease, AttachUpdate, MapRequestMsg, MapReplyMsg,
                          CorrespondentUpdate, Resume, ResumeAck, Data, DataAck, SessionReject,
                          DelegateRequest, DelegateAck, DelegateReject, DelegateData, SyncRequest,
                          SyncReply, SyncReject, Malformed>;

const char* kind_name(const Body& body);

struct NodeEndpoint {
  NodeId id;
  std::optional<Where> hint; // place used for routing; absent = unroutable
};
struct LsEndpoint {
  EdgeNetworkId en;
};
struct LcsEndpoint {};

using Endpoint = std::variant<NodeEndpoint, LsEndpoint, LcsEndpoint>;

std::string render_endpoint(const Endpoint& ep);

enum class MsgClass { Edge, Core, Data };

const char* class_name(MsgClass cls);

struct Message {
  Endpoint src;
  Endpoint dst;
  Body body;
  Tick sent_at{0};
  std::optional<Where> reply_to; // sender's own place at send time
  std::uint64_t id{0};
};

// Core if either endpoint is the LCS, else edge if either is a local server,
// else node-to-node data-plane traffic.
MsgClass classify(const Message& message);

} // namespace netinf::msg
