#pragma once

#include "netinf/ids.hpp"

namespace netinf::vnl {

// A session's counters as frozen at handover; the delegate advances
// next_seq_in as it proxies and hands the result back at sync.
struct SessionSnapshot {
  std::string sid;
  NodeId peer;
  std::uint64_t next_seq_out{0};
  std::uint64_t next_seq_in{0};
  std::optional<Where> peer_hint;
};

struct BufferedData {
  std::string sid;
  std::uint64_t seq{0};
  std::vector<std::uint8_t> payload;
};

// Everything a delegate holds on behalf of an away principal.
struct DelegationState {
  NodeId principal;
  LocalAddress principal_old_addr; // binding-covered; used as reply hint
  EdgeNetworkId dest_en;
  std::vector<SessionSnapshot> sessions;
  std::vector<BufferedData> buffer; // in-order, ready for replay
  std::map<std::pair<std::string, std::uint64_t>, std::vector<std::uint8_t>> held; // out-of-order
  Tick started_at{0};
  bool overflowed{false};

  std::size_t total_buffered() const { return buffer.size() + held.size(); }
  SessionSnapshot* find_session(const std::string& sid);
};

struct Candidate {
  NodeId id;
  bool vnl_capable{false};
};

// Lowest node id among capable candidates; nothing capable → no delegate.
std::optional<NodeId> select_delegate(const std::vector<Candidate>& candidates);

} // namespace netinf::vnl
