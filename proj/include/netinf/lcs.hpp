#pragma once

#include "netinf/ids.hpp"

namespace netinf::lcs {

// One attachment register: a routing waypoint that knows itself and its
// neighbors. The core's whole view of the world is the graph of these.
struct AttachmentRegister {
  ArId ar_id;
  std::variant<NodeId, EdgeNetworkId> owner;
  std::set<ArId> neighbors;
  Tick updated_at{0};
};

enum class RegisterArOutcome { Ok, AlreadyRegistered, RejectedUnknownNeighbor, InvalidHostDegree };
enum class UpdateOutcome { Ok, NotFound, BadParent };

struct MapRequest {
  NodeId requester;
  NodeId target;
};

struct MapReply {
  NodeId target;
  std::optional<GlobalLocator> locator; // empty = NotFound
};

// Locator construction system state. Holds the AR graph and the signaling
// counter — never a constructed locator.
class LcsState {
 public:
  LcsState();

  RegisterArOutcome register_ar(AttachmentRegister ar);
  UpdateOutcome update_attachment(const NodeId& node, const ArId& new_parent, Tick now);
  // Pure read: shortest root→host path (root excluded), ties broken by the
  // lexicographically smallest ArId sequence. Does not touch the counter.
  std::optional<GlobalLocator> construct_locator(const NodeId& target, Tick now) const;
  MapReply handle_map_request(const MapRequest& request, Tick now);

  const ArId& root() const { return root_; }
  const AttachmentRegister* find(const ArId& ar) const;
  std::optional<ArId> host_ar_of(const NodeId& node) const;
  std::uint64_t core_msg_counter() const { return core_msg_counter_; }
  const std::map<ArId, AttachmentRegister>& registers() const { return registers_; }

  // ArGraphView over the current graph; valid while this LcsState lives.
  class GraphView;
  GraphView view() const;

 private:
  ArId root_;
  std::map<ArId, AttachmentRegister> registers_;
  std::map<NodeId, ArId> host_index_;
  std::uint64_t core_msg_counter_{0};
};

class LcsState::GraphView : public ArGraphView {
 public:
  explicit GraphView(const LcsState& lcs) : lcs_(lcs) {}
  bool has(const ArId& ar) const override { return lcs_.find(ar) != nullptr; }
  bool has_edge(const ArId& a, const ArId& b) const override {
    const AttachmentRegister* reg = lcs_.find(a);
    return reg != nullptr && reg->neighbors.count(b) != 0;
  }

 private:
  const LcsState& lcs_;
};

inline LcsState::GraphView LcsState::view() const { return GraphView(*this); }

} // namespace netinf::lcs
