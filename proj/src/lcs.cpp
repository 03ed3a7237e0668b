#include "netinf/lcs.hpp"

#include <deque>

namespace netinf::lcs {

LcsState::LcsState() : root_(core_root_ar()) {
  AttachmentRegister root;
  root.ar_id = root_;
  root.owner = EdgeNetworkId("core");
  registers_.emplace(root_, std::move(root));
}

RegisterArOutcome LcsState::register_ar(AttachmentRegister ar) {
  auto existing = registers_.find(ar.ar_id);
  if (existing != registers_.end()) {
    const AttachmentRegister& old = existing->second;
    bool identical = old.neighbors == ar.neighbors && old.owner == ar.owner &&
                     old.ar_id.scope == ar.ar_id.scope;
    if (!identical) return RegisterArOutcome::AlreadyRegistered;
    ++core_msg_counter_; // idempotent re-registration still acks
    return RegisterArOutcome::Ok;
  }
  if (ar.ar_id.scope == ArScope::Host && ar.neighbors.size() != 1) {
    return RegisterArOutcome::InvalidHostDegree;
  }
  // Validate before touching state: a rejected registration leaves no trace.
  for (const ArId& n : ar.neighbors) {
    if (registers_.find(n) == registers_.end()) {
      return RegisterArOutcome::RejectedUnknownNeighbor;
    }
  }
  for (const ArId& n : ar.neighbors) registers_[n].neighbors.insert(ar.ar_id);
  if (ar.ar_id.scope == ArScope::Host) {
    host_index_[std::get<NodeId>(ar.owner)] = ar.ar_id;
  }
  registers_.emplace(ar.ar_id, std::move(ar));
  ++core_msg_counter_;
  return RegisterArOutcome::Ok;
}

UpdateOutcome LcsState::update_attachment(const NodeId& node, const ArId& new_parent, Tick now) {
  auto host_it = host_index_.find(node);
  if (host_it == host_index_.end()) return UpdateOutcome::NotFound;
  auto parent_it = registers_.find(new_parent);
  if (parent_it == registers_.end() || new_parent.scope != ArScope::EdgeNetwork) {
    return UpdateOutcome::BadParent;
  }
  AttachmentRegister& host = registers_.at(host_it->second);
  // Replace the host AR's single parent edge, both directions.
  for (const ArId& old_parent : host.neighbors) {
    registers_.at(old_parent).neighbors.erase(host.ar_id);
  }
  host.neighbors.clear();
  host.neighbors.insert(new_parent);
  parent_it->second.neighbors.insert(host.ar_id);
  host.updated_at = now;
  ++core_msg_counter_;
  return UpdateOutcome::Ok;
}

std::optional<GlobalLocator> LcsState::construct_locator(const NodeId& target, Tick now) const {
  auto host_it = host_index_.find(target);
  if (host_it == host_index_.end()) return std::nullopt;
  const ArId& goal = host_it->second;

  // Distance-to-goal labels via BFS, then a greedy walk from the root that
  // always takes the smallest ArId on some shortest path. Front-first
  // minimization yields the lexicographically smallest sequence.
  std::map<ArId, int> dist;
  std::deque<const AttachmentRegister*> frontier;
  dist[goal] = 0;
  frontier.push_back(&registers_.at(goal));
  while (!frontier.empty()) {
    const AttachmentRegister* cur = frontier.front();
    frontier.pop_front();
    int d = dist.at(cur->ar_id);
    for (const ArId& n : cur->neighbors) {
      if (dist.emplace(n, d + 1).second) frontier.push_back(&registers_.at(n));
    }
  }
  auto root_dist = dist.find(root_);
  if (root_dist == dist.end()) return std::nullopt; // core-unreachable host

  GlobalLocator locator;
  locator.constructed_at = now;
  const ArId* cur = &root_;
  int remaining = root_dist->second;
  while (remaining > 0) {
    const ArId* best = nullptr;
    for (const ArId& n : registers_.at(*cur).neighbors) { // std::set: ordered scan
      auto it = dist.find(n);
      if (it != dist.end() && it->second == remaining - 1) {
        best = &n;
        break;
      }
    }
    if (best == nullptr) throw SimBug("locator walk lost the shortest path");
    locator.path.push_back(*best);
    cur = best;
    --remaining;
  }
  return locator;
}

MapReply LcsState::handle_map_request(const MapRequest& request, Tick now) {
  core_msg_counter_ += 2; // request in, reply out
  return MapReply{request.target, construct_locator(request.target, now)};
}

const AttachmentRegister* LcsState::find(const ArId& ar) const {
  auto it = registers_.find(ar);
  return it == registers_.end() ? nullptr : &it->second;
}

std::optional<ArId> LcsState::host_ar_of(const NodeId& node) const {
  auto it = host_index_.find(node);
  if (it == host_index_.end()) return std::nullopt;
  return it->second;
}

} // namespace netinf::lcs
