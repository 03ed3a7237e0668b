#include "netinf/edge.hpp"

#include <algorithm>

namespace netinf::edge {

AllocateResult LocalServerState::allocate_local_address(const NodeId& node) {
  if (registrations_.count(node) != 0) return AllocateError::AlreadyAttached;
  int slot;
  if (!free_slots_.empty()) {
    slot = *free_slots_.begin();
    free_slots_.erase(free_slots_.begin());
  } else {
    slot = next_slot_++;
  }
  slot_owner_[slot] = node;
  return LocalAddress{en_, slot};
}

RegisterResult LocalServerState::register_node(const NodeId& node, const LocalAddress& addr,
                                               Tick now) {
  RegisterResult result;
  auto owner = slot_owner_.find(addr.slot);
  if (addr.en != en_ || owner == slot_owner_.end() || owner->second != node) {
    result.error = RegisterError::ForeignAddress;
    return result;
  }
  if (registrations_.count(node) != 0) {
    result.error = RegisterError::AlreadyRegistered;
    return result;
  }
  registrations_[node] = Registration{addr, now};
  cache_[node] = CacheEntry{addr, now, default_cache_ttl_};
  // Answer everyone still waiting on this node, oldest request first.
  auto alive = pending_.begin();
  for (auto it = pending_.begin(); it != pending_.end(); ++it) {
    if (it->target == node && it->deadline > now) {
      result.notifications.push_back(RendezvousNotification{it->requester, node, addr});
      ++counters_.rendezvous_successes;
    } else {
      *alive++ = std::move(*it);
    }
  }
  pending_.erase(alive, pending_.end());
  return result;
}

std::optional<CachedLocator> LocalServerState::query_cache(const NodeId& target, Tick now) {
  auto it = cache_.find(target);
  if (it == cache_.end()) {
    ++counters_.cache_misses;
    return std::nullopt;
  }
  if (!cache_live(it->second, now)) {
    cache_.erase(it); // evict on touch
    ++counters_.cache_misses;
    return std::nullopt;
  }
  ++counters_.cache_hits;
  return CachedLocator{target, it->second.where, now - it->second.inserted};
}

LookupResult LocalServerState::lookup_request(const NodeId& requester, const NodeId& target,
                                              Tick ttl, Tick now) {
  if (registrations_.count(requester) == 0) return LookupError::NotAttached;
  if (ttl <= 0) return LookupError::BadTtl;
  auto target_reg = registrations_.find(target);
  if (target_reg != registrations_.end()) {
    ++counters_.rendezvous_successes;
    return LookupAnswer{target_reg->second.addr};
  }
  Tick deadline = now + ttl;
  pending_.push_back(PendingLookup{requester, target, now, deadline});
  return LookupWaiting{deadline};
}

std::vector<ExpiredLookup> LocalServerState::expire(Tick now) {
  if (now < last_expire_) throw SimBug("edge expire called with a smaller tick");
  last_expire_ = now;
  std::vector<ExpiredLookup> expired;
  auto alive = pending_.begin();
  for (auto it = pending_.begin(); it != pending_.end(); ++it) {
    if (it->deadline <= now) {
      expired.push_back(ExpiredLookup{it->requester, it->target, it->deadline});
      ++counters_.rendezvous_timeouts;
    } else {
      *alive++ = std::move(*it);
    }
  }
  pending_.erase(alive, pending_.end());
  for (auto it = cache_.begin(); it != cache_.end();) {
    if (!cache_live(it->second, now)) it = cache_.erase(it);
    else ++it;
  }
  return expired;
}

DeregisterOutcome LocalServerState::deregister(const NodeId& node, Tick) {
  auto it = registrations_.find(node);
  if (it == registrations_.end()) return DeregisterOutcome::NotFound;
  int slot = it->second.addr.slot;
  registrations_.erase(it);
  slot_owner_.erase(slot);
  free_slots_.insert(slot);
  // Cache entries deliberately survive: departures leave a trace.
  return DeregisterOutcome::Ok;
}

void LocalServerState::store_locator(const NodeId& target, const Where& where, Tick now) {
  cache_[target] = CacheEntry{where, now, default_cache_ttl_};
}

void LocalServerState::bind_delegate(const NodeId& principal, const NodeId& delegate) {
  bindings_[principal] = delegate;
}

void LocalServerState::release_binding(const NodeId& principal) { bindings_.erase(principal); }

std::optional<NodeId> LocalServerState::delegate_for(const NodeId& principal) const {
  auto it = bindings_.find(principal);
  if (it == bindings_.end()) return std::nullopt;
  return it->second;
}

std::optional<LocalAddress> LocalServerState::registered_addr(const NodeId& node) const {
  auto it = registrations_.find(node);
  if (it == registrations_.end()) return std::nullopt;
  return it->second.addr;
}

} // namespace netinf::edge
