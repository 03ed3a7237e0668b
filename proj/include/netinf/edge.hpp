#pragma once

#include "netinf/ids.hpp"

namespace netinf::edge {

struct Registration {
  LocalAddress addr;
  Tick since{0};
};

struct CacheEntry {
  Where where;
  Tick inserted{0};
  Tick ttl{0};
};

// A cache answer as handed back to the querier.
struct CachedLocator {
  NodeId target;
  Where where;
  Tick age{0};
};

struct PendingLookup {
  NodeId requester;
  NodeId target;
  Tick requested_at{0};
  Tick deadline{0};
};

struct ExpiredLookup {
  NodeId requester;
  NodeId target;
  Tick deadline{0};
};

// Emitted when a registration answers someone's pending lookup.
struct RendezvousNotification {
  NodeId requester;
  NodeId target;
  LocalAddress addr;
};

enum class AllocateError { AlreadyAttached };
using AllocateResult = std::variant<LocalAddress, AllocateError>;

enum class RegisterError { ForeignAddress, AlreadyRegistered };
struct RegisterResult {
  std::optional<RegisterError> error;
  std::vector<RendezvousNotification> notifications;
};

struct LookupAnswer {
  LocalAddress addr;
};
struct LookupWaiting {
  Tick deadline;
};
enum class LookupError { NotAttached, BadTtl };
using LookupResult = std::variant<LookupAnswer, LookupWaiting, LookupError>;

enum class DeregisterOutcome { Ok, NotFound };

struct EdgeCounters {
  std::uint64_t cache_hits{0};
  std::uint64_t cache_misses{0};
  std::uint64_t rendezvous_successes{0};
  std::uint64_t rendezvous_timeouts{0};
};

// Per-edge-network local server: address allocation, the registration table,
// the locator cache, and TTL-bounded rendezvous lookups.
class LocalServerState {
 public:
  LocalServerState(EdgeNetworkId en, Tick default_cache_ttl)
      : en_(std::move(en)), default_cache_ttl_(default_cache_ttl) {}

  AllocateResult allocate_local_address(const NodeId& node);
  RegisterResult register_node(const NodeId& node, const LocalAddress& addr, Tick now);
  std::optional<CachedLocator> query_cache(const NodeId& target, Tick now);
  LookupResult lookup_request(const NodeId& requester, const NodeId& target, Tick ttl, Tick now);
  std::vector<ExpiredLookup> expire(Tick now);
  DeregisterOutcome deregister(const NodeId& node, Tick now);

  // Cache insert from a core reply the node shares back ("trace of activity"
  // for later arrivals). Overwrites any existing entry for the target.
  void store_locator(const NodeId& target, const Where& where, Tick now);

  // Delegation bindings: traffic for `principal` is handed to its delegate.
  void bind_delegate(const NodeId& principal, const NodeId& delegate);
  void release_binding(const NodeId& principal);
  std::optional<NodeId> delegate_for(const NodeId& principal) const;

  const EdgeNetworkId& en() const { return en_; }
  const std::map<NodeId, Registration>& registrations() const { return registrations_; }
  std::optional<LocalAddress> registered_addr(const NodeId& node) const;
  const std::map<NodeId, CacheEntry>& cache() const { return cache_; }
  const std::vector<PendingLookup>& pending() const { return pending_; }
  const EdgeCounters& counters() const { return counters_; }
  void set_default_cache_ttl(Tick ttl) { default_cache_ttl_ = ttl; }
  Tick default_cache_ttl() const { return default_cache_ttl_; }

 private:
  EdgeNetworkId en_;
  std::map<NodeId, Registration> registrations_;
  std::map<int, NodeId> slot_owner_; // granted slots, registered or not
  std::set<int> free_slots_;
  int next_slot_{0};
  std::map<NodeId, CacheEntry> cache_;
  std::vector<PendingLookup> pending_; // kept in request order
  std::map<NodeId, NodeId> bindings_;  // principal -> delegate
  EdgeCounters counters_;
  Tick default_cache_ttl_;
  Tick last_expire_{-1};

  bool cache_live(const CacheEntry& entry, Tick now) const {
    return now < entry.inserted + entry.ttl;
  }
};

} // namespace netinf::edge
