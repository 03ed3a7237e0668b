#include <doctest.h>

#include "netinf/edge.hpp"
#include "helpers.hpp"

using namespace netinf;
using edge::LocalServerState;
using testsupport::test_id;

namespace {

LocalAddress must_allocate(LocalServerState& ls, const NodeId& node) {
  auto result = ls.allocate_local_address(node);
  REQUIRE(std::holds_alternative<LocalAddress>(result));
  return std::get<LocalAddress>(result);
}

void must_register(LocalServerState& ls, const NodeId& node, Tick now) {
  auto addr = must_allocate(ls, node);
  auto result = ls.register_node(node, addr, now);
  REQUIRE_FALSE(result.error.has_value());
}

} // namespace

TEST_CASE("slots grow then recycle smallest first") {
  LocalServerState ls("EN1", 100);
  NodeId a = test_id(1), b = test_id(2), c = test_id(3);
  CHECK(must_allocate(ls, a).slot == 0);
  CHECK(must_allocate(ls, b).slot == 1);
  CHECK(must_allocate(ls, c).slot == 2);
  REQUIRE_FALSE(ls.register_node(a, LocalAddress{"EN1", 0}, 1).error.has_value());
  REQUIRE_FALSE(ls.register_node(b, LocalAddress{"EN1", 1}, 1).error.has_value());
  REQUIRE_FALSE(ls.register_node(c, LocalAddress{"EN1", 2}, 1).error.has_value());

  CHECK(ls.deregister(b, 2) == edge::DeregisterOutcome::Ok);
  CHECK(ls.deregister(a, 2) == edge::DeregisterOutcome::Ok);
  CHECK(ls.deregister(a, 2) == edge::DeregisterOutcome::NotFound);

  // Freed slots 0 and 1 come back smallest-first before fresh ones.
  NodeId d = test_id(4), e = test_id(5), f = test_id(6);
  CHECK(must_allocate(ls, d).slot == 0);
  CHECK(must_allocate(ls, e).slot == 1);
  CHECK(must_allocate(ls, f).slot == 3);
}

TEST_CASE("registration guards") {
  LocalServerState ls("EN1", 100);
  NodeId a = test_id(1), b = test_id(2);
  auto addr = must_allocate(ls, a);

  // A slot granted to someone else, a foreign edge network, or an unknown
  // slot: all foreign addresses.
  CHECK(ls.register_node(b, addr, 1).error == edge::RegisterError::ForeignAddress);
  CHECK(ls.register_node(a, LocalAddress{"EN2", 0}, 1).error ==
        edge::RegisterError::ForeignAddress);
  CHECK(ls.register_node(a, LocalAddress{"EN1", 9}, 1).error ==
        edge::RegisterError::ForeignAddress);

  REQUIRE_FALSE(ls.register_node(a, addr, 1).error.has_value());
  CHECK(ls.register_node(a, addr, 2).error == edge::RegisterError::AlreadyRegistered);
  CHECK(std::holds_alternative<edge::AllocateError>(ls.allocate_local_address(a)));

  CHECK(ls.registered_addr(a) == addr);
  CHECK_FALSE(ls.registered_addr(b).has_value());
}

TEST_CASE("cache entries live strictly less than inserted plus ttl") {
  LocalServerState ls("EN1", 10);
  NodeId a = test_id(1);
  must_register(ls, a, 5); // registration seeds the cache at t=5, ttl=10

  auto at_14 = ls.query_cache(a, 14);
  REQUIRE(at_14.has_value());
  CHECK(at_14->age == 9);

  // t = inserted + ttl is already dead (strict boundary), and the touch
  // evicts the entry.
  CHECK_FALSE(ls.query_cache(a, 15).has_value());
  CHECK(ls.cache().count(a) == 0);
  CHECK(ls.counters().cache_hits == 1);
  CHECK(ls.counters().cache_misses == 1);
}

TEST_CASE("cache survives deregistration and store_locator overwrites") {
  LocalServerState ls("EN1", 100);
  NodeId a = test_id(1);
  must_register(ls, a, 0);
  REQUIRE(ls.deregister(a, 10) == edge::DeregisterOutcome::Ok);

  auto cached = ls.query_cache(a, 20);
  REQUIRE(cached.has_value()); // departures leave a trace
  CHECK(cached->age == 20);

  GlobalLocator fresh;
  fresh.path = {edge_ar("EN2"), host_ar("A")};
  ls.store_locator(a, Where{fresh}, 30);
  auto overwritten = ls.query_cache(a, 40);
  REQUIRE(overwritten.has_value());
  CHECK(overwritten->age == 10);
  REQUIRE(std::holds_alternative<GlobalLocator>(overwritten->where));
  CHECK(std::get<GlobalLocator>(overwritten->where) == fresh);
}

TEST_CASE("lookup answers immediately only for registered targets") {
  LocalServerState ls("EN1", 100);
  NodeId a = test_id(1), b = test_id(2);
  must_register(ls, a, 0);

  // Requester must itself be attached.
  CHECK(std::get<edge::LookupError>(ls.lookup_request(b, a, 50, 1)) ==
        edge::LookupError::NotAttached);
  CHECK(std::get<edge::LookupError>(ls.lookup_request(a, b, 0, 1)) ==
        edge::LookupError::BadTtl);

  auto waiting = ls.lookup_request(a, b, 50, 1);
  REQUIRE(std::holds_alternative<edge::LookupWaiting>(waiting));
  CHECK(std::get<edge::LookupWaiting>(waiting).deadline == 51);
  CHECK(ls.pending().size() == 1);

  must_register(ls, b, 2); // the registration answers the waiter
  CHECK(ls.pending().empty());
  CHECK(ls.counters().rendezvous_successes == 1);

  auto immediate = ls.lookup_request(a, b, 50, 3);
  REQUIRE(std::holds_alternative<edge::LookupAnswer>(immediate));
  CHECK(ls.counters().rendezvous_successes == 2);
}

TEST_CASE("registration answers all live waiters in request order") {
  LocalServerState ls("EN1", 100);
  NodeId w1 = test_id(1), w2 = test_id(2), w3 = test_id(3), target = test_id(9);
  must_register(ls, w1, 0);
  must_register(ls, w2, 0);
  must_register(ls, w3, 0);
  REQUIRE(std::holds_alternative<edge::LookupWaiting>(ls.lookup_request(w2, target, 10, 1)));
  REQUIRE(std::holds_alternative<edge::LookupWaiting>(ls.lookup_request(w1, target, 50, 2)));
  REQUIRE(std::holds_alternative<edge::LookupWaiting>(ls.lookup_request(w3, target, 50, 3)));

  // w2's window (deadline 11) is already over by t=20: only w1 and w3 get
  // notifications, in the order they asked.
  auto addr = must_allocate(ls, target);
  auto result = ls.register_node(target, addr, 20);
  REQUIRE_FALSE(result.error.has_value());
  REQUIRE(result.notifications.size() == 2);
  CHECK(result.notifications[0].requester == w1);
  CHECK(result.notifications[1].requester == w3);
  CHECK(ls.counters().rendezvous_successes == 2);
  // The waiter whose window closed is sweep business, not registration
  // business: it still times out.
  auto expired = ls.expire(21);
  REQUIRE(expired.size() == 1);
  CHECK(expired[0].requester == w2);
  CHECK(ls.counters().rendezvous_timeouts == 1);
}

TEST_CASE("expire reports timed out lookups once and tolerates equal ticks") {
  LocalServerState ls("EN1", 100);
  NodeId a = test_id(1), ghost = test_id(7);
  must_register(ls, a, 0);
  REQUIRE(std::holds_alternative<edge::LookupWaiting>(ls.lookup_request(a, ghost, 10, 1)));

  CHECK(ls.expire(5).empty());
  auto expired = ls.expire(11); // deadline 11: <= now counts as over
  REQUIRE(expired.size() == 1);
  CHECK(expired[0].requester == a);
  CHECK(expired[0].target == ghost);
  CHECK(ls.counters().rendezvous_timeouts == 1);
  CHECK(ls.expire(11).empty()); // same tick again is fine, nothing doubles
  CHECK_THROWS_AS(ls.expire(10), SimBug);
}

TEST_CASE("bindings map principals to delegates until released") {
  LocalServerState ls("EN1", 100);
  NodeId principal = test_id(1), delegate = test_id(2);
  CHECK_FALSE(ls.delegate_for(principal).has_value());
  ls.bind_delegate(principal, delegate);
  CHECK(ls.delegate_for(principal) == delegate);
  ls.release_binding(principal);
  CHECK_FALSE(ls.delegate_for(principal).has_value());
}
