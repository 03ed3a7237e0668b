// Acceptance gate: one pass/fail line per criterion, exit 0 only when all
// eight hold. Each criterion also carries a wall-clock budget; blowing the
// budget fails it even if the assertions hold.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "netinf/lcs.hpp"
#include "netinf/scenario.hpp"
#include "netinf/tunnel.hpp"
#include "oracle.hpp"

using namespace netinf;
namespace sc = netinf::scenario;
namespace rp = netinf::report;

namespace {

// Collects the first failure; later expectations are still evaluated cheaply
// but only the first explanation is kept.
struct Check {
  bool ok{true};
  std::string why;

  void expect(bool condition, const std::string& what) {
    if (ok && !condition) {
      ok = false;
      why = what;
    }
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

sc::Scenario load(const std::string& name) {
  return sc::parse(slurp(std::string(NETINF_SCENARIO_DIR) + "/" + name));
}

std::string fixture(const std::string& name) {
  return slurp(std::string(NETINF_FIXTURE_DIR) + "/" + name);
}

bool subsequence(const std::vector<std::string>& lines,
                 const std::vector<std::string>& needles) {
  std::size_t at = 0;
  for (const auto& line : lines) {
    if (at == needles.size()) break;
    if (line.find(needles[at]) != std::string::npos) ++at;
  }
  return at == needles.size();
}

const rp::SessionReport* session_row(const rp::Report& report, const std::string& sid,
                                     const std::string& node) {
  for (const auto& row : report.sessions) {
    if (row.sid == sid && row.node == node) return &row;
  }
  return nullptr;
}

const rp::NodeReport* node_row(const rp::Report& report, const std::string& label) {
  for (const auto& row : report.nodes) {
    if (row.label == label) return &row;
  }
  return nullptr;
}

// --- criterion 1: the full reattachment walk, and cache hits skipping it ---

void crit_reattachment_walk(Check& c) {
  sc::RunResult cold = sc::run_scenario(load("fig2.scn"));
  c.expect(subsequence(cold.trace_lines,
                       {"kind=AddressRequest", "kind=RegisterRequest", "kind=AttachUpdate",
                        "kind=CacheQuery", "-> miss", "kind=MapRequest", "kind=MapReply",
                        "kind=Resume", "session_active"}),
           "fig2 trace lacks the ordered reattachment sequence");

  sc::RunResult warm = sc::run_scenario(load("fig2_hit.scn"));
  const rp::NodeReport* mover = node_row(warm.report, "MN1");
  c.expect(mover != nullptr && mover->map_requests == 0,
           "fig2_hit: the mover still asked the core for a mapping");
  c.expect(warm.report.cache_hits == 1, "fig2_hit: expected exactly one edge cache hit");
}

// --- criterion 2: rendezvous answers arrivals in the window, not after ---

void crit_rendezvous(Check& c) {
  const rp::Report in_window = sc::run_scenario(load("fig3.scn")).report;
  c.expect(in_window.rendezvous_successes == 2, "fig3: both lookups should rendezvous");
  c.expect(in_window.map_requests == 0 && in_window.map_replies == 0,
           "fig3: rendezvous must not touch the core mapping service");

  const rp::Report late = sc::run_scenario(load("fig3_late.scn")).report;
  c.expect(late.rendezvous_timeouts == 1, "fig3_late: expected one expired lookup");
  c.expect(late.map_requests == 1, "fig3_late: the expired lookup must fall back to the core");
  c.expect(late.rendezvous_successes == 1, "fig3_late: the in-window lookup should still hit");
}

// --- criterion 3: update-policy cost split, pinned by committed fixtures ---

void crit_policy_costs(Check& c) {
  sc::Scenario scenario = load("moves5.scn");
  sc::RunOptions lazy, eager;
  lazy.policy = UpdatePolicy::Lazy;
  eager.policy = UpdatePolicy::Eager;
  const rp::Report a = sc::run_scenario(scenario, lazy).report;
  const rp::Report b = sc::run_scenario(scenario, eager).report;

  c.expect(a.core_msgs == 15, "moves5 lazy: core_msgs != 15");
  c.expect(b.core_msgs == 25, "moves5 eager: core_msgs != 25");

  auto rows = rp::compare_runs(a, b, {"global.core_msgs"});
  c.expect(rows.size() == 1 && rows[0].a < rows[0].b,
           "compare_runs does not show lazy < eager on global.core_msgs");

  c.expect(rp::to_json_text(a) == fixture("moves5_lazy.json"),
           "moves5 lazy report deviates from the committed fixture");
  c.expect(rp::to_json_text(b) == fixture("moves5_eager.json"),
           "moves5 eager report deviates from the committed fixture");
}

// --- criterion 4: handover delivery equals the no-mobility oracle ---

void crit_handover_delivery(Check& c) {
  const sc::Scenario moving = load("delegation.scn");

  sc::Scenario still = moving;
  std::erase_if(still.actions,
                [](const sc::Action& a) { return std::holds_alternative<sc::MoveAction>(a.op); });
  const auto oracle = sc::run_scenario(still).delivered.at({"MN1", "S1"});
  c.expect(oracle.size() == 50, "no-mobility oracle did not deliver all 50 payloads");

  sc::RunResult delegated = sc::run_scenario(moving);
  c.expect(delegated.report.delegations == 1, "delegation run performed no delegation");
  c.expect(delegated.delivered.at({"MN1", "S1"}) == oracle,
           "delegated run delivered a different sequence than the no-mobility oracle");

  sc::RunResult bare = sc::run_scenario(load("delegation_off.scn"));
  const rp::SessionReport* row = session_row(bare.report, "S1", "MN1");
  c.expect(row != nullptr && row->interruption_ticks > 0,
           "undelegated run shows no interruption at the mover");
  c.expect(bare.delivered.at({"MN1", "S1"}) == oracle,
           "undelegated run did not recover the oracle sequence via retransmission");
}

// --- criterion 5: locator construction vs. the lexicographic oracle ---

void crit_locator_oracle(Check& c) {
  std::mt19937 rng(0x5eed);
  IdRegistry ids;
  std::uint64_t compared = 0;
  int unreachable = 0;

  for (int trial = 0; trial < 500 && c.ok; ++trial) {
    lcs::LcsState lcs;
    std::vector<ArId> edge_ars;
    // Island ARs (no path to the root) sponsor only each other, so hosts
    // landing there are genuinely core-unreachable.
    std::vector<ArId> attached, detached;
    int n_edges = 2 + static_cast<int>(rng() % 180);
    for (int i = 0; i < n_edges; ++i) {
      lcs::AttachmentRegister ar;
      ar.ar_id = edge_ar("E" + std::to_string(trial) + "_" + std::to_string(i));
      ar.owner = EdgeNetworkId(ar.ar_id.name);
      bool orphan = rng() % 6 == 0 && !edge_ars.empty();
      if (orphan) {
        if (!detached.empty() && rng() % 2 == 0) {
          ar.neighbors.insert(detached[rng() % detached.size()]);
        }
      } else {
        ar.neighbors.insert(lcs.root());
        int extra = static_cast<int>(rng() % 3);
        for (int k = 0; k < extra && !attached.empty(); ++k) {
          ar.neighbors.insert(attached[rng() % attached.size()]);
        }
      }
      if (lcs.register_ar(ar) == lcs::RegisterArOutcome::Ok) {
        edge_ars.push_back(ar.ar_id);
        (orphan ? detached : attached).push_back(ar.ar_id);
      }
    }

    std::vector<NodeId> hosts;
    int n_hosts = 1 + static_cast<int>(rng() % 15);
    for (int i = 0; i < n_hosts; ++i) {
      std::string name = "H" + std::to_string(trial) + "_" + std::to_string(i);
      lcs::AttachmentRegister ar;
      ar.ar_id = host_ar(name);
      ar.owner = ids.mint(name);
      ar.neighbors = {edge_ars[rng() % edge_ars.size()]};
      if (lcs.register_ar(ar) == lcs::RegisterArOutcome::Ok) {
        hosts.push_back(std::get<NodeId>(ar.owner));
      }
    }
    for (int i = 0; i < 6 && !hosts.empty(); ++i) {
      lcs.update_attachment(hosts[rng() % hosts.size()], edge_ars[rng() % edge_ars.size()],
                            static_cast<Tick>(i));
    }

    for (const NodeId& host : hosts) {
      auto got = lcs.construct_locator(host, 0);
      auto want = testsupport::oracle_locator_path(lcs, host);
      ++compared;
      if (got.has_value() != want.has_value()) {
        c.expect(false, "reachability disagreement on trial " + std::to_string(trial));
        break;
      }
      if (!got) {
        ++unreachable;
        continue;
      }
      if (got->path != *want) {
        c.expect(false, "path mismatch on trial " + std::to_string(trial) + " for " +
                            got->render());
        break;
      }
      if (!validate_locator(*got, lcs.view()).ok()) {
        c.expect(false, "constructed locator fails validation on trial " +
                            std::to_string(trial));
        break;
      }
    }
  }
  c.expect(compared >= 500, "generator produced too few host comparisons");
  c.expect(unreachable > 0, "generator never produced a core-unreachable host");
}

// --- criterion 6: bit-identical reruns across scenarios and seeds ---

void crit_determinism(Check& c) {
  const std::vector<std::pair<std::string, std::uint64_t>> pairs = {
      {"fig2.scn", 1},          {"fig2.scn", 7},         {"fig2.scn", 99},
      {"fig2_hit.scn", 1},      {"fig2_hit.scn", 5},     {"fig3.scn", 1},
      {"fig3.scn", 13},         {"fig3_late.scn", 1},    {"fig3_late.scn", 21},
      {"moves5.scn", 1},        {"moves5.scn", 2},       {"moves5.scn", 3},
      {"delegation.scn", 1},    {"delegation.scn", 17},  {"delegation_off.scn", 1},
      {"delegation_off.scn", 23}, {"scale100.scn", 1},   {"scale100.scn", 2},
      {"scale100.scn", 42},     {"scale100.scn", 99},
  };
  for (const auto& [name, seed] : pairs) {
    if (!c.ok) break;
    sc::Scenario scenario = load(name);
    sc::RunOptions options;
    options.seed = seed;
    sc::RunResult first = sc::run_scenario(scenario, options);
    sc::RunResult second = sc::run_scenario(scenario, options);
    c.expect(first.trace_text() == second.trace_text(),
             name + " seed " + std::to_string(seed) + ": traces differ across reruns");
    c.expect(rp::to_json_text(first.report) == rp::to_json_text(second.report),
             name + " seed " + std::to_string(seed) + ": reports differ across reruns");
  }
}

// --- criterion 7: tunnel round trips and strict MTU refusal ---

void crit_tunnel_roundtrip(Check& c) {
  using namespace netinf::tunnel;
  std::mt19937_64 rng(0x7u);
  for (int i = 0; i < 10000 && c.ok; ++i) {
    NodeId src;
    for (auto& b : src.value) b = static_cast<std::uint8_t>(rng());
    InnerDst dst;
    if (i % 3 == 0) {
      dst = ExternalAddress{"ext:/site/" + std::to_string(rng() % 97)};
    } else {
      NodeId peer;
      for (auto& b : peer.value) b = static_cast<std::uint8_t>(rng());
      dst = peer;
    }
    GlobalLocator outer;
    outer.path = {edge_ar("EN" + std::to_string(rng() % 11)),
                  host_ar("H" + std::to_string(rng() % 1000))};

    std::vector<std::uint8_t> payload(rng() % 2001);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
    std::size_t mtu = rng() % 2200;

    auto result = encapsulate(src, dst, payload, outer, mtu);
    const bool must_fail = kHeaderBytes + payload.size() > mtu;
    if (must_fail) {
      const auto* refused = std::get_if<MtuExceeded>(&result);
      c.expect(refused != nullptr, "oversized packet was not refused");
      if (refused) {
        c.expect(refused->needed == kHeaderBytes + payload.size() && refused->mtu == mtu,
                 "MtuExceeded carries wrong sizes");
      }
      continue;
    }
    const auto* packet = std::get_if<EncapsulatedPacket>(&result);
    c.expect(packet != nullptr, "fitting packet was refused");
    if (!packet) continue;
    c.expect(packet->total_size() == payload.size() + kHeaderBytes,
             "encapsulation overhead is not exactly the header size");

    InnerDatagram inner = decapsulate(*packet);
    c.expect(inner.src == src && inner.dst == dst && inner.payload == payload,
             "decapsulate is not the inverse of encapsulate");

    auto header = encode_header(*packet);
    auto decoded = decode_header(header.data(), header.size());
    const auto* fields = std::get_if<HeaderFields>(&decoded);
    c.expect(fields != nullptr, "self-encoded header fails to decode");
    if (fields) {
      c.expect(fields->version == kVersion &&
                   fields->payload_len == payload.size() &&
                   fields->inner_src == src &&
                   fields->outer_digest == locator_digest(outer),
               "decoded header fields do not round-trip");
    }
  }
}

// --- criterion 8: scale run inside budget with exact message conservation ---

void crit_scale(Check& c) {
  sc::Scenario scenario = load("scale100.scn");
  const auto started = std::chrono::steady_clock::now();
  const rp::Report r = sc::run_scenario(scenario).report;
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  c.expect(r.event_count >= 10000,
           "scale run processed only " + std::to_string(r.event_count) + " events");
  c.expect(elapsed < 5.0, "scale run took " + std::to_string(elapsed) + "s");
  const std::pair<const char*, const rp::ClassReport*> classes[] = {
      {"edge", &r.edge}, {"core", &r.core}, {"data", &r.data}};
  for (const auto& [name, cls] : classes) {
    c.expect(cls->sent == cls->delivered + cls->dropped + cls->stranded + cls->in_flight,
             std::string(name) + " class loses or invents messages");
  }
}

struct Criterion {
  int number;
  const char* title;
  void (*run)(Check&);
  double budget_seconds;
};

} // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "reattachment walk; warm cache skips the core", crit_reattachment_walk, 1.0},
      {2, "rendezvous inside the window; core fallback after", crit_rendezvous, 1.0},
      {3, "lazy vs eager core cost, pinned by fixtures", crit_policy_costs, 1.0},
      {4, "handover delivery equals the no-mobility oracle", crit_handover_delivery, 2.0},
      {5, "locator construction matches the lexicographic oracle", crit_locator_oracle, 10.0},
      {6, "reruns are byte-identical per (scenario, seed)", crit_determinism, 30.0},
      {7, "tunnel round trips and strict MTU refusal", crit_tunnel_roundtrip, 5.0},
      {8, "scale run in budget with exact conservation", crit_scale, 5.0},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    Check check;
    const auto started = std::chrono::steady_clock::now();
    try {
      criterion.run(check);
    } catch (const std::exception& err) {
      check.expect(false, std::string("exception: ") + err.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    check.expect(elapsed < criterion.budget_seconds,
                 "exceeded " + std::to_string(criterion.budget_seconds) + "s budget");

    if (!check.ok) ++failures;
    std::printf("criterion %d: %s (%.3fs) %s%s%s\n", criterion.number,
                check.ok ? "PASS" : "FAIL", elapsed, criterion.title,
                check.ok ? "" : " -- ", check.ok ? "" : check.why.c_str());
  }
  std::printf("%s: %d/8 criteria passed\n", failures == 0 ? "ACCEPTED" : "REJECTED",
              8 - failures);
  return failures == 0 ? 0 : 1;
}
