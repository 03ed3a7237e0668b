#include <doctest.h>

#include "netinf/report.hpp"
#include "netinf/scenario.hpp"

using namespace netinf;
namespace rp = netinf::report;

namespace {

// A fully populated report with no field left at its default.
rp::Report sample() {
  rp::Report r;
  r.scenario = "sample";
  r.seed = 11;
  r.ticks = 500;
  r.event_count = 42;
  r.update_policy = "eager";
  r.core_msgs = 3;
  r.edge_msgs = 8;
  r.data_msgs = 2;
  r.lcs_counter = 9;
  r.cache_hits = 1;
  r.cache_misses = 2;
  r.rendezvous_successes = 1;
  r.rendezvous_timeouts = 1;
  r.delegations = 1;
  r.delegate_losses = 0;
  r.map_requests = 2;
  r.map_replies = 2;
  r.edge = rp::ClassReport{8, 8, 0, 0, 0};
  r.core = rp::ClassReport{3, 2, 0, 1, 0};
  r.data = rp::ClassReport{2, 2, 0, 0, 0};
  r.sessions.push_back(rp::SessionReport{"S1", "MN1", "MN2", "active", 56, 4, true});
  r.sessions.push_back(rp::SessionReport{"S1", "MN2", "MN1", "active", 0, 3, false});
  r.nodes.push_back(rp::NodeReport{"MN1", "7d337545aaaa", 5, 2, 3, 1, 0, 0});
  r.nodes.push_back(rp::NodeReport{"MN2", "f2565fdcbbbb", 3, 1, 4, 1, 1, 0});
  return r;
}

rp::Report run_small(const std::string& extra = "") {
  std::string text = "scenario small\n"
                     "topology\n  en EN1\n  en EN2\n"
                     "nodes\n  node MN1 home=EN1 vnl=no\n  node MN2 home=EN2 vnl=no\n"
                     "sessions\n  session S1 MN1 MN2\n"
                     "actions\n  at 5 send MN1 S1 bytes=16\n  at 8 send MN2 S1 bytes=16\n" +
                     extra;
  return scenario::run_scenario(scenario::parse(text)).report;
}

} // namespace

TEST_CASE("report json round trips exactly") {
  rp::Report r = sample();
  rp::ordered_json doc = rp::to_json(r);
  CHECK(rp::from_json(doc) == r);

  // And through the canonical text form.
  std::string text = rp::to_json_text(r);
  CHECK(rp::from_json(rp::ordered_json::parse(text)) == r);
}

TEST_CASE("canonical report text is stable and newline-terminated") {
  std::string text = rp::to_json_text(sample());
  CHECK(text.rfind("{\n", 0) == 0);
  CHECK(text.substr(text.size() - 2) == "}\n");
  CHECK(text.find("  \"report_version\": 1") != std::string::npos);
  // Section order is fixed by construction.
  CHECK(text.find("\"run\"") < text.find("\"global\""));
  CHECK(text.find("\"global\"") < text.find("\"net\""));
  CHECK(text.find("\"net\"") < text.find("\"sessions\""));
  CHECK(text.find("\"sessions\"") < text.find("\"nodes\""));
  CHECK(rp::to_json_text(sample()) == text);
}

TEST_CASE("a live run produces a coherent report") {
  rp::Report r = run_small();
  CHECK(r.scenario == "small");
  CHECK(r.seed == 1);
  CHECK(r.update_policy == "lazy");
  CHECK(r.ticks == 1008);
  CHECK(r.event_count > 0);
  CHECK(r.data_msgs == r.data.sent);
  CHECK(r.edge_msgs == r.edge.sent);
  CHECK(r.core_msgs == r.core.sent);
  REQUIRE(r.sessions.size() == 2);
  CHECK(r.sessions[0].sid == "S1");
  CHECK(r.sessions[0].node == "MN1");
  CHECK(r.sessions[0].peer == "MN2");
  CHECK(r.sessions[1].node == "MN2");
  CHECK(r.sessions[0].state == "active");
  CHECK(r.sessions[0].payloads_delivered == 1); // what MN1 received from MN2
  CHECK(r.sessions[0].in_order);
  REQUIRE(r.nodes.size() == 2);
  CHECK(r.nodes[0].label == "MN1");
  CHECK(r.nodes[0].id.size() == 32);
  CHECK(rp::from_json(rp::to_json(r)) == r);
}

TEST_CASE("from_json rejects foreign versions") {
  rp::ordered_json doc = rp::to_json(sample());
  doc["report_version"] = 2;
  CHECK_THROWS_AS(rp::from_json(doc), rp::IncomparableReports);
}

TEST_CASE("lookup_metric resolves every dotted family") {
  rp::Report r = sample();
  CHECK(rp::lookup_metric(r, "run.seed") == 11.0);
  CHECK(rp::lookup_metric(r, "run.ticks") == 500.0);
  CHECK(rp::lookup_metric(r, "run.event_count") == 42.0);
  CHECK(rp::lookup_metric(r, "global.core_msgs") == 3.0);
  CHECK(rp::lookup_metric(r, "global.rendezvous_timeouts") == 1.0);
  CHECK(rp::lookup_metric(r, "net.core.stranded") == 1.0);
  CHECK(rp::lookup_metric(r, "net.data.sent") == 2.0);
  CHECK(rp::lookup_metric(r, "sessions.S1.MN1.interruption_ticks") == 56.0);
  CHECK(rp::lookup_metric(r, "sessions.S1.MN2.payloads_delivered") == 3.0);
  CHECK(rp::lookup_metric(r, "sessions.S1.MN1.in_order") == 1.0);
  CHECK(rp::lookup_metric(r, "sessions.S1.MN2.in_order") == 0.0);
  CHECK(rp::lookup_metric(r, "nodes.MN2.delegations") == 1.0);
  CHECK(rp::lookup_metric(r, "nodes.MN1.edge_sent") == 5.0);

  CHECK_FALSE(rp::lookup_metric(r, "").has_value());
  CHECK_FALSE(rp::lookup_metric(r, "run.nope").has_value());
  CHECK_FALSE(rp::lookup_metric(r, "global").has_value());
  CHECK_FALSE(rp::lookup_metric(r, "net.wire.sent").has_value());
  CHECK_FALSE(rp::lookup_metric(r, "sessions.S9.MN1.in_order").has_value());
  CHECK_FALSE(rp::lookup_metric(r, "nodes.MN9.edge_sent").has_value());
}

TEST_CASE("compare_runs lines up keys and signs the delta as b minus a") {
  rp::Report a = run_small();
  rp::Report b = run_small("params\n  seed=2\n");
  b.core_msgs += 4; // synthetic difference

  auto rows = rp::compare_runs(a, b, {"global.core_msgs", "run.seed"});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].key == "global.core_msgs");
  CHECK(rows[0].a == static_cast<double>(a.core_msgs));
  CHECK(rows[0].b == static_cast<double>(b.core_msgs));
  CHECK(rows[0].delta == rows[0].b - rows[0].a);
  CHECK(rows[1].key == "run.seed");
  CHECK(rows[1].delta == 1.0);
}

TEST_CASE("compare_runs with no keys walks the default set") {
  rp::Report a = run_small();
  auto rows = rp::compare_runs(a, a, {});
  auto defaults = rp::default_compare_keys(a);
  REQUIRE(rows.size() == defaults.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].key == defaults[i]);
    CHECK(rows[i].delta == 0.0);
  }
  // Per-session interruption rows ride along by default.
  bool has_session_row = false;
  for (const auto& key : defaults) {
    if (key == "sessions.S1.MN1.interruption_ticks") has_session_row = true;
  }
  CHECK(has_session_row);
}

TEST_CASE("compare_runs refuses mismatched shapes and unknown keys") {
  rp::Report a = sample();
  rp::Report b = sample();

  SUBCASE("different scenario names") {
    b.scenario = "other";
    CHECK_THROWS_AS(rp::compare_runs(a, b, {}), rp::IncomparableReports);
  }
  SUBCASE("different session sets") {
    b.sessions.pop_back();
    CHECK_THROWS_AS(rp::compare_runs(a, b, {}), rp::IncomparableReports);
  }
  SUBCASE("unknown key names itself") {
    try {
      rp::compare_runs(a, b, {"global.nope"});
      FAIL("expected IncomparableReports");
    } catch (const rp::IncomparableReports& e) {
      CHECK(std::string(e.what()).find("global.nope") != std::string::npos);
    }
  }
}
