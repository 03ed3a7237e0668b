#pragma once

#include <nlohmann/json.hpp>

#include "netinf/sim.hpp"

namespace netinf::report {

using ordered_json = nlohmann::ordered_json;

struct SessionReport {
  std::string sid;
  std::string node;
  std::string peer;
  std::string state;
  Tick interruption_ticks{0};
  std::uint64_t payloads_delivered{0};
  bool in_order{true};

  bool operator==(const SessionReport&) const = default;
};

struct NodeReport {
  std::string label;
  std::string id;
  std::uint64_t edge_sent{0};
  std::uint64_t core_sent{0};
  std::uint64_t data_sent{0};
  std::uint64_t map_requests{0};
  std::uint64_t delegations{0};
  std::uint64_t delegate_losses{0};

  bool operator==(const NodeReport&) const = default;
};

struct ClassReport {
  std::uint64_t sent{0};
  std::uint64_t delivered{0};
  std::uint64_t dropped{0};
  std::uint64_t stranded{0};
  std::uint64_t in_flight{0};

  bool operator==(const ClassReport&) const = default;
};

struct Report {
  int report_version{1};
  std::string scenario;
  std::uint64_t seed{0};
  Tick ticks{0};
  std::uint64_t event_count{0};
  std::string update_policy{"lazy"};

  std::uint64_t core_msgs{0};
  std::uint64_t edge_msgs{0};
  std::uint64_t data_msgs{0};
  std::uint64_t lcs_counter{0};
  std::uint64_t cache_hits{0};
  std::uint64_t cache_misses{0};
  std::uint64_t rendezvous_successes{0};
  std::uint64_t rendezvous_timeouts{0};
  std::uint64_t delegations{0};
  std::uint64_t delegate_losses{0};
  std::uint64_t map_requests{0};
  std::uint64_t map_replies{0};

  ClassReport edge;
  ClassReport core;
  ClassReport data;

  std::vector<SessionReport> sessions; // declaration order, first endpoint first
  std::vector<NodeReport> nodes;       // declaration order

  bool operator==(const Report&) const = default;
};

ordered_json to_json(const Report& report);
Report from_json(const ordered_json& doc);
std::string to_json_text(const Report& report); // canonical 2-space indent + newline

// Sent-payload log used to judge per-session delivery order: every payload a
// given (sender label, sid) pair handed to the node layer, in send order.
using SentLog = std::map<std::pair<std::string, std::string>,
                         std::vector<std::vector<std::uint8_t>>>;

struct SessionSpec {
  std::string sid;
  std::string a;
  std::string b;
};

Report build(const sim::Engine& engine, const std::string& scenario_name,
             const std::vector<SessionSpec>& sessions, const SentLog& sent);

struct IncomparableReports : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CompareRow {
  std::string key;
  double a{0};
  double b{0};
  double delta{0};

  bool operator==(const CompareRow&) const = default;
};

// Numeric leaf lookup by dotted path: "global.core_msgs",
// "sessions.S1.MN1.interruption_ticks", "nodes.MN2.map_requests",
// "net.core.sent", "run.event_count".
std::optional<double> lookup_metric(const Report& report, const std::string& key);

std::vector<std::string> default_compare_keys(const Report& report);

// Same-shape check (scenario name, session set), then per-key rows with
// delta = b - a. Unknown key → IncomparableReports naming it.
std::vector<CompareRow> compare_runs(const Report& a, const Report& b,
                                     const std::vector<std::string>& keys);

} // namespace netinf::report
