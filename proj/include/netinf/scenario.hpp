#pragma once

#include "netinf/report.hpp"
#include "netinf/sim.hpp"

namespace netinf::scenario {

// Position-carrying syntax/semantic error. Columns are 1-based; `expected`
// says what would have been accepted, naming undeclared references.
struct ParseError : std::runtime_error {
  int line;
  int column;
  std::string expected;

  ParseError(int line_no, int column_no, std::string expected_text);
};

struct LinkDecl {
  std::string a;
  std::string b;
  Tick latency{1};
  double loss{0.0};

  bool operator==(const LinkDecl&) const = default;
};

struct NodeDecl {
  std::string label;
  EdgeNetworkId home;
  bool vnl{false};

  bool operator==(const NodeDecl&) const = default;
};

struct SessionDecl {
  std::string sid;
  std::string a;
  std::string b;

  bool operator==(const SessionDecl&) const = default;
};

struct MoveAction {
  std::string label;
  EdgeNetworkId dest;
  Tick travel{1};
  bool delegate{false};
  bool expect_peer{false};

  bool operator==(const MoveAction&) const = default;
};

struct SendAction {
  std::string label;
  std::string sid;
  std::size_t bytes{0};

  bool operator==(const SendAction&) const = default;
};

struct SetAction {
  std::string key;
  Tick value{0};

  bool operator==(const SetAction&) const = default;
};

struct Action {
  Tick at{0};
  std::variant<MoveAction, SendAction, SetAction> op;

  bool operator==(const Action&) const = default;
};

struct Scenario {
  std::string name;
  std::vector<EdgeNetworkId> ens;
  std::vector<LinkDecl> links;
  std::vector<NodeDecl> nodes;
  std::vector<SessionDecl> sessions;
  std::vector<Action> actions;

  std::optional<Tick> cache_ttl;
  std::optional<Tick> lookup_ttl;
  std::optional<Tick> resume_timeout;
  std::optional<std::size_t> mtu;
  std::optional<std::uint64_t> seed;
  std::optional<Tick> until;
  std::optional<UpdatePolicy> update_policy;

  bool operator==(const Scenario&) const = default;
};

// Parse scenario text; throws ParseError on the first syntactic or semantic
// problem. parse(render(s)) == s for every valid scenario.
Scenario parse(const std::string& text);
std::string render(const Scenario& scenario);

// Overrides applied on top of the scenario's params section.
// Seed precedence: explicit > scenario > environment > built-in default.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> env_seed;
  std::optional<UpdatePolicy> policy;
  std::optional<Tick> until;
};

std::uint64_t effective_seed(const Scenario& scenario, const RunOptions& options,
                             std::uint64_t fallback);

struct RunResult {
  report::Report report;
  std::vector<std::string> trace_lines;
  // (node label, sid) -> payloads handed up in order at that endpoint.
  std::map<std::pair<std::string, std::string>, std::vector<std::vector<std::uint8_t>>>
      delivered;

  std::string trace_text() const;
};

RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

} // namespace netinf::scenario
