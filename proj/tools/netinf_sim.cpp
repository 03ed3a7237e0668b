#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "netinf/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitScenarioError = 1;
constexpr int kExitRuntimeAbort = 2;
constexpr int kExitBudgetRegression = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("NETINF_SIM_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  std::size_t used = 0;
  std::uint64_t value = std::stoull(raw, &used);
  if (used != std::string(raw).size()) {
    throw std::runtime_error("NETINF_SIM_SEED is not an integer: " + std::string(raw));
  }
  return value;
}

struct Budget {
  std::string key;
  double limit{0};
};

std::vector<Budget> parse_budgets(const std::vector<std::string>& raw) {
  std::vector<Budget> budgets;
  for (const auto& text : raw) {
    auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= text.size()) {
      throw std::runtime_error("budget must be key=value, got '" + text + "'");
    }
    budgets.push_back(Budget{text.substr(0, eq), std::stod(text.substr(eq + 1))});
  }
  return budgets;
}

// Returns the exit code budgets imply: 0 or kExitBudgetRegression.
int check_budgets(const netinf::report::Report& report, const std::vector<Budget>& budgets,
                  std::ostream& out) {
  int code = kExitOk;
  for (const auto& budget : budgets) {
    auto value = netinf::report::lookup_metric(report, budget.key);
    if (!value) throw std::runtime_error("unknown budget key '" + budget.key + "'");
    if (*value > budget.limit) {
      out << "budget regression: " << budget.key << "=" << *value << " exceeds "
          << budget.limit << "\n";
      code = kExitBudgetRegression;
    }
  }
  return code;
}

netinf::UpdatePolicy policy_from(const std::string& word) {
  if (word == "lazy") return netinf::UpdatePolicy::Lazy;
  if (word == "eager") return netinf::UpdatePolicy::Eager;
  throw std::runtime_error("update policy must be 'lazy' or 'eager'");
}

struct SweepRange {
  std::uint64_t first{1};
  std::uint64_t last{1};
};

SweepRange parse_seed_range(const std::string& text) {
  auto dots = text.find("..");
  SweepRange range;
  if (dots == std::string::npos) {
    range.first = range.last = std::stoull(text);
    return range;
  }
  range.first = std::stoull(text.substr(0, dots));
  range.last = std::stoull(text.substr(dots + 2));
  if (range.last < range.first) throw std::runtime_error("seed range must be ascending");
  return range;
}

int cmd_run(const std::string& path, const std::optional<std::uint64_t>& seed,
            const std::optional<netinf::Tick>& until, const std::optional<std::string>& policy,
            const std::string& trace_path, const std::string& report_path,
            const std::vector<std::string>& budget_args, bool quiet) {
  netinf::scenario::Scenario scenario;
  try {
    scenario = netinf::scenario::parse(read_file(path));
  } catch (const std::exception& error) {
    std::cerr << error.what() << "\n";
    return kExitScenarioError;
  }

  netinf::scenario::RunOptions options;
  options.seed = seed;
  options.until = until;
  try {
    options.env_seed = env_seed();
    if (policy) options.policy = policy_from(*policy);
  } catch (const std::exception& error) {
    std::cerr << error.what() << "\n";
    return kExitScenarioError;
  }

  netinf::scenario::RunResult result;
  try {
    result = netinf::scenario::run_scenario(scenario, options);
  } catch (const std::exception& error) {
    std::cerr << "run aborted: " << error.what() << "\n";
    return kExitRuntimeAbort;
  }

  std::string report_text = netinf::report::to_json_text(result.report);
  try {
    if (!trace_path.empty()) {
      if (trace_path == "-") {
        std::cout << result.trace_text();
      } else {
        write_file(trace_path, result.trace_text());
      }
    }
    if (!report_path.empty() && report_path != "-") {
      write_file(report_path, report_text);
    } else if (!quiet) {
      std::cout << report_text;
    }
    return check_budgets(result.report, parse_budgets(budget_args), std::cerr);
  } catch (const std::exception& error) {
    std::cerr << error.what() << "\n";
    return kExitScenarioError;
  }
}

int cmd_validate(const std::string& path) {
  try {
    netinf::scenario::Scenario scenario = netinf::scenario::parse(read_file(path));
    std::cout << "ok: " << scenario.name << " (" << scenario.ens.size() << " edge networks, "
              << scenario.nodes.size() << " nodes, " << scenario.sessions.size()
              << " sessions, " << scenario.actions.size() << " actions)\n";
    return kExitOk;
  } catch (const std::exception& error) {
    std::cerr << error.what() << "\n";
    return kExitScenarioError;
  }
}

int cmd_sweep(const std::string& path, const std::string& seeds,
              const std::optional<std::string>& policy, unsigned parallel) {
  netinf::scenario::Scenario scenario;
  SweepRange range;
  netinf::scenario::RunOptions base;
  try {
    scenario = netinf::scenario::parse(read_file(path));
    range = parse_seed_range(seeds);
    base.env_seed = env_seed();
    if (policy) base.policy = policy_from(*policy);
  } catch (const std::exception& error) {
    std::cerr << error.what() << "\n";
    return kExitScenarioError;
  }

  if (parallel == 0) parallel = 1;
  std::vector<std::uint64_t> all_seeds;
  for (std::uint64_t s = range.first; s <= range.last; ++s) all_seeds.push_back(s);

  struct Row {
    std::uint64_t seed;
    netinf::report::Report report;
  };
  std::vector<Row> rows(all_seeds.size());
  std::string failure;

  for (std::size_t start = 0; start < all_seeds.size(); start += parallel) {
    std::size_t stop = std::min(start + parallel, all_seeds.size());
    std::vector<std::future<Row>> batch;
    for (std::size_t i = start; i < stop; ++i) {
      std::uint64_t s = all_seeds[i];
      batch.push_back(std::async(std::launch::async, [&, s]() {
        netinf::scenario::RunOptions options = base;
        options.seed = s;
        return Row{s, netinf::scenario::run_scenario(scenario, options).report};
      }));
    }
    for (std::size_t i = start; i < stop; ++i) {
      try {
        rows[i] = batch[i - start].get();
      } catch (const std::exception& error) {
        failure = error.what();
      }
    }
  }
  if (!failure.empty()) {
    std::cerr << "run aborted: " << failure << "\n";
    return kExitRuntimeAbort;
  }

  std::cout << "seed\tcore_msgs\tedge_msgs\tdata_msgs\tmap_requests\tcache_hits\t"
               "delegations\tevents\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    std::cout << row.seed << '\t' << r.core_msgs << '\t' << r.edge_msgs << '\t' << r.data_msgs
              << '\t' << r.map_requests << '\t' << r.cache_hits << '\t' << r.delegations
              << '\t' << r.event_count << "\n";
  }
  return kExitOk;
}

int cmd_compare(const std::string& path_a, const std::string& path_b, const std::string& keys,
                const std::vector<std::string>& budget_args) {
  try {
    auto report_a = netinf::report::from_json(
        netinf::report::ordered_json::parse(read_file(path_a)));
    auto report_b = netinf::report::from_json(
        netinf::report::ordered_json::parse(read_file(path_b)));

    std::vector<std::string> key_list;
    std::istringstream stream(keys);
    std::string key;
    while (std::getline(stream, key, ',')) {
      if (!key.empty()) key_list.push_back(key);
    }

    auto rows = netinf::report::compare_runs(report_a, report_b, key_list);
    std::cout << "key\ta\tb\tdelta\n";
    for (const auto& row : rows) {
      std::cout << row.key << '\t' << row.a << '\t' << row.b << '\t' << row.delta << "\n";
    }
    return check_budgets(report_b, parse_budgets(budget_args), std::cerr);
  } catch (const std::exception& error) {
    std::cerr << error.what() << "\n";
    return kExitScenarioError;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"edge-registered mobility simulator: run scenarios, inspect signaling costs"};
  app.require_subcommand(1);

  std::string path;
  std::optional<std::uint64_t> seed;
  std::optional<netinf::Tick> until;
  std::optional<std::string> policy;
  std::string trace_path;
  std::string report_path;
  std::vector<std::string> budgets;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "run a scenario and emit its report");
  run->add_option("file", path, "scenario file")->required();
  run->add_option("--seed", seed, "seed override (highest precedence)");
  run->add_option("--until", until, "run horizon in ticks");
  run->add_option("--update-policy", policy, "lazy|eager")
      ->check(CLI::IsMember({"lazy", "eager"}));
  run->add_option("--trace", trace_path, "write the trace here ('-' for stdout)");
  run->add_option("--report", report_path, "write the report here instead of stdout");
  run->add_option("--budget", budgets, "fail with exit 3 if metric exceeds value (key=N)");
  run->add_flag("--quiet", quiet, "suppress the report on stdout");

  CLI::App* validate = app.add_subcommand("validate", "parse and check a scenario");
  validate->add_option("file", path, "scenario file")->required();

  std::string seeds = "1..5";
  unsigned parallel = 4;
  CLI::App* sweep = app.add_subcommand("sweep", "run one scenario across a seed range");
  sweep->add_option("file", path, "scenario file")->required();
  sweep->add_option("--seeds", seeds, "seed range A..B (default 1..5)");
  sweep->add_option("--parallel", parallel, "concurrent runs (default 4)");
  sweep->add_option("--update-policy", policy, "lazy|eager")
      ->check(CLI::IsMember({"lazy", "eager"}));

  std::string path_b;
  std::string keys;
  CLI::App* compare = app.add_subcommand("compare", "diff two report files");
  compare->add_option("a", path, "first report (json)")->required();
  compare->add_option("b", path_b, "second report (json)")->required();
  compare->add_option("--keys", keys, "comma-separated metric keys (default: a standard set)");
  compare->add_option("--budget", budgets,
                      "fail with exit 3 if metric in report b exceeds value (key=N)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return cmd_run(path, seed, until, policy, trace_path, report_path, budgets, quiet);
  }
  if (validate->parsed()) return cmd_validate(path);
  if (sweep->parsed()) return cmd_sweep(path, seeds, policy, parallel);
  return cmd_compare(path, path_b, keys, budgets);
}
