#include "netinf/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace netinf::scenario {
namespace {

std::string error_text(int line, int column, const std::string& expected) {
  return "scenario error at line " + std::to_string(line) + ", column " +
         std::to_string(column) + ": expected " + expected;
}

struct Token {
  std::string text;
  int column{1};
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t') {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '#') ++i;
    tokens.push_back(Token{line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return tokens;
}

bool is_name(const std::string& text) {
  if (text.empty()) return false;
  for (char c : text) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

// Reads one statement line; keeps the cursor bookkeeping in one place.
class Line {
 public:
  Line(int number, std::vector<Token> tokens) : number_(number), tokens_(std::move(tokens)) {}

  bool done() const { return next_ >= tokens_.size(); }
  int number() const { return number_; }

  int column_here() const {
    if (done()) return tokens_.empty() ? 1 : tokens_.back().column +
                                             static_cast<int>(tokens_.back().text.size());
    return tokens_[next_].column;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(number_, column_here(), expected);
  }

  const Token& peek() const {
    if (done()) fail("another token");
    return tokens_[next_];
  }

  Token take(const std::string& expected) {
    if (done()) fail(expected);
    return tokens_[next_++];
  }

  std::string take_name(const std::string& what) {
    Token token = take(what);
    if (!is_name(token.text)) {
      throw ParseError(number_, token.column, what + ", got '" + token.text + "'");
    }
    return token.text;
  }

  void take_literal(const std::string& literal) {
    Token token = take("'" + literal + "'");
    if (token.text != literal) {
      throw ParseError(number_, token.column, "'" + literal + "', got '" + token.text + "'");
    }
  }

  std::int64_t take_int(const std::string& what, std::int64_t min_value) {
    Token token = take(what);
    std::int64_t value = 0;
    std::size_t used = 0;
    try {
      value = std::stoll(token.text, &used);
    } catch (const std::exception&) {
      throw ParseError(number_, token.column, what + " (an integer), got '" + token.text + "'");
    }
    if (used != token.text.size()) {
      throw ParseError(number_, token.column, what + " (an integer), got '" + token.text + "'");
    }
    if (value < min_value) {
      throw ParseError(number_, token.column,
                       what + " of at least " + std::to_string(min_value));
    }
    return value;
  }

  // name=value pair; returns (name, raw value, value column).
  std::tuple<std::string, std::string, int> take_kv(const std::string& what) {
    Token token = take(what);
    auto eq = token.text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= token.text.size()) {
      throw ParseError(number_, token.column, what + " as key=value, got '" + token.text + "'");
    }
    return {token.text.substr(0, eq), token.text.substr(eq + 1),
            token.column + static_cast<int>(eq) + 1};
  }

  void expect_end() const {
    if (!done()) {
      throw ParseError(number_, tokens_[next_].column,
                       "end of line, got '" + tokens_[next_].text + "'");
    }
  }

 private:
  int number_;
  std::vector<Token> tokens_;
  std::size_t next_{0};
};

std::int64_t parse_int_value(const Line& line, int column, const std::string& raw,
                             const std::string& what, std::int64_t min_value) {
  std::int64_t value = 0;
  std::size_t used = 0;
  try {
    value = std::stoll(raw, &used);
  } catch (const std::exception&) {
    throw ParseError(line.number(), column, what + " (an integer), got '" + raw + "'");
  }
  if (used != raw.size()) {
    throw ParseError(line.number(), column, what + " (an integer), got '" + raw + "'");
  }
  if (value < min_value) {
    throw ParseError(line.number(), column, what + " of at least " + std::to_string(min_value));
  }
  return value;
}

double parse_loss_value(const Line& line, int column, const std::string& raw) {
  double value = 0.0;
  std::size_t used = 0;
  try {
    value = std::stod(raw, &used);
  } catch (const std::exception&) {
    throw ParseError(line.number(), column, "loss (a number), got '" + raw + "'");
  }
  if (used != raw.size()) {
    throw ParseError(line.number(), column, "loss (a number), got '" + raw + "'");
  }
  if (value < 0.0 || value >= 1.0) {
    throw ParseError(line.number(), column, "loss in [0,1)");
  }
  return value;
}

std::string render_loss(double loss) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", loss);
  return buffer;
}

enum class Section { Scenario, Topology, Nodes, Sessions, Actions, Params };

std::optional<Section> section_of(const std::string& word) {
  if (word == "topology") return Section::Topology;
  if (word == "nodes") return Section::Nodes;
  if (word == "sessions") return Section::Sessions;
  if (word == "actions") return Section::Actions;
  if (word == "params") return Section::Params;
  return std::nullopt;
}

} // namespace

ParseError::ParseError(int line_no, int column_no, std::string expected_text)
    : std::runtime_error(error_text(line_no, column_no, expected_text)),
      line(line_no),
      column(column_no),
      expected(std::move(expected_text)) {}

Scenario parse(const std::string& text) {
  Scenario scenario;
  std::set<std::string> ens;
  std::set<std::pair<std::string, std::string>> links_seen;
  std::set<std::string> node_labels;
  std::map<std::string, SessionDecl> sessions_by_id;
  std::map<std::string, Tick> transit_end; // label -> latest scheduled arrival
  std::set<std::string> params_seen;
  bool have_name = false;
  Section current = Section::Scenario;

  std::istringstream stream(text);
  std::string raw_line;
  int line_no = 0;
  while (std::getline(stream, raw_line)) {
    ++line_no;
    auto tokens = tokenize(raw_line);
    if (tokens.empty()) continue;
    Line line(line_no, std::move(tokens));

    const std::string& head = line.peek().text;
    if (!have_name) {
      line.take_literal("scenario");
      scenario.name = line.take_name("a scenario name");
      line.expect_end();
      have_name = true;
      continue;
    }

    if (auto section = section_of(head)) {
      if (static_cast<int>(*section) <= static_cast<int>(current)) {
        line.fail("a later section (order is topology, nodes, sessions, actions, params)");
      }
      current = *section;
      line.take(head);
      line.expect_end();
      continue;
    }

    switch (current) {
      case Section::Scenario:
        line.fail("a section header ('topology')");
        break;
      case Section::Topology: {
        if (head == "en") {
          line.take_literal("en");
          Token name = line.peek();
          std::string en = line.take_name("an edge network name");
          if (en == "core") throw ParseError(line_no, name.column, "a name other than 'core'");
          if (!ens.insert(en).second) {
            throw ParseError(line_no, name.column,
                             "a new edge network; '" + en + "' is already declared");
          }
          scenario.ens.push_back(en);
          line.expect_end();
        } else if (head == "link") {
          line.take_literal("link");
          Token ta = line.peek();
          std::string a = line.take_name("a link endpoint");
          if (a != "core" && ens.count(a) == 0) {
            throw ParseError(line_no, ta.column,
                             "a declared edge network or 'core'; '" + a + "' is not declared");
          }
          Token tb = line.peek();
          std::string b = line.take_name("a link endpoint");
          if (b != "core" && ens.count(b) == 0) {
            throw ParseError(line_no, tb.column,
                             "a declared edge network or 'core'; '" + b + "' is not declared");
          }
          if (a == b) throw ParseError(line_no, tb.column, "two distinct link endpoints");
          auto key = a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
          if (!links_seen.insert(key).second) {
            throw ParseError(line_no, ta.column, "a new link; this pair is already declared");
          }
          LinkDecl link{a, b, 1, 0.0};
          auto [k1, v1, c1] = line.take_kv("latency=<ticks>");
          if (k1 != "latency") {
            throw ParseError(line_no, c1 - static_cast<int>(k1.size()) - 1, "'latency=<ticks>'");
          }
          link.latency = parse_int_value(line, c1, v1, "latency", 1);
          if (!line.done()) {
            auto [k2, v2, c2] = line.take_kv("loss=<probability>");
            if (k2 != "loss") {
              throw ParseError(line_no, c2 - static_cast<int>(k2.size()) - 1,
                               "'loss=<probability>'");
            }
            link.loss = parse_loss_value(line, c2, v2);
          }
          line.expect_end();
          scenario.links.push_back(std::move(link));
        } else {
          line.fail("'en', 'link', or a section header");
        }
        break;
      }
      case Section::Nodes: {
        if (head != "node") line.fail("'node' or a section header");
        line.take_literal("node");
        Token tlabel = line.peek();
        std::string label = line.take_name("a node label");
        if (!node_labels.insert(label).second) {
          throw ParseError(line_no, tlabel.column,
                           "a new node label; '" + label + "' is already declared");
        }
        auto [hk, hv, hc] = line.take_kv("home=<edge network>");
        if (hk != "home") {
          throw ParseError(line_no, hc - static_cast<int>(hk.size()) - 1,
                           "'home=<edge network>'");
        }
        if (ens.count(hv) == 0) {
          throw ParseError(line_no, hc,
                           "a declared edge network; '" + hv + "' is not declared");
        }
        auto [vk, vv, vc] = line.take_kv("vnl=<yes|no>");
        if (vk != "vnl") {
          throw ParseError(line_no, vc - static_cast<int>(vk.size()) - 1, "'vnl=<yes|no>'");
        }
        if (vv != "yes" && vv != "no") throw ParseError(line_no, vc, "'yes' or 'no'");
        line.expect_end();
        scenario.nodes.push_back(NodeDecl{label, hv, vv == "yes"});
        break;
      }
      case Section::Sessions: {
        if (head != "session") line.fail("'session' or a section header");
        line.take_literal("session");
        Token tsid = line.peek();
        std::string sid = line.take_name("a session id");
        if (sessions_by_id.count(sid) != 0) {
          throw ParseError(line_no, tsid.column,
                           "a new session id; '" + sid + "' is already declared");
        }
        Token ta = line.peek();
        std::string a = line.take_name("a node label");
        if (node_labels.count(a) == 0) {
          throw ParseError(line_no, ta.column,
                           "a declared node; '" + a + "' is not declared");
        }
        Token tb = line.peek();
        std::string b = line.take_name("a node label");
        if (node_labels.count(b) == 0) {
          throw ParseError(line_no, tb.column,
                           "a declared node; '" + b + "' is not declared");
        }
        if (a == b) throw ParseError(line_no, tb.column, "two distinct session endpoints");
        line.expect_end();
        SessionDecl decl{sid, a, b};
        sessions_by_id.emplace(sid, decl);
        scenario.sessions.push_back(std::move(decl));
        break;
      }
      case Section::Actions: {
        if (head != "at") line.fail("'at' or a section header");
        line.take_literal("at");
        Tick at = line.take_int("an action tick", 1);
        Token verb = line.take("'move', 'send', or 'set'");
        if (verb.text == "move") {
          Token tlabel = line.peek();
          std::string label = line.take_name("a node label");
          if (node_labels.count(label) == 0) {
            throw ParseError(line_no, tlabel.column,
                             "a declared node; '" + label + "' is not declared");
          }
          line.take_literal("->");
          Token tdest = line.peek();
          std::string dest = line.take_name("an edge network name");
          if (ens.count(dest) == 0) {
            throw ParseError(line_no, tdest.column,
                             "a declared edge network; '" + dest + "' is not declared");
          }
          auto [tk, tv, tc] = line.take_kv("travel=<ticks>");
          if (tk != "travel") {
            throw ParseError(line_no, tc - static_cast<int>(tk.size()) - 1, "'travel=<ticks>'");
          }
          Tick travel = parse_int_value(line, tc, tv, "travel", 1);
          MoveAction move{label, dest, travel, false, false};
          while (!line.done()) {
            Token flag = line.take("'delegate' or 'expect-peer'");
            if (flag.text == "delegate" && !move.delegate) {
              move.delegate = true;
            } else if (flag.text == "expect-peer" && !move.expect_peer) {
              move.expect_peer = true;
            } else {
              throw ParseError(line_no, flag.column, "'delegate' or 'expect-peer' (once each)");
            }
          }
          auto pending = transit_end.find(label);
          if (pending != transit_end.end() && at < pending->second) {
            throw ParseError(line_no, 1,
                             "a move for '" + label + "' no earlier than tick " +
                                 std::to_string(pending->second) +
                                 " (the previous move is still in transit)");
          }
          transit_end[label] = at + travel;
          scenario.actions.push_back(Action{at, std::move(move)});
        } else if (verb.text == "send") {
          Token tlabel = line.peek();
          std::string label = line.take_name("a node label");
          if (node_labels.count(label) == 0) {
            throw ParseError(line_no, tlabel.column,
                             "a declared node; '" + label + "' is not declared");
          }
          Token tsid = line.peek();
          std::string sid = line.take_name("a session id");
          auto session = sessions_by_id.find(sid);
          if (session == sessions_by_id.end()) {
            throw ParseError(line_no, tsid.column,
                             "a declared session; '" + sid + "' is not declared");
          }
          if (session->second.a != label && session->second.b != label) {
            throw ParseError(line_no, tlabel.column,
                             "an endpoint of session '" + sid + "'; '" + label +
                                 "' is not one");
          }
          auto [bk, bv, bc] = line.take_kv("bytes=<count>");
          if (bk != "bytes") {
            throw ParseError(line_no, bc - static_cast<int>(bk.size()) - 1, "'bytes=<count>'");
          }
          std::size_t bytes =
              static_cast<std::size_t>(parse_int_value(line, bc, bv, "bytes", 1));
          line.expect_end();
          scenario.actions.push_back(Action{at, SendAction{label, sid, bytes}});
        } else if (verb.text == "set") {
          auto [sk, sv, sc] = line.take_kv("<param>=<value>");
          if (sk != "cache_ttl" && sk != "lookup_ttl" && sk != "resume_timeout" &&
              sk != "mtu") {
            throw ParseError(line_no, sc - static_cast<int>(sk.size()) - 1,
                             "one of cache_ttl, lookup_ttl, resume_timeout, mtu");
          }
          Tick value = parse_int_value(line, sc, sv, sk, 1);
          line.expect_end();
          scenario.actions.push_back(Action{at, SetAction{sk, value}});
        } else {
          throw ParseError(line_no, verb.column,
                           "'move', 'send', or 'set', got '" + verb.text + "'");
        }
        break;
      }
      case Section::Params: {
        auto [key, value, vcol] = line.take_kv("<param>=<value>");
        line.expect_end();
        int kcol = vcol - static_cast<int>(key.size()) - 1;
        if (!params_seen.insert(key).second) {
          throw ParseError(line_no, kcol, "each param at most once; '" + key + "' repeats");
        }
        if (key == "cache_ttl") {
          scenario.cache_ttl = parse_int_value(line, vcol, value, key, 1);
        } else if (key == "lookup_ttl") {
          scenario.lookup_ttl = parse_int_value(line, vcol, value, key, 1);
        } else if (key == "resume_timeout") {
          scenario.resume_timeout = parse_int_value(line, vcol, value, key, 1);
        } else if (key == "mtu") {
          scenario.mtu = static_cast<std::size_t>(parse_int_value(line, vcol, value, key, 1));
        } else if (key == "seed") {
          scenario.seed =
              static_cast<std::uint64_t>(parse_int_value(line, vcol, value, key, 0));
        } else if (key == "until") {
          scenario.until = parse_int_value(line, vcol, value, key, 1);
        } else if (key == "update_policy") {
          if (value == "lazy") {
            scenario.update_policy = UpdatePolicy::Lazy;
          } else if (value == "eager") {
            scenario.update_policy = UpdatePolicy::Eager;
          } else {
            throw ParseError(line_no, vcol, "'lazy' or 'eager'");
          }
        } else {
          throw ParseError(line_no, kcol,
                           "one of cache_ttl, lookup_ttl, resume_timeout, mtu, seed, until, "
                           "update_policy; '" +
                               key + "' is not a parameter");
        }
        break;
      }
    }
  }
  if (!have_name) throw ParseError(1, 1, "a 'scenario <name>' line");
  if (scenario.ens.empty()) throw ParseError(line_no, 1, "at least one edge network");
  if (scenario.nodes.empty()) throw ParseError(line_no, 1, "at least one node");
  return scenario;
}

std::string render(const Scenario& scenario) {
  std::ostringstream out;
  out << "scenario " << scenario.name << "\n";
  out << "topology\n";
  for (const auto& en : scenario.ens) out << "  en " << en << "\n";
  for (const auto& link : scenario.links) {
    out << "  link " << link.a << ' ' << link.b << " latency=" << link.latency;
    if (link.loss > 0.0) out << " loss=" << render_loss(link.loss);
    out << "\n";
  }
  out << "nodes\n";
  for (const auto& node : scenario.nodes) {
    out << "  node " << node.label << " home=" << node.home << " vnl="
        << (node.vnl ? "yes" : "no") << "\n";
  }
  if (!scenario.sessions.empty()) {
    out << "sessions\n";
    for (const auto& session : scenario.sessions) {
      out << "  session " << session.sid << ' ' << session.a << ' ' << session.b << "\n";
    }
  }
  if (!scenario.actions.empty()) {
    out << "actions\n";
    for (const auto& action : scenario.actions) {
      out << "  at " << action.at << ' ';
      std::visit(
          [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, MoveAction>) {
              out << "move " << op.label << " -> " << op.dest << " travel=" << op.travel;
              if (op.delegate) out << " delegate";
              if (op.expect_peer) out << " expect-peer";
            } else if constexpr (std::is_same_v<T, SendAction>) {
              out << "send " << op.label << ' ' << op.sid << " bytes=" << op.bytes;
            } else {
              out << "set " << op.key << '=' << op.value;
            }
          },
          action.op);
      out << "\n";
    }
  }
  bool any_param = scenario.cache_ttl || scenario.lookup_ttl || scenario.resume_timeout ||
                   scenario.mtu || scenario.seed || scenario.until || scenario.update_policy;
  if (any_param) {
    out << "params\n";
    if (scenario.cache_ttl) out << "  cache_ttl=" << *scenario.cache_ttl << "\n";
    if (scenario.lookup_ttl) out << "  lookup_ttl=" << *scenario.lookup_ttl << "\n";
    if (scenario.resume_timeout) out << "  resume_timeout=" << *scenario.resume_timeout << "\n";
    if (scenario.mtu) out << "  mtu=" << *scenario.mtu << "\n";
    if (scenario.seed) out << "  seed=" << *scenario.seed << "\n";
    if (scenario.until) out << "  until=" << *scenario.until << "\n";
    if (scenario.update_policy) {
      out << "  update_policy="
          << (*scenario.update_policy == UpdatePolicy::Eager ? "eager" : "lazy") << "\n";
    }
  }
  return out.str();
}

std::uint64_t effective_seed(const Scenario& scenario, const RunOptions& options,
                             std::uint64_t fallback) {
  if (options.seed) return *options.seed;
  if (scenario.seed) return *scenario.seed;
  if (options.env_seed) return *options.env_seed;
  return fallback;
}

std::string RunResult::trace_text() const {
  std::string out;
  for (const auto& line : trace_lines) {
    out += line;
    out += '\n';
  }
  return out;
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  Params params;
  if (scenario.cache_ttl) params.cache_ttl = *scenario.cache_ttl;
  if (scenario.lookup_ttl) params.lookup_ttl = *scenario.lookup_ttl;
  if (scenario.resume_timeout) params.resume_timeout = *scenario.resume_timeout;
  if (scenario.mtu) params.mtu = *scenario.mtu;
  if (options.policy) {
    params.update_policy = *options.policy;
  } else if (scenario.update_policy) {
    params.update_policy = *scenario.update_policy;
  }
  std::uint64_t seed = effective_seed(scenario, options, params.seed_default);

  Tick until;
  if (options.until) {
    until = *options.until;
  } else if (scenario.until) {
    until = *scenario.until;
  } else {
    Tick last = 0;
    for (const auto& action : scenario.actions) last = std::max(last, action.at);
    until = last + 1000;
  }

  sim::Engine engine(params, seed);
  for (const auto& en : scenario.ens) engine.add_edge_network(en);
  for (const auto& link : scenario.links) {
    engine.set_link(link.a, link.b, link.latency, link.loss);
  }
  for (const auto& node : scenario.nodes) {
    engine.add_node(node.label, node.home, node.vnl);
  }
  for (const auto& session : scenario.sessions) {
    engine.add_session(session.sid, session.a, session.b);
  }

  report::SentLog sent;
  engine.set_action_handler([&](std::size_t index, Tick) {
    const Action& action = scenario.actions.at(index);
    std::visit(
        [&](const auto& op) {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, MoveAction>) {
            engine.start_move(op.label, op.dest, op.travel, op.delegate, op.expect_peer);
          } else if constexpr (std::is_same_v<T, SendAction>) {
            auto& log = sent[{op.label, op.sid}];
            log.push_back(sim::make_payload(op.sid, log.size(), op.bytes));
            engine.send_payload(op.label, op.sid, op.bytes);
          } else {
            engine.set_param(op.key, op.value);
          }
        },
        action.op);
  });
  for (std::size_t i = 0; i < scenario.actions.size(); ++i) {
    engine.schedule_action(scenario.actions[i].at, i);
  }
  engine.run(until);

  std::vector<report::SessionSpec> specs;
  for (const auto& session : scenario.sessions) {
    specs.push_back(report::SessionSpec{session.sid, session.a, session.b});
  }
  RunResult result;
  result.report = report::build(engine, scenario.name, specs, sent);
  result.trace_lines = engine.trace().lines();
  for (const auto& session : scenario.sessions) {
    for (const std::string& label : {session.a, session.b}) {
      const auto& sessions = engine.node_state(label).sessions;
      auto it = sessions.find(session.sid);
      if (it != sessions.end()) {
        result.delivered[{label, session.sid}] = it->second.delivered;
      }
    }
  }
  return result;
}

} // namespace netinf::scenario
