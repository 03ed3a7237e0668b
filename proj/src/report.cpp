#include "netinf/report.hpp"

#include <algorithm>
#include <sstream>

namespace netinf::report {
namespace {

ordered_json class_json(const ClassReport& cls) {
  return ordered_json{{"sent", cls.sent},
                      {"delivered", cls.delivered},
                      {"dropped", cls.dropped},
                      {"stranded", cls.stranded},
                      {"in_flight", cls.in_flight}};
}

ClassReport class_from(const ordered_json& doc) {
  ClassReport cls;
  cls.sent = doc.at("sent").get<std::uint64_t>();
  cls.delivered = doc.at("delivered").get<std::uint64_t>();
  cls.dropped = doc.at("dropped").get<std::uint64_t>();
  cls.stranded = doc.at("stranded").get<std::uint64_t>();
  cls.in_flight = doc.at("in_flight").get<std::uint64_t>();
  return cls;
}

ClassReport class_from_metrics(const sim::ClassCounters& counters) {
  return ClassReport{counters.sent, counters.delivered, counters.dropped, counters.stranded,
                     counters.in_flight};
}

const ClassReport* class_of(const Report& report, const std::string& word) {
  if (word == "edge") return &report.edge;
  if (word == "core") return &report.core;
  if (word == "data") return &report.data;
  return nullptr;
}

} // namespace

ordered_json to_json(const Report& report) {
  ordered_json doc;
  doc["report_version"] = report.report_version;
  doc["run"] = ordered_json{{"scenario", report.scenario},
                            {"seed", report.seed},
                            {"ticks", report.ticks},
                            {"event_count", report.event_count},
                            {"update_policy", report.update_policy}};
  doc["global"] = ordered_json{{"core_msgs", report.core_msgs},
                               {"edge_msgs", report.edge_msgs},
                               {"data_msgs", report.data_msgs},
                               {"lcs_counter", report.lcs_counter},
                               {"cache_hits", report.cache_hits},
                               {"cache_misses", report.cache_misses},
                               {"rendezvous_successes", report.rendezvous_successes},
                               {"rendezvous_timeouts", report.rendezvous_timeouts},
                               {"delegations", report.delegations},
                               {"delegate_losses", report.delegate_losses},
                               {"map_requests", report.map_requests},
                               {"map_replies", report.map_replies}};
  doc["net"] = ordered_json{{"edge", class_json(report.edge)},
                            {"core", class_json(report.core)},
                            {"data", class_json(report.data)}};
  doc["sessions"] = ordered_json::array();
  for (const auto& session : report.sessions) {
    doc["sessions"].push_back(ordered_json{{"sid", session.sid},
                                           {"node", session.node},
                                           {"peer", session.peer},
                                           {"state", session.state},
                                           {"interruption_ticks", session.interruption_ticks},
                                           {"payloads_delivered", session.payloads_delivered},
                                           {"in_order", session.in_order}});
  }
  doc["nodes"] = ordered_json::array();
  for (const auto& node : report.nodes) {
    doc["nodes"].push_back(ordered_json{{"label", node.label},
                                        {"id", node.id},
                                        {"edge_sent", node.edge_sent},
                                        {"core_sent", node.core_sent},
                                        {"data_sent", node.data_sent},
                                        {"map_requests", node.map_requests},
                                        {"delegations", node.delegations},
                                        {"delegate_losses", node.delegate_losses}});
  }
  return doc;
}

Report from_json(const ordered_json& doc) {
  Report report;
  report.report_version = doc.at("report_version").get<int>();
  if (report.report_version != 1) {
    throw IncomparableReports("unsupported report_version " +
                              std::to_string(report.report_version));
  }
  const auto& run = doc.at("run");
  report.scenario = run.at("scenario").get<std::string>();
  report.seed = run.at("seed").get<std::uint64_t>();
  report.ticks = run.at("ticks").get<Tick>();
  report.event_count = run.at("event_count").get<std::uint64_t>();
  report.update_policy = run.at("update_policy").get<std::string>();
  const auto& global = doc.at("global");
  report.core_msgs = global.at("core_msgs").get<std::uint64_t>();
  report.edge_msgs = global.at("edge_msgs").get<std::uint64_t>();
  report.data_msgs = global.at("data_msgs").get<std::uint64_t>();
  report.lcs_counter = global.at("lcs_counter").get<std::uint64_t>();
  report.cache_hits = global.at("cache_hits").get<std::uint64_t>();
  report.cache_misses = global.at("cache_misses").get<std::uint64_t>();
  report.rendezvous_successes = global.at("rendezvous_successes").get<std::uint64_t>();
  report.rendezvous_timeouts = global.at("rendezvous_timeouts").get<std::uint64_t>();
  report.delegations = global.at("delegations").get<std::uint64_t>();
  report.delegate_losses = global.at("delegate_losses").get<std::uint64_t>();
  report.map_requests = global.at("map_requests").get<std::uint64_t>();
  report.map_replies = global.at("map_replies").get<std::uint64_t>();
  const auto& net = doc.at("net");
  report.edge = class_from(net.at("edge"));
  report.core = class_from(net.at("core"));
  report.data = class_from(net.at("data"));
  for (const auto& entry : doc.at("sessions")) {
    SessionReport session;
    session.sid = entry.at("sid").get<std::string>();
    session.node = entry.at("node").get<std::string>();
    session.peer = entry.at("peer").get<std::string>();
    session.state = entry.at("state").get<std::string>();
    session.interruption_ticks = entry.at("interruption_ticks").get<Tick>();
    session.payloads_delivered = entry.at("payloads_delivered").get<std::uint64_t>();
    session.in_order = entry.at("in_order").get<bool>();
    report.sessions.push_back(std::move(session));
  }
  for (const auto& entry : doc.at("nodes")) {
    NodeReport node;
    node.label = entry.at("label").get<std::string>();
    node.id = entry.at("id").get<std::string>();
    node.edge_sent = entry.at("edge_sent").get<std::uint64_t>();
    node.core_sent = entry.at("core_sent").get<std::uint64_t>();
    node.data_sent = entry.at("data_sent").get<std::uint64_t>();
    node.map_requests = entry.at("map_requests").get<std::uint64_t>();
    node.delegations = entry.at("delegations").get<std::uint64_t>();
    node.delegate_losses = entry.at("delegate_losses").get<std::uint64_t>();
    report.nodes.push_back(std::move(node));
  }
  return report;
}

std::string to_json_text(const Report& report) { return to_json(report).dump(2) + "\n"; }

Report build(const sim::Engine& engine, const std::string& scenario_name,
             const std::vector<SessionSpec>& sessions, const SentLog& sent) {
  Report report;
  report.scenario = scenario_name;
  report.seed = engine.seed();
  report.ticks = engine.now();
  report.event_count = engine.event_count();
  report.update_policy =
      engine.params().update_policy == UpdatePolicy::Eager ? "eager" : "lazy";

  const auto& metrics = engine.metrics();
  report.edge = class_from_metrics(metrics.of(msg::MsgClass::Edge));
  report.core = class_from_metrics(metrics.of(msg::MsgClass::Core));
  report.data = class_from_metrics(metrics.of(msg::MsgClass::Data));
  report.core_msgs = report.core.sent;
  report.edge_msgs = report.edge.sent;
  report.data_msgs = report.data.sent;
  report.lcs_counter = engine.lcs().core_msg_counter();
  report.map_replies = metrics.map_replies;

  for (const auto& en : engine.en_order()) {
    const auto& counters = engine.local_server(en).counters();
    report.cache_hits += counters.cache_hits;
    report.cache_misses += counters.cache_misses;
    report.rendezvous_successes += counters.rendezvous_successes;
    report.rendezvous_timeouts += counters.rendezvous_timeouts;
  }

  for (const auto& label : engine.node_order()) {
    const node::MobileNodeState& state = engine.node_state(label);
    NodeReport row;
    row.label = label;
    row.id = state.id.to_hex();
    row.edge_sent = state.tce.counters.edge_sent;
    row.core_sent = state.tce.counters.core_sent;
    row.data_sent = state.tce.counters.data_sent;
    row.map_requests = state.tce.counters.map_requests;
    row.delegations = state.tce.counters.delegations;
    row.delegate_losses = state.tce.counters.delegate_losses;
    report.delegations += row.delegations;
    report.delegate_losses += row.delegate_losses;
    report.map_requests += row.map_requests;
    report.nodes.push_back(std::move(row));
  }

  Tick now = engine.now();
  auto endpoint_row = [&](const std::string& sid, const std::string& label,
                          const std::string& peer_label) {
    const node::MobileNodeState& state = engine.node_state(label);
    auto session_it = state.sessions.find(sid);
    if (session_it == state.sessions.end()) {
      throw SimBug("report build: session " + sid + " missing at " + label);
    }
    const node::Session& session = session_it->second;
    SessionReport row;
    row.sid = sid;
    row.node = label;
    row.peer = peer_label;
    row.state = node::session_state_name(session.state);
    row.interruption_ticks = session.interruption_total;
    if (session.interrupted_since >= 0) {
      row.interruption_ticks += now - session.interrupted_since;
    }
    row.payloads_delivered = session.delivered.size();
    row.in_order = true;
    auto expected = sent.find({peer_label, sid});
    if (expected != sent.end()) {
      const auto& sent_payloads = expected->second;
      if (session.delivered.size() > sent_payloads.size()) {
        row.in_order = false;
      } else {
        for (std::size_t k = 0; k < session.delivered.size(); ++k) {
          if (session.delivered[k] != sent_payloads[k]) {
            row.in_order = false;
            break;
          }
        }
      }
    } else if (!session.delivered.empty()) {
      row.in_order = false; // delivered something nobody ever sent
    }
    report.sessions.push_back(std::move(row));
  };
  for (const auto& spec : sessions) {
    endpoint_row(spec.sid, spec.a, spec.b);
    endpoint_row(spec.sid, spec.b, spec.a);
  }
  return report;
}

std::optional<double> lookup_metric(const Report& report, const std::string& key) {
  std::vector<std::string> parts;
  std::string token;
  std::istringstream stream(key);
  while (std::getline(stream, token, '.')) parts.push_back(token);
  if (parts.empty()) return std::nullopt;

  if (parts[0] == "run" && parts.size() == 2) {
    if (parts[1] == "seed") return static_cast<double>(report.seed);
    if (parts[1] == "ticks") return static_cast<double>(report.ticks);
    if (parts[1] == "event_count") return static_cast<double>(report.event_count);
    return std::nullopt;
  }
  if (parts[0] == "global" && parts.size() == 2) {
    const std::string& name = parts[1];
    if (name == "core_msgs") return static_cast<double>(report.core_msgs);
    if (name == "edge_msgs") return static_cast<double>(report.edge_msgs);
    if (name == "data_msgs") return static_cast<double>(report.data_msgs);
    if (name == "lcs_counter") return static_cast<double>(report.lcs_counter);
    if (name == "cache_hits") return static_cast<double>(report.cache_hits);
    if (name == "cache_misses") return static_cast<double>(report.cache_misses);
    if (name == "rendezvous_successes") return static_cast<double>(report.rendezvous_successes);
    if (name == "rendezvous_timeouts") return static_cast<double>(report.rendezvous_timeouts);
    if (name == "delegations") return static_cast<double>(report.delegations);
    if (name == "delegate_losses") return static_cast<double>(report.delegate_losses);
    if (name == "map_requests") return static_cast<double>(report.map_requests);
    if (name == "map_replies") return static_cast<double>(report.map_replies);
    return std::nullopt;
  }
  if (parts[0] == "net" && parts.size() == 3) {
    const ClassReport* cls = class_of(report, parts[1]);
    if (cls == nullptr) return std::nullopt;
    if (parts[2] == "sent") return static_cast<double>(cls->sent);
    if (parts[2] == "delivered") return static_cast<double>(cls->delivered);
    if (parts[2] == "dropped") return static_cast<double>(cls->dropped);
    if (parts[2] == "stranded") return static_cast<double>(cls->stranded);
    if (parts[2] == "in_flight") return static_cast<double>(cls->in_flight);
    return std::nullopt;
  }
  if (parts[0] == "sessions" && parts.size() == 4) {
    for (const auto& session : report.sessions) {
      if (session.sid != parts[1] || session.node != parts[2]) continue;
      if (parts[3] == "interruption_ticks") {
        return static_cast<double>(session.interruption_ticks);
      }
      if (parts[3] == "payloads_delivered") {
        return static_cast<double>(session.payloads_delivered);
      }
      if (parts[3] == "in_order") return session.in_order ? 1.0 : 0.0;
      return std::nullopt;
    }
    return std::nullopt;
  }
  if (parts[0] == "nodes" && parts.size() == 3) {
    for (const auto& node : report.nodes) {
      if (node.label != parts[1]) continue;
      if (parts[2] == "edge_sent") return static_cast<double>(node.edge_sent);
      if (parts[2] == "core_sent") return static_cast<double>(node.core_sent);
      if (parts[2] == "data_sent") return static_cast<double>(node.data_sent);
      if (parts[2] == "map_requests") return static_cast<double>(node.map_requests);
      if (parts[2] == "delegations") return static_cast<double>(node.delegations);
      if (parts[2] == "delegate_losses") return static_cast<double>(node.delegate_losses);
      return std::nullopt;
    }
    return std::nullopt;
  }
  return std::nullopt;
}

std::vector<std::string> default_compare_keys(const Report& report) {
  std::vector<std::string> keys = {"global.core_msgs",      "global.edge_msgs",
                                   "global.data_msgs",      "global.map_requests",
                                   "global.cache_hits",     "global.cache_misses",
                                   "global.delegations",    "global.delegate_losses",
                                   "global.rendezvous_successes"};
  for (const auto& session : report.sessions) {
    keys.push_back("sessions." + session.sid + "." + session.node + ".interruption_ticks");
  }
  return keys;
}

std::vector<CompareRow> compare_runs(const Report& a, const Report& b,
                                     const std::vector<std::string>& keys) {
  if (a.scenario != b.scenario) {
    throw IncomparableReports("reports describe different scenarios: '" + a.scenario +
                              "' vs '" + b.scenario + "'");
  }
  auto shape = [](const Report& report) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& session : report.sessions) out.emplace_back(session.sid, session.node);
    std::sort(out.begin(), out.end());
    return out;
  };
  if (shape(a) != shape(b)) {
    throw IncomparableReports("reports cover different session sets");
  }
  const std::vector<std::string> selected = keys.empty() ? default_compare_keys(a) : keys;
  std::vector<CompareRow> rows;
  for (const auto& key : selected) {
    auto va = lookup_metric(a, key);
    auto vb = lookup_metric(b, key);
    if (!va || !vb) throw IncomparableReports("unknown metric key '" + key + "'");
    rows.push_back(CompareRow{key, *va, *vb, *vb - *va});
  }
  return rows;
}

} // namespace netinf::report
