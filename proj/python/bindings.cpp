// Python face of the simulator core: scenario validation and runs, report
// comparison, and tunnel encode/decode. Strings and bytes in, plain dicts
// and lists out; structured errors become ValueError.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "netinf/scenario.hpp"
#include "netinf/tunnel.hpp"

namespace py = pybind11;
using namespace netinf;
namespace sc = netinf::scenario;
namespace rp = netinf::report;

namespace {

sc::Scenario parse_or_raise(const std::string& text) {
  try {
    return sc::parse(text);
  } catch (const sc::ParseError& err) {
    throw py::value_error(err.what());
  }
}

UpdatePolicy parse_policy(const std::string& word) {
  if (word == "lazy") return UpdatePolicy::Lazy;
  if (word == "eager") return UpdatePolicy::Eager;
  throw py::value_error("update_policy must be 'lazy' or 'eager', got '" + word + "'");
}

py::dict validate(const std::string& text) {
  sc::Scenario s = parse_or_raise(text);
  py::dict out;
  out["name"] = s.name;
  out["edge_networks"] = s.ens.size();
  out["links"] = s.links.size();
  out["nodes"] = s.nodes.size();
  out["sessions"] = s.sessions.size();
  out["actions"] = s.actions.size();
  out["seed"] = s.seed ? py::cast(*s.seed) : py::object(py::none());
  out["until"] = s.until ? py::cast(*s.until) : py::object(py::none());
  return out;
}

std::string reformat(const std::string& text) { return sc::render(parse_or_raise(text)); }

py::dict run(const std::string& text, std::optional<std::uint64_t> seed,
             std::optional<Tick> until, std::optional<std::string> update_policy,
             std::optional<std::uint64_t> env_seed) {
  sc::Scenario scenario = parse_or_raise(text);
  sc::RunOptions options;
  options.seed = seed;
  options.env_seed = env_seed;
  options.until = until;
  if (update_policy) options.policy = parse_policy(*update_policy);

  sc::RunResult result = sc::run_scenario(scenario, options);

  py::dict delivered;
  for (const auto& [key, payloads] : result.delivered) {
    py::list items;
    for (const auto& payload : payloads) {
      items.append(py::bytes(reinterpret_cast<const char*>(payload.data()), payload.size()));
    }
    delivered[py::make_tuple(key.first, key.second)] = items;
  }

  py::dict out;
  out["report_json"] = rp::to_json_text(result.report);
  out["trace"] = result.trace_lines;
  out["delivered"] = delivered;
  return out;
}

rp::Report report_from_text(const std::string& text) {
  try {
    return rp::from_json(rp::ordered_json::parse(text));
  } catch (const nlohmann::json::exception& err) {
    throw py::value_error(std::string("not a report: ") + err.what());
  } catch (const rp::IncomparableReports& err) {
    throw py::value_error(err.what());
  }
}

py::list compare(const std::string& a_text, const std::string& b_text,
                 std::vector<std::string> keys) {
  rp::Report a = report_from_text(a_text);
  rp::Report b = report_from_text(b_text);
  if (keys.empty()) keys = rp::default_compare_keys(a);
  std::vector<rp::CompareRow> rows;
  try {
    rows = rp::compare_runs(a, b, keys);
  } catch (const rp::IncomparableReports& err) {
    throw py::value_error(err.what());
  }
  py::list out;
  for (const auto& row : rows) {
    py::dict item;
    item["key"] = row.key;
    item["a"] = row.a;
    item["b"] = row.b;
    item["delta"] = row.delta;
    out.append(item);
  }
  return out;
}

tunnel::InnerDst parse_inner_dst(const std::string& text) {
  if (text.rfind("ext:", 0) == 0) return tunnel::ExternalAddress{text};
  auto id = NodeId::from_hex(text);
  if (!id) throw py::value_error("dst must be 32 hex chars or an 'ext:' uri, got '" + text + "'");
  return *id;
}

py::bytes tunnel_encode(const std::string& src_hex, const std::string& dst,
                        const py::bytes& payload, const std::string& outer, std::size_t mtu) {
  auto src = NodeId::from_hex(src_hex);
  if (!src) throw py::value_error("src must be 32 hex chars, got '" + src_hex + "'");
  auto locator = GlobalLocator::parse(outer);
  if (!locator) throw py::value_error("outer must render like gl:[...], got '" + outer + "'");

  std::string raw = payload;
  std::vector<std::uint8_t> body(raw.begin(), raw.end());
  auto result = tunnel::encapsulate(*src, parse_inner_dst(dst), std::move(body), *locator, mtu);
  if (const auto* refused = std::get_if<tunnel::MtuExceeded>(&result)) {
    throw py::value_error("packet needs " + std::to_string(refused->needed) +
                          " bytes but the mtu is " + std::to_string(refused->mtu));
  }
  const auto& packet = std::get<tunnel::EncapsulatedPacket>(result);
  auto header = tunnel::encode_header(packet);
  std::string wire(header.begin(), header.end());
  wire.append(raw);
  return py::bytes(wire);
}

py::dict tunnel_decode(const py::bytes& data) {
  std::string raw = data;
  auto decoded =
      tunnel::decode_header(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size());
  if (const auto* bad = std::get_if<tunnel::MalformedPacket>(&decoded)) {
    throw py::value_error("malformed packet: " + bad->reason);
  }
  const auto& fields = std::get<tunnel::HeaderFields>(decoded);
  if (raw.size() != tunnel::kHeaderBytes + fields.payload_len) {
    throw py::value_error("payload length field says " + std::to_string(fields.payload_len) +
                          " but " + std::to_string(raw.size() - tunnel::kHeaderBytes) +
                          " bytes follow the header");
  }
  py::dict out;
  out["version"] = fields.version;
  out["flags"] = fields.flags;
  out["src"] = fields.inner_src.to_hex();
  out["outer_digest"] = py::bytes(
      reinterpret_cast<const char*>(fields.outer_digest.data()), fields.outer_digest.size());
  out["payload"] = py::bytes(raw.substr(tunnel::kHeaderBytes));
  return out;
}

} // namespace

PYBIND11_MODULE(_netinf, m) {
  m.doc() = "core bindings for the edge-mobility simulator";
  m.attr("HEADER_BYTES") = tunnel::kHeaderBytes;

  m.def("validate", &validate, py::arg("text"),
        "Parse scenario text and return its shape; raises ValueError with "
        "line/column details on the first problem.");
  m.def("reformat", &reformat, py::arg("text"),
        "Canonical rendering of a scenario; a fixed point of itself.");
  m.def("run", &run, py::arg("text"), py::kw_only(), py::arg("seed") = py::none(),
        py::arg("until") = py::none(), py::arg("update_policy") = py::none(),
        py::arg("env_seed") = py::none(),
        "Run a scenario; returns report_json, trace lines, and delivered "
        "payloads keyed by (node label, session id).");
  m.def("compare", &compare, py::arg("a"), py::arg("b"),
        py::arg("keys") = std::vector<std::string>{},
        "Per-metric rows with delta = b - a; empty keys use the default set.");
  m.def("tunnel_encode", &tunnel_encode, py::arg("src"), py::arg("dst"), py::arg("payload"),
        py::arg("outer"), py::arg("mtu"),
        "Encapsulate a payload; returns header plus payload bytes, or raises "
        "ValueError when the mtu cannot fit them.");
  m.def("tunnel_decode", &tunnel_decode, py::arg("data"),
        "Decode header fields and payload from tunnel_encode output.");
}
