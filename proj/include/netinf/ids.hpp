#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace netinf {

using Tick = std::int64_t;
using EdgeNetworkId = std::string;

// Raised for internal contract violations (simulator bugs), never for
// protocol-level outcomes.
struct SimBug : std::logic_error {
  using std::logic_error::logic_error;
};

// 128-bit flat node identity. Stable across attachments; mobility never
// changes it.
struct NodeId {
  std::array<std::uint8_t, 16> value{};

  std::string to_hex() const;    // 32 lowercase hex chars
  std::string short_hex() const; // first 8 chars, the trace form
  static std::optional<NodeId> from_hex(std::string_view text);

  auto operator<=>(const NodeId&) const = default;
};

enum class ArScope { CoreRoot, EdgeNetwork, Host };

std::string_view scope_word(ArScope scope); // "core" / "edge" / "host"

// Attachment-register identifier, rendered "ar:<scope>:<name>".
// Ordering is (scope, name), which coincides with ordering of the rendered
// form — locator tie-breaks rely on that.
struct ArId {
  ArScope scope{ArScope::EdgeNetwork};
  std::string name;

  std::string render() const;
  static std::optional<ArId> parse(std::string_view text);

  auto operator<=>(const ArId&) const = default;
};

inline ArId core_root_ar() { return ArId{ArScope::CoreRoot, "root"}; }
inline ArId edge_ar(const EdgeNetworkId& en) { return ArId{ArScope::EdgeNetwork, en}; }
inline ArId host_ar(const std::string& name) { return ArId{ArScope::Host, name}; }

// Late-constructed routing path: ARs from just below the core root down to
// the target's host AR. Built on demand, never stored by the core.
struct GlobalLocator {
  std::vector<ArId> path;
  Tick constructed_at{0};

  std::string render() const; // "gl:[a>b>...]"
  static std::optional<GlobalLocator> parse(std::string_view text);

  bool operator==(const GlobalLocator& other) const { return path == other.path; }
};

// Edge-local address: meaningful only inside its edge network, reassigned
// freely after detach.
struct LocalAddress {
  EdgeNetworkId en;
  int slot{0};

  std::string render() const; // "la:<en>:<slot>"

  auto operator<=>(const LocalAddress&) const = default;
};

// A place a peer can be reached: an edge-local address learned nearby, or a
// core-constructed locator.
using Where = std::variant<GlobalLocator, LocalAddress>;

std::string render_where(const Where& where);
EdgeNetworkId en_of(const LocalAddress& addr);
// Edge network a locator routes into: the penultimate path element.
// Empty for single-element paths (host hangs directly off the root).
std::optional<EdgeNetworkId> en_of(const GlobalLocator& locator);
std::optional<EdgeNetworkId> en_of(const Where& where);

// Mints registry-unique node ids. Deterministic: the same seed material
// always yields the same id sequence, and repeated material is salted so
// every mint is distinct.
class IdRegistry {
 public:
  NodeId mint(std::string_view seed_material);
  bool known(const NodeId& id) const { return used_.count(id) != 0; }
  std::size_t size() const { return used_.size(); }

 private:
  std::set<NodeId> used_;
  std::map<std::string, std::uint64_t> salts_;
};

// Read-only view of an AR graph, implemented by the locator construction
// system. Keeps locator validation decoupled from core state.
class ArGraphView {
 public:
  virtual ~ArGraphView() = default;
  virtual bool has(const ArId& ar) const = 0;
  virtual bool has_edge(const ArId& a, const ArId& b) const = 0;
};

struct ValidationResult {
  enum class Code { Accept, EmptyPath, UnknownAr, MissingEdge, TerminalNotHost };
  Code code{Code::Accept};
  // For UnknownAr the first element names the offending AR; for MissingEdge
  // both elements name the first non-adjacent pair.
  std::optional<std::pair<ArId, ArId>> offending;

  bool ok() const { return code == Code::Accept; }
};

ValidationResult validate_locator(const GlobalLocator& locator, const ArGraphView& graph);

namespace detail {
// Deterministic 128-bit hash, stable across platforms and runs. Used for id
// minting and locator digests; not cryptographic.
std::array<std::uint8_t, 16> stable_hash128(const std::uint8_t* data, std::size_t len,
                                            std::uint64_t salt);
} // namespace detail

} // namespace netinf
