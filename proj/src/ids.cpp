#include "netinf/ids.hpp"

#include <cstring>

namespace netinf {
namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t len, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

std::string NodeId::to_hex() const {
  std::string out;
  out.reserve(32);
  for (std::uint8_t b : value) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xf]);
  }
  return out;
}

std::string NodeId::short_hex() const { return to_hex().substr(0, 8); }

std::optional<NodeId> NodeId::from_hex(std::string_view text) {
  if (text.size() != 32) return std::nullopt;
  NodeId id;
  for (std::size_t i = 0; i < 16; ++i) {
    int hi = hex_value(text[2 * i]);
    int lo = hex_value(text[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    id.value[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return id;
}

std::string_view scope_word(ArScope scope) {
  switch (scope) {
    case ArScope::CoreRoot: return "core";
    case ArScope::EdgeNetwork: return "edge";
    case ArScope::Host: return "host";
  }
  throw SimBug("unknown ArScope");
}

std::string ArId::render() const {
  std::string out = "ar:";
  out += scope_word(scope);
  out += ':';
  out += name;
  return out;
}

std::optional<ArId> ArId::parse(std::string_view text) {
  if (text.substr(0, 3) != "ar:") return std::nullopt;
  text.remove_prefix(3);
  auto colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  std::string_view word = text.substr(0, colon);
  std::string_view name = text.substr(colon + 1);
  if (name.empty()) return std::nullopt;
  ArScope scope;
  if (word == "core") scope = ArScope::CoreRoot;
  else if (word == "edge") scope = ArScope::EdgeNetwork;
  else if (word == "host") scope = ArScope::Host;
  else return std::nullopt;
  return ArId{scope, std::string(name)};
}

std::string GlobalLocator::render() const {
  std::string out = "gl:[";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '>';
    out += path[i].render();
  }
  out += ']';
  return out;
}

std::optional<GlobalLocator> GlobalLocator::parse(std::string_view text) {
  if (text.substr(0, 4) != "gl:[" || text.empty() || text.back() != ']') return std::nullopt;
  text.remove_prefix(4);
  text.remove_suffix(1);
  GlobalLocator locator;
  if (text.empty()) return locator;
  std::size_t start = 0;
  while (true) {
    std::size_t sep = text.find('>', start);
    std::string_view piece =
        sep == std::string_view::npos ? text.substr(start) : text.substr(start, sep - start);
    auto ar = ArId::parse(piece);
    if (!ar) return std::nullopt;
    locator.path.push_back(*ar);
    if (sep == std::string_view::npos) break;
    start = sep + 1;
  }
  return locator;
}

std::string LocalAddress::render() const {
  return "la:" + en + ':' + std::to_string(slot);
}

std::string render_where(const Where& where) {
  return std::visit([](const auto& w) { return w.render(); }, where);
}

EdgeNetworkId en_of(const LocalAddress& addr) { return addr.en; }

std::optional<EdgeNetworkId> en_of(const GlobalLocator& locator) {
  if (locator.path.size() < 2) return std::nullopt;
  const ArId& penultimate = locator.path[locator.path.size() - 2];
  if (penultimate.scope != ArScope::EdgeNetwork) return std::nullopt;
  return penultimate.name;
}

std::optional<EdgeNetworkId> en_of(const Where& where) {
  if (const auto* addr = std::get_if<LocalAddress>(&where)) return addr->en;
  return en_of(std::get<GlobalLocator>(where));
}

NodeId IdRegistry::mint(std::string_view seed_material) {
  std::string key(seed_material);
  std::uint64_t& next_salt = salts_[key];
  for (int attempt = 0; attempt < 64; ++attempt) {
    NodeId id;
    id.value = detail::stable_hash128(
        reinterpret_cast<const std::uint8_t*>(seed_material.data()), seed_material.size(),
        next_salt);
    ++next_salt;
    if (used_.insert(id).second) return id;
  }
  throw SimBug("id registry exhausted retries for seed material: " + key);
}

ValidationResult validate_locator(const GlobalLocator& locator, const ArGraphView& graph) {
  using Code = ValidationResult::Code;
  if (locator.path.empty()) return {Code::EmptyPath, std::nullopt};
  for (const ArId& ar : locator.path) {
    if (!graph.has(ar)) return {Code::UnknownAr, std::make_pair(ar, ar)};
  }
  for (std::size_t i = 0; i + 1 < locator.path.size(); ++i) {
    if (!graph.has_edge(locator.path[i], locator.path[i + 1])) {
      return {Code::MissingEdge, std::make_pair(locator.path[i], locator.path[i + 1])};
    }
  }
  if (locator.path.back().scope != ArScope::Host) return {Code::TerminalNotHost, std::nullopt};
  return {Code::Accept, std::nullopt};
}

namespace detail {

std::array<std::uint8_t, 16> stable_hash128(const std::uint8_t* data, std::size_t len,
                                            std::uint64_t salt) {
  std::uint8_t salt_bytes[8];
  for (int i = 0; i < 8; ++i) salt_bytes[i] = static_cast<std::uint8_t>(salt >> (8 * i));
  std::uint64_t h1 = fnv1a64(data, len, 0xcbf29ce484222325ULL);
  h1 = fnv1a64(salt_bytes, 8, h1);
  std::uint64_t h2 = fnv1a64(data, len, 0x84222325cbf29ce4ULL);
  h2 = fnv1a64(salt_bytes, 8, h2);
  h1 = splitmix64(h1);
  h2 = splitmix64(h2 ^ (h1 << 32 | h1 >> 32));
  std::array<std::uint8_t, 16> out{};
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<std::uint8_t>(h1 >> (56 - 8 * i));
    out[8 + i] = static_cast<std::uint8_t>(h2 >> (56 - 8 * i));
  }
  return out;
}

} // namespace detail
} // namespace netinf
