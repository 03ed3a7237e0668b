#pragma once

#include "netinf/ids.hpp"

namespace netinf::tunnel {

// Destination outside the locator-routed domain, e.g. "ext:/legacy/printer".
struct ExternalAddress {
  std::string uri;

  auto operator<=>(const ExternalAddress&) const = default;
};

using InnerDst = std::variant<NodeId, ExternalAddress>;

std::string render_inner_dst(const InnerDst& dst);

inline constexpr std::size_t kHeaderBytes = 36;
inline constexpr std::uint8_t kVersion = 1;
inline constexpr char kMagic[4] = {'N', 'I', 'E', 'H'};

struct EncapsulatedPacket {
  GlobalLocator outer;
  NodeId inner_src;
  InnerDst inner_dst;
  std::vector<std::uint8_t> payload;

  std::size_t total_size() const { return kHeaderBytes + payload.size(); }
};

struct InnerDatagram {
  NodeId src;
  InnerDst dst;
  std::vector<std::uint8_t> payload;
};

struct MtuExceeded {
  std::size_t needed;
  std::size_t mtu;
};

struct MalformedPacket {
  std::string reason;
};

using EncapsulateResult = std::variant<EncapsulatedPacket, MtuExceeded>;

// Marks which destinations speak the native protocol. Longest matching
// registered prefix wins; unregistered destinations default to native.
class SiteRegistry {
 public:
  void mark(std::string prefix, bool netinf) { prefixes_[std::move(prefix)] = netinf; }
  bool is_netinf_site(const InnerDst& dst) const;

 private:
  std::map<std::string, bool> prefixes_;
};

// Wrap a datagram for transit across non-native infrastructure. Fails
// whenever header plus payload would not fit the MTU; nothing fragments.
EncapsulateResult encapsulate(const NodeId& inner_src, const InnerDst& inner_dst,
                              std::vector<std::uint8_t> payload, const GlobalLocator& outer,
                              std::size_t mtu);

// Exact inverse of encapsulate at the packet level.
InnerDatagram decapsulate(const EncapsulatedPacket& packet);

// Bit-exact 36-byte header: magic, version, flags, payload length (BE),
// inner_src, truncated outer-locator digest.
std::array<std::uint8_t, kHeaderBytes> encode_header(const EncapsulatedPacket& packet);

struct HeaderFields {
  std::uint8_t version{};
  std::uint8_t flags{};
  std::uint16_t payload_len{};
  NodeId inner_src;
  std::array<std::uint8_t, 12> outer_digest{};
};

std::variant<HeaderFields, MalformedPacket> decode_header(const std::uint8_t* data,
                                                          std::size_t len);

std::array<std::uint8_t, 12> locator_digest(const GlobalLocator& outer);

} // namespace netinf::tunnel
