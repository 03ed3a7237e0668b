#include "netinf/tunnel.hpp"

#include <cstring>

namespace netinf::tunnel {

std::string render_inner_dst(const InnerDst& dst) {
  if (const auto* id = std::get_if<NodeId>(&dst)) return id->to_hex();
  return std::get<ExternalAddress>(dst).uri;
}

bool SiteRegistry::is_netinf_site(const InnerDst& dst) const {
  std::string key = render_inner_dst(dst);
  const std::string* best_prefix = nullptr;
  bool best_flag = true;
  for (const auto& [prefix, netinf] : prefixes_) {
    if (key.size() >= prefix.size() && key.compare(0, prefix.size(), prefix) == 0) {
      if (best_prefix == nullptr || prefix.size() > best_prefix->size()) {
        best_prefix = &prefix;
        best_flag = netinf;
      }
    }
  }
  return best_prefix == nullptr ? true : best_flag;
}

EncapsulateResult encapsulate(const NodeId& inner_src, const InnerDst& inner_dst,
                              std::vector<std::uint8_t> payload, const GlobalLocator& outer,
                              std::size_t mtu) {
  std::size_t needed = kHeaderBytes + payload.size();
  if (needed > mtu) return MtuExceeded{needed, mtu};
  EncapsulatedPacket packet;
  packet.outer = outer;
  packet.inner_src = inner_src;
  packet.inner_dst = inner_dst;
  packet.payload = std::move(payload);
  return packet;
}

InnerDatagram decapsulate(const EncapsulatedPacket& packet) {
  return InnerDatagram{packet.inner_src, packet.inner_dst, packet.payload};
}

std::array<std::uint8_t, 12> locator_digest(const GlobalLocator& outer) {
  std::string rendered = outer.render();
  auto full = detail::stable_hash128(reinterpret_cast<const std::uint8_t*>(rendered.data()),
                                     rendered.size(), 0);
  std::array<std::uint8_t, 12> digest{};
  std::memcpy(digest.data(), full.data(), 12);
  return digest;
}

std::array<std::uint8_t, kHeaderBytes> encode_header(const EncapsulatedPacket& packet) {
  if (packet.payload.size() > 0xffff) throw SimBug("payload too large for header length field");
  std::array<std::uint8_t, kHeaderBytes> out{};
  std::memcpy(out.data(), kMagic, 4);
  out[4] = kVersion;
  out[5] = 0; // flags, reserved
  std::uint16_t len = static_cast<std::uint16_t>(packet.payload.size());
  out[6] = static_cast<std::uint8_t>(len >> 8);
  out[7] = static_cast<std::uint8_t>(len & 0xff);
  std::memcpy(out.data() + 8, packet.inner_src.value.data(), 16);
  auto digest = locator_digest(packet.outer);
  std::memcpy(out.data() + 24, digest.data(), 12);
  return out;
}

std::variant<HeaderFields, MalformedPacket> decode_header(const std::uint8_t* data,
                                                          std::size_t len) {
  if (len < kHeaderBytes) return MalformedPacket{"truncated header"};
  if (std::memcmp(data, kMagic, 4) != 0) return MalformedPacket{"bad magic"};
  HeaderFields fields;
  fields.version = data[4];
  if (fields.version != kVersion) return MalformedPacket{"unsupported version"};
  fields.flags = data[5];
  fields.payload_len = static_cast<std::uint16_t>((data[6] << 8) | data[7]);
  std::memcpy(fields.inner_src.value.data(), data + 8, 16);
  std::memcpy(fields.outer_digest.data(), data + 24, 12);
  return fields;
}

} // namespace netinf::tunnel
