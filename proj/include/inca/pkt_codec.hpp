#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "inca/bytes.hpp"

namespace inca {

// Protocol constants.
inline constexpr uint16_t kEtherTypeIpv6 = 0x86DD;
inline constexpr uint8_t kProtoTcp = 6;
inline constexpr uint8_t kProtoUdp = 17;
inline constexpr uint8_t kProtoIpv6 = 41;       // IPv6-in-IPv6
inline constexpr uint8_t kProtoRouting = 43;
inline constexpr uint8_t kProtoIcmpv6 = 58;
inline constexpr uint16_t kGtpuPort = 2152;
inline constexpr uint8_t kGtpuGpdu = 0xFF;
inline constexpr uint8_t kGtpExtPduSession = 0x85;
inline constexpr uint8_t kSrhRoutingType = 4;

struct MalformedSrh : std::runtime_error {
  explicit MalformedSrh(const std::string& w) : std::runtime_error(w) {}
};
struct MalformedGtpu : std::runtime_error {
  explicit MalformedGtpu(const std::string& w) : std::runtime_error(w) {}
};
struct InconsistentLayers : std::runtime_error {
  explicit InconsistentLayers(const std::string& w) : std::runtime_error(w) {}
};

struct EthernetHeader {
  MacAddr dst_mac;
  MacAddr src_mac;
  uint16_t ethertype = 0;

  bool operator==(const EthernetHeader&) const = default;
};

struct Ipv6Header {
  uint8_t traffic_class = 0;
  uint32_t flow_label = 0;      // 20 bits
  uint16_t payload_length = 0;
  uint8_t next_header = 0;
  uint8_t hop_limit = 64;
  Ipv6Addr src;
  Ipv6Addr dst;

  bool operator==(const Ipv6Header&) const = default;
};

/// IPv6 Routing Header type 4. segment_list is kept in on-wire order:
/// index 0 is the last segment of the path.
struct SrhHeader {
  uint8_t next_header = 0;
  uint8_t hdr_ext_len = 0;      // 8-octet units past the first 8 octets
  uint8_t routing_type = kSrhRoutingType;
  uint8_t segments_left = 0;
  uint8_t last_entry = 0;
  uint8_t flags = 0;
  uint16_t tag = 0;
  std::vector<Ipv6Addr> segment_list;

  size_t wire_size() const { return 8 + 16 * segment_list.size(); }
  bool operator==(const SrhHeader&) const = default;
};

struct UdpHeader {
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  uint16_t length = 0;
  uint16_t checksum = 0;

  bool operator==(const UdpHeader&) const = default;
};

/// One GTP-U extension header, content excludes the length and
/// next-type octets (so content.size() == 4*len - 2).
struct GtpExtension {
  uint8_t ext_type = 0;
  Bytes content;

  bool operator==(const GtpExtension&) const = default;
};

struct GtpuHeader {
  uint8_t version = 1;
  bool pt_flag = true;
  bool e_flag = false;
  bool s_flag = false;
  bool pn_flag = false;
  uint8_t message_type = kGtpuGpdu;
  uint16_t length = 0;          // bytes after the first 8 octets
  uint32_t teid = 0;
  // Present when any of e/s/pn is set on the wire.
  std::optional<uint16_t> sequence;
  std::optional<uint8_t> npdu;
  std::vector<GtpExtension> ext_headers;

  bool has_opt() const { return e_flag || s_flag || pn_flag; }
  size_t wire_size() const;
  bool operator==(const GtpuHeader&) const = default;
};

/// Parsed view of the PDU Session Container extension (UL PDU SESSION
/// INFORMATION). The authoritative bytes live in GtpuHeader::ext_headers.
struct PduSessionContainer {
  uint8_t pdu_type = 1;         // 1 = uplink
  uint8_t qfi = 0;              // 6 bits

  bool operator==(const PduSessionContainer&) const = default;
};

struct TcpSummary {
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  bool operator==(const TcpSummary&) const = default;
};

struct Icmpv6Summary {
  uint8_t type = 0;
  uint8_t code = 0;
  bool operator==(const Icmpv6Summary&) const = default;
};

/// The user's original packet inside the GTP-U tunnel. `payload` holds
/// all bytes past the recognized L4 prefix (for TCP that is everything
/// after the port pair, for ICMPv6 everything after type/code).
struct InnerPacket {
  Ipv6Header ipv6;
  uint8_t l4_proto = 0;
  std::variant<std::monostate, UdpHeader, TcpSummary, Icmpv6Summary> l4;
  Bytes payload;

  bool operator==(const InnerPacket&) const = default;
};

enum class Layer { Eth, OuterIpv6, Srh, TunnelIpv6, Udp, Gtpu, PduContainer, Inner, InnerL4, Payload };

const char* layer_name(Layer l);

/// Layered view of one frame. Optionals are populated as deep as the
/// parse reached; `payload` holds the opaque bytes past the deepest
/// recognized layer and `l2_trailer` any Ethernet padding past the
/// outer IPv6 payload length.
struct ParsedPacket {
  EthernetHeader eth;
  std::optional<Ipv6Header> outer_ipv6;
  std::optional<SrhHeader> srh;
  std::optional<Ipv6Header> tunnel_ipv6;   // IPv6-in-IPv6 under the SRH
  std::optional<UdpHeader> transport;
  std::optional<GtpuHeader> gtpu;
  std::optional<PduSessionContainer> pdu_container;
  std::optional<InnerPacket> inner;
  Bytes payload;
  Bytes l2_trailer;
  Bytes raw;
  std::vector<std::pair<Layer, size_t>> layer_offsets;
};

ParsedPacket parse_frame(std::span<const uint8_t> bytes);

/// Re-serializes the layered view, recomputing every length field
/// (ipv6 payload_length, udp length, gtpu length, srh hdr_ext_len).
/// For an unmutated parse this reproduces `raw` byte-for-byte.
Bytes serialize(const ParsedPacket& pkt);

/// One's-complement UDP checksum over the IPv6 pseudo-header plus the
/// UDP segment (checksum field taken as-is; zero it before computing a
/// fresh value). Returns 0xFFFF in place of a computed 0x0000.
uint16_t compute_udp_checksum(const Ipv6Addr& src, const Ipv6Addr& dst,
                              std::span<const uint8_t> udp_bytes);

/// Uncomplemented checksum accumulation; 0xFFFF iff the segment (with
/// its checksum field populated) verifies.
uint16_t verify_udp_checksum(const Ipv6Addr& src, const Ipv6Addr& dst,
                             std::span<const uint8_t> udp_bytes);

// Layer-level codec helpers shared with the SRv6 engine and simulator.
Ipv6Header parse_ipv6_header(ByteReader& r);
void write_ipv6_header(ByteWriter& w, const Ipv6Header& h);
SrhHeader parse_srh(ByteReader& r);
void write_srh(ByteWriter& w, const SrhHeader& h);
void write_eth(ByteWriter& w, const EthernetHeader& h);

}  // namespace inca
