#pragma once

#include <optional>

#include "inca/pkt_codec.hpp"

namespace inca {

struct NotGtp : std::runtime_error {
  NotGtp() : std::runtime_error("frame is not a GTP-U G-PDU") {}
};

/// Builders for the user packets the simulator injects. All return bare
/// IPv6 packets (no L2); UDP checksums are valid.
Bytes build_inner_udp(const Ipv6Addr& src, const Ipv6Addr& dst, uint16_t sport,
                      uint16_t dport, const Bytes& payload, uint8_t hop_limit = 64);
Bytes build_inner_tcp(const Ipv6Addr& src, const Ipv6Addr& dst, uint16_t sport,
                      uint16_t dport, const Bytes& payload, uint8_t hop_limit = 64);
Bytes build_inner_icmp6(const Ipv6Addr& src, const Ipv6Addr& dst, uint8_t type,
                        uint8_t code, const Bytes& payload, uint8_t hop_limit = 64);

/// RAN-side GTP-U encapsulation: outer IPv6 + UDP/2152 + GTP-U G-PDU.
/// With a QFI the PDU Session Container (uplink) rides in the extension
/// area (E=1); without one the minimal 8-octet header is used. The
/// outer UDP checksum is computed over the finished segment.
Bytes gtp_encapsulate(const Ipv6Addr& outer_src, const Ipv6Addr& outer_dst,
                      uint32_t teid, std::optional<uint8_t> qfi,
                      std::span<const uint8_t> inner, uint8_t hop_limit = 64);

/// Extracts the tunneled user packet byte-exactly. Throws NotGtp when
/// the packet is not a well-formed G-PDU with an IPv6 payload.
Bytes gtp_decapsulate(std::span<const uint8_t> ipv6_packet);

}  // namespace inca
