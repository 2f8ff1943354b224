#pragma once

#include "inca/pkt_codec.hpp"

namespace inca {

struct EmptyPath : std::runtime_error {
  EmptyPath() : std::runtime_error("empty segment path") {}
};
struct OversizeResult : std::runtime_error {
  explicit OversizeResult(const std::string& w) : std::runtime_error(w) {}
};
struct NotMySegment : std::runtime_error {
  NotMySegment() : std::runtime_error("destination is not this segment") {}
};
struct NoMoreSegments : std::runtime_error {
  NoMoreSegments() : std::runtime_error("segments_left already 0") {}
};
struct HopLimitExceeded : std::runtime_error {
  HopLimitExceeded() : std::runtime_error("hop limit exhausted") {}
};
struct NotChainEnd : std::runtime_error {
  NotChainEnd() : std::runtime_error("segments_left != 0 at decap") {}
};
struct WrongDestination : std::runtime_error {
  WrongDestination() : std::runtime_error("destination is not the chain end") {}
};
struct NotIpv6Inner : std::runtime_error {
  NotIpv6Inner() : std::runtime_error("srh payload is not IPv6-in-IPv6") {}
};

/// Segment path in traversal order; the chain-terminating return SID is
/// the final element.
struct SegmentList {
  std::vector<Ipv6Addr> path;
};

struct EncapConfig {
  Ipv6Addr outer_src;
  Ipv6Addr inca_sid;
  uint8_t hop_limit_initial = 64;
  uint8_t traffic_class = 0;
  size_t mtu = 9000;
};

/// H.Encaps: push a new outer IPv6 header plus SRH over the whole
/// captured packet. The input is a bare IPv6 packet (no L2).
Bytes h_encaps(std::span<const uint8_t> inner_ipv6_packet,
               const SegmentList& path, const EncapConfig& cfg);

/// SRv6 End: decrement segments_left, copy the newly active SID into
/// the destination address, decrement the hop limit. In-place on a
/// copy of the packet bytes; everything else is untouched.
Bytes end_process(std::span<const uint8_t> packet, const Ipv6Addr& my_sid);

/// Chain exit: strip outer IPv6 + SRH, returning the original packet.
Bytes decap(std::span<const uint8_t> packet, const Ipv6Addr& inca_sid);

}  // namespace inca
