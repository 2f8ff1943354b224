#include "inca/srv6.hpp"

namespace inca {

namespace {

// Offsets within a bare IPv6 packet carrying an SRH at 40.
constexpr size_t kHopLimitOff = 7;
constexpr size_t kDstOff = 24;
constexpr size_t kSrhOff = 40;

struct SrhView {
  uint8_t next_header;
  uint8_t segments_left;
  uint8_t last_entry;
};

SrhView check_srh(std::span<const uint8_t> pkt) {
  if (pkt.size() < kSrhOff + 8) throw TruncatedHeader("packet too short for SRH");
  if ((pkt[0] >> 4) != 6 || pkt[6] != kProtoRouting)
    throw MalformedSrh("no routing header at fixed offset");
  if (pkt[kSrhOff + 2] != kSrhRoutingType)
    throw MalformedSrh("routing type != 4");
  SrhView v{pkt[kSrhOff], pkt[kSrhOff + 3], pkt[kSrhOff + 4]};
  size_t srh_len = 8 + 8 * static_cast<size_t>(pkt[kSrhOff + 1]);
  if (pkt.size() < kSrhOff + srh_len)
    throw TruncatedHeader("SRH extends past packet end");
  return v;
}

Ipv6Addr sid_at(std::span<const uint8_t> pkt, size_t index) {
  Ipv6Addr a;
  std::memcpy(a.octets.data(), pkt.data() + kSrhOff + 8 + 16 * index, 16);
  return a;
}

Ipv6Addr dst_of(std::span<const uint8_t> pkt) {
  Ipv6Addr a;
  std::memcpy(a.octets.data(), pkt.data() + kDstOff, 16);
  return a;
}

}  // namespace

Bytes h_encaps(std::span<const uint8_t> inner, const SegmentList& path,
               const EncapConfig& cfg) {
  size_t n = path.path.size();
  if (n == 0) throw EmptyPath();
  if (n > 127) throw OversizeResult("segment list too long for SRH");
  if (inner.empty() || (inner[0] >> 4) != 6)
    throw NotIpv6Inner();

  size_t total = 40 + 8 + 16 * n + inner.size();
  if (total > cfg.mtu)
    throw OversizeResult("encapsulated packet exceeds MTU " +
                         std::to_string(cfg.mtu));
  if (8 + 16 * n + inner.size() > 0xFFFF)
    throw OversizeResult("payload length field overflow");

  Ipv6Header outer;
  outer.traffic_class = cfg.traffic_class;
  outer.payload_length = static_cast<uint16_t>(8 + 16 * n + inner.size());
  outer.next_header = kProtoRouting;
  outer.hop_limit = cfg.hop_limit_initial;
  outer.src = cfg.outer_src;
  outer.dst = path.path.front();

  SrhHeader srh;
  srh.next_header = kProtoIpv6;
  srh.segments_left = static_cast<uint8_t>(n - 1);
  srh.segment_list.assign(path.path.rbegin(), path.path.rend());

  ByteWriter w;
  write_ipv6_header(w, outer);
  write_srh(w, srh);
  w.raw(inner.data(), inner.size());
  return w.take();
}

Bytes end_process(std::span<const uint8_t> packet, const Ipv6Addr& my_sid) {
  SrhView v = check_srh(packet);
  if (dst_of(packet) != my_sid) throw NotMySegment();
  if (v.segments_left == 0) throw NoMoreSegments();
  if (packet[kHopLimitOff] <= 1) throw HopLimitExceeded();

  Bytes out(packet.begin(), packet.end());
  out[kHopLimitOff] -= 1;
  uint8_t sl = v.segments_left - 1;
  out[kSrhOff + 3] = sl;
  Ipv6Addr next = sid_at(packet, sl);
  std::memcpy(out.data() + kDstOff, next.octets.data(), 16);
  return out;
}

Bytes decap(std::span<const uint8_t> packet, const Ipv6Addr& inca_sid) {
  SrhView v = check_srh(packet);
  if (dst_of(packet) != inca_sid) throw WrongDestination();
  if (v.segments_left != 0) throw NotChainEnd();
  if (v.next_header != kProtoIpv6) throw NotIpv6Inner();
  size_t srh_len = 8 + 8 * static_cast<size_t>(packet[kSrhOff + 1]);
  return Bytes(packet.begin() + kSrhOff + srh_len, packet.end());
}

}  // namespace inca
