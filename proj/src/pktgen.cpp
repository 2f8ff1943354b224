#include "inca/pktgen.hpp"

namespace inca {

namespace {

Bytes wrap_ipv6(const Ipv6Addr& src, const Ipv6Addr& dst, uint8_t next_header,
                uint8_t hop_limit, const Bytes& body) {
  Ipv6Header h;
  h.payload_length = static_cast<uint16_t>(body.size());
  h.next_header = next_header;
  h.hop_limit = hop_limit;
  h.src = src;
  h.dst = dst;
  ByteWriter w;
  write_ipv6_header(w, h);
  w.raw(body);
  return w.take();
}

Bytes udp_segment(const Ipv6Addr& src, const Ipv6Addr& dst, uint16_t sport,
                  uint16_t dport, const Bytes& payload) {
  ByteWriter w;
  w.u16(sport);
  w.u16(dport);
  w.u16(static_cast<uint16_t>(8 + payload.size()));
  w.u16(0);
  w.raw(payload);
  Bytes seg = w.take();
  uint16_t ck = compute_udp_checksum(src, dst, seg);
  seg[6] = static_cast<uint8_t>(ck >> 8);
  seg[7] = static_cast<uint8_t>(ck);
  return seg;
}

}  // namespace

Bytes build_inner_udp(const Ipv6Addr& src, const Ipv6Addr& dst, uint16_t sport,
                      uint16_t dport, const Bytes& payload, uint8_t hop_limit) {
  return wrap_ipv6(src, dst, kProtoUdp, hop_limit,
                   udp_segment(src, dst, sport, dport, payload));
}

Bytes build_inner_tcp(const Ipv6Addr& src, const Ipv6Addr& dst, uint16_t sport,
                      uint16_t dport, const Bytes& payload, uint8_t hop_limit) {
  // Minimal TCP-shaped segment: port pair + 16 filler header octets.
  ByteWriter w;
  w.u16(sport);
  w.u16(dport);
  w.u32(0);            // seq
  w.u32(0);            // ack
  w.u8(5 << 4);        // data offset
  w.u8(0x10);          // ACK
  w.u16(0xFFFF);       // window
  w.u16(0);            // checksum (not validated by the pipeline)
  w.u16(0);            // urgent
  w.raw(payload);
  return wrap_ipv6(src, dst, kProtoTcp, hop_limit, w.take());
}

Bytes build_inner_icmp6(const Ipv6Addr& src, const Ipv6Addr& dst, uint8_t type,
                        uint8_t code, const Bytes& payload, uint8_t hop_limit) {
  ByteWriter w;
  w.u8(type);
  w.u8(code);
  w.u16(0);            // checksum (not validated by the pipeline)
  w.raw(payload);
  return wrap_ipv6(src, dst, kProtoIcmpv6, hop_limit, w.take());
}

Bytes gtp_encapsulate(const Ipv6Addr& outer_src, const Ipv6Addr& outer_dst,
                      uint32_t teid, std::optional<uint8_t> qfi,
                      std::span<const uint8_t> inner, uint8_t hop_limit) {
  GtpuHeader g;
  g.teid = teid;
  if (qfi) {
    g.e_flag = true;
    g.sequence = 0;
    g.npdu = 0;
    // UL PDU SESSION INFORMATION: pdu_type 1 in the high nibble, QFI in
    // the low 6 bits of the second content octet.
    g.ext_headers.push_back(
        GtpExtension{kGtpExtPduSession,
                     Bytes{static_cast<uint8_t>(1u << 4),
                           static_cast<uint8_t>(*qfi & 0x3F)}});
  }
  ByteWriter gw;
  size_t opt_ext = g.has_opt() ? 4 + 4 : 0;  // opt area + one 4-octet ext
  gw.u8(static_cast<uint8_t>(1u << 5 | 1u << 4 | (g.e_flag ? 4 : 0)));
  gw.u8(kGtpuGpdu);
  gw.u16(static_cast<uint16_t>(opt_ext + inner.size()));
  gw.u32(teid);
  if (g.has_opt()) {
    gw.u16(0);
    gw.u8(0);
    gw.u8(kGtpExtPduSession);
    gw.u8(1);  // ext length in 4-octet units
    gw.raw(g.ext_headers[0].content);
    gw.u8(0);  // end of extension chain
  }
  gw.raw(inner.data(), inner.size());
  Bytes gtp = gw.take();

  // Deterministic ephemeral source port derived from the tunnel key.
  uint16_t sport = static_cast<uint16_t>(49152 + teid % 16384);
  ByteWriter uw;
  uw.u16(sport);
  uw.u16(kGtpuPort);
  uw.u16(static_cast<uint16_t>(8 + gtp.size()));
  uw.u16(0);
  uw.raw(gtp);
  Bytes udp = uw.take();
  uint16_t ck = compute_udp_checksum(outer_src, outer_dst, udp);
  udp[6] = static_cast<uint8_t>(ck >> 8);
  udp[7] = static_cast<uint8_t>(ck);

  return wrap_ipv6(outer_src, outer_dst, kProtoUdp, hop_limit, udp);
}

Bytes gtp_decapsulate(std::span<const uint8_t> ipv6_packet) {
  // Reuse the frame parser by prepending a null Ethernet header.
  ByteWriter w;
  write_eth(w, EthernetHeader{{}, {}, kEtherTypeIpv6});
  w.raw(ipv6_packet.data(), ipv6_packet.size());
  Bytes frame = w.take();
  ParsedPacket pkt;
  try {
    pkt = parse_frame(frame);
  } catch (const std::exception&) {
    throw NotGtp();
  }
  if (!pkt.gtpu || pkt.gtpu->message_type != kGtpuGpdu || !pkt.inner)
    throw NotGtp();
  for (const auto& [layer, off] : pkt.layer_offsets)
    if (layer == Layer::Inner)
      return Bytes(pkt.raw.begin() + off, pkt.raw.end());
  throw NotGtp();
}

}  // namespace inca
