#include "inca/pkt_codec.hpp"

namespace inca {

const char* layer_name(Layer l) {
  switch (l) {
    case Layer::Eth: return "eth";
    case Layer::OuterIpv6: return "ipv6";
    case Layer::Srh: return "srh";
    case Layer::TunnelIpv6: return "ipv6";
    case Layer::Udp: return "udp";
    case Layer::Gtpu: return "gtpu";
    case Layer::PduContainer: return "pdu-container";
    case Layer::Inner: return "inner-ipv6";
    case Layer::InnerL4: return "inner-l4";
    case Layer::Payload: return "payload";
  }
  return "?";
}

size_t GtpuHeader::wire_size() const {
  size_t n = 8;
  if (has_opt()) n += 4;
  for (const auto& e : ext_headers) n += e.content.size() + 2;
  return n;
}

Ipv6Header parse_ipv6_header(ByteReader& r) {
  uint32_t vtf = r.u32("ipv6 header");
  if (vtf >> 28 != 6) throw MalformedSrh("ipv6 version != 6");
  Ipv6Header h;
  h.traffic_class = static_cast<uint8_t>(vtf >> 20);
  h.flow_label = vtf & 0xFFFFF;
  h.payload_length = r.u16("ipv6 header");
  h.next_header = r.u8("ipv6 header");
  h.hop_limit = r.u8("ipv6 header");
  h.src = r.addr("ipv6 src");
  h.dst = r.addr("ipv6 dst");
  return h;
}

void write_ipv6_header(ByteWriter& w, const Ipv6Header& h) {
  w.u32(6u << 28 | static_cast<uint32_t>(h.traffic_class) << 20 |
        (h.flow_label & 0xFFFFF));
  w.u16(h.payload_length);
  w.u8(h.next_header);
  w.u8(h.hop_limit);
  w.addr(h.src);
  w.addr(h.dst);
}

SrhHeader parse_srh(ByteReader& r) {
  SrhHeader h;
  h.next_header = r.u8("srh");
  h.hdr_ext_len = r.u8("srh");
  h.routing_type = r.u8("srh");
  h.segments_left = r.u8("srh");
  h.last_entry = r.u8("srh");
  h.flags = r.u8("srh");
  h.tag = r.u16("srh");
  if (h.routing_type != kSrhRoutingType)
    throw MalformedSrh("routing type != 4");
  if (h.hdr_ext_len == 0 || h.hdr_ext_len % 2 != 0)
    throw MalformedSrh("hdr_ext_len must be a positive even count");
  size_t n = h.hdr_ext_len / 2;
  if (h.last_entry != n - 1)
    throw MalformedSrh("last_entry inconsistent with hdr_ext_len");
  if (h.segments_left > h.last_entry)
    throw MalformedSrh("segments_left exceeds last_entry");
  h.segment_list.reserve(n);
  for (size_t i = 0; i < n; ++i) h.segment_list.push_back(r.addr("srh sid"));
  return h;
}

void write_srh(ByteWriter& w, const SrhHeader& h) {
  size_t n = h.segment_list.size();
  if (n == 0 || n > 127) throw InconsistentLayers("srh segment count out of range");
  w.u8(h.next_header);
  w.u8(static_cast<uint8_t>(2 * n));
  w.u8(kSrhRoutingType);
  w.u8(h.segments_left);
  w.u8(static_cast<uint8_t>(n - 1));
  w.u8(h.flags);
  w.u16(h.tag);
  for (const auto& sid : h.segment_list) w.addr(sid);
}

void write_eth(ByteWriter& w, const EthernetHeader& h) {
  w.raw(h.dst_mac.octets.data(), 6);
  w.raw(h.src_mac.octets.data(), 6);
  w.u16(h.ethertype);
}

namespace {

UdpHeader parse_udp(ByteReader& r) {
  UdpHeader u;
  u.src_port = r.u16("udp");
  u.dst_port = r.u16("udp");
  u.length = r.u16("udp");
  u.checksum = r.u16("udp");
  return u;
}

GtpuHeader parse_gtpu(ByteReader& r) {
  GtpuHeader g;
  uint8_t flags = r.u8("gtpu");
  g.version = flags >> 5;
  g.pt_flag = (flags >> 4) & 1;
  g.e_flag = (flags >> 2) & 1;
  g.s_flag = (flags >> 1) & 1;
  g.pn_flag = flags & 1;
  if (g.version != 1 || !g.pt_flag)
    throw MalformedGtpu("not a GTP-U v1 G-PDU header");
  g.message_type = r.u8("gtpu");
  g.length = r.u16("gtpu");
  g.teid = r.u32("gtpu");
  if (g.length > r.remaining())
    throw TruncatedHeader("gtpu length exceeds available bytes");
  if (g.length < r.remaining())
    throw InconsistentLayers("trailing bytes after gtpu payload");
  if (g.has_opt()) {
    g.sequence = r.u16("gtpu opt");
    g.npdu = r.u8("gtpu opt");
    uint8_t next = r.u8("gtpu opt");
    while (next != 0) {
      GtpExtension ext;
      ext.ext_type = next;
      uint8_t len = r.u8("gtpu ext");
      if (len == 0) throw MalformedGtpu("zero-length extension header");
      ext.content = r.bytes(static_cast<size_t>(len) * 4 - 2, "gtpu ext");
      next = r.u8("gtpu ext");
      g.ext_headers.push_back(std::move(ext));
    }
  }
  return g;
}

std::optional<PduSessionContainer> extract_pdu_container(const GtpuHeader& g) {
  for (const auto& e : g.ext_headers) {
    if (e.ext_type != kGtpExtPduSession) continue;
    if (e.content.size() < 2)
      throw MalformedGtpu("pdu session container too short");
    PduSessionContainer c;
    c.pdu_type = e.content[0] >> 4;
    c.qfi = e.content[1] & 0x3F;
    return c;
  }
  return std::nullopt;
}

// Inner (user) packet parse; failures fall back to opaque payload.
bool try_parse_inner(ByteReader& r, ParsedPacket& pkt, size_t base) {
  size_t start = r.offset();
  try {
    if (r.remaining() < 40) return false;
    InnerPacket in;
    in.ipv6 = parse_ipv6_header(r);
    if (in.ipv6.payload_length != r.remaining()) return false;
    in.l4_proto = in.ipv6.next_header;
    pkt.layer_offsets.emplace_back(Layer::Inner, base + start);
    size_t l4_off = r.offset();
    switch (in.l4_proto) {
      case kProtoUdp: {
        UdpHeader u = parse_udp(r);
        if (u.length != 8 + r.remaining())
          throw InconsistentLayers("inner udp length mismatch");
        in.l4 = u;
        break;
      }
      case kProtoTcp:
        in.l4 = TcpSummary{r.u16("tcp"), r.u16("tcp")};
        break;
      case kProtoIcmpv6:
        in.l4 = Icmpv6Summary{r.u8("icmpv6"), r.u8("icmpv6")};
        break;
      default:
        break;
    }
    if (!std::holds_alternative<std::monostate>(in.l4))
      pkt.layer_offsets.emplace_back(Layer::InnerL4, base + l4_off);
    in.payload = r.rest();
    pkt.inner = std::move(in);
    return true;
  } catch (const std::exception&) {
    // Not a parseable inner IPv6 packet; rewind bookkeeping.
    while (!pkt.layer_offsets.empty() &&
           (pkt.layer_offsets.back().first == Layer::Inner ||
            pkt.layer_offsets.back().first == Layer::InnerL4))
      pkt.layer_offsets.pop_back();
    (void)start;
    return false;
  }
}

}  // namespace

ParsedPacket parse_frame(std::span<const uint8_t> bytes) {
  ParsedPacket pkt;
  pkt.raw.assign(bytes.begin(), bytes.end());

  ByteReader hdr(bytes);
  hdr.require(14, "ethernet header");
  pkt.layer_offsets.emplace_back(Layer::Eth, 0);
  std::memcpy(pkt.eth.dst_mac.octets.data(), bytes.data(), 6);
  std::memcpy(pkt.eth.src_mac.octets.data(), bytes.data() + 6, 6);
  pkt.eth.ethertype = static_cast<uint16_t>(bytes[12] << 8 | bytes[13]);
  if (pkt.eth.ethertype != kEtherTypeIpv6) {
    pkt.payload.assign(bytes.begin() + 14, bytes.end());
    if (!pkt.payload.empty())
      pkt.layer_offsets.emplace_back(Layer::Payload, 14);
    return pkt;
  }

  if (bytes.size() < 54 || (bytes[14] >> 4) != 6) {
    // Ethertype says IPv6 but the header is not there; keep opaque.
    pkt.payload.assign(bytes.begin() + 14, bytes.end());
    pkt.layer_offsets.emplace_back(Layer::Payload, 14);
    return pkt;
  }

  ByteReader outer_r(bytes.subspan(14));
  pkt.outer_ipv6 = parse_ipv6_header(outer_r);
  pkt.layer_offsets.emplace_back(Layer::OuterIpv6, 14);
  size_t body_avail = bytes.size() - 54;
  if (pkt.outer_ipv6->payload_length > body_avail)
    throw TruncatedHeader("ipv6 payload length exceeds frame");
  size_t body_len = pkt.outer_ipv6->payload_length;
  pkt.l2_trailer.assign(bytes.begin() + 54 + body_len, bytes.end());

  const size_t base = 54;
  ByteReader r(bytes.subspan(54, body_len));
  uint8_t next = pkt.outer_ipv6->next_header;

  auto finish_opaque = [&]() {
    pkt.payload = r.rest();
    if (!pkt.payload.empty())
      pkt.layer_offsets.emplace_back(Layer::Payload,
                                     base + r.offset() - pkt.payload.size());
  };

  if (next == kProtoRouting) {
    if (r.remaining() >= 3 &&
        bytes[base + r.offset() + 2] != kSrhRoutingType) {
      finish_opaque();
      return pkt;
    }
    size_t off = r.offset();
    pkt.srh = parse_srh(r);
    pkt.layer_offsets.emplace_back(Layer::Srh, base + off);
    next = pkt.srh->next_header;
    if (next == kProtoIpv6) {
      size_t toff = r.offset();
      r.require(40, "tunneled ipv6 header");
      pkt.tunnel_ipv6 = parse_ipv6_header(r);
      pkt.layer_offsets.emplace_back(Layer::TunnelIpv6, base + toff);
      if (pkt.tunnel_ipv6->payload_length > r.remaining())
        throw TruncatedHeader("tunneled ipv6 payload length exceeds frame");
      if (pkt.tunnel_ipv6->payload_length < r.remaining())
        throw InconsistentLayers("trailing bytes after tunneled ipv6 payload");
      next = pkt.tunnel_ipv6->next_header;
    } else {
      finish_opaque();
      return pkt;
    }
  }

  if (next != kProtoUdp) {
    finish_opaque();
    return pkt;
  }
  size_t uoff = r.offset();
  r.require(8, "udp header");
  pkt.transport = parse_udp(r);
  pkt.layer_offsets.emplace_back(Layer::Udp, base + uoff);
  if (pkt.transport->length != 8 + r.remaining())
    throw TruncatedHeader("udp length inconsistent with ipv6 payload");
  if (pkt.transport->dst_port != kGtpuPort) {
    finish_opaque();
    return pkt;
  }

  size_t goff = r.offset();
  r.require(8, "gtpu header");
  pkt.gtpu = parse_gtpu(r);
  pkt.layer_offsets.emplace_back(Layer::Gtpu, base + goff);
  pkt.pdu_container = extract_pdu_container(*pkt.gtpu);
  if (pkt.pdu_container)
    pkt.layer_offsets.emplace_back(Layer::PduContainer, base + goff + 8);
  if (pkt.gtpu->message_type != kGtpuGpdu) {
    finish_opaque();
    return pkt;
  }

  if (!try_parse_inner(r, pkt, base)) finish_opaque();
  return pkt;
}

namespace {

Bytes serialize_inner(const InnerPacket& in) {
  ByteWriter l4;
  if (const auto* u = std::get_if<UdpHeader>(&in.l4)) {
    l4.u16(u->src_port);
    l4.u16(u->dst_port);
    l4.u16(static_cast<uint16_t>(8 + in.payload.size()));
    l4.u16(u->checksum);
  } else if (const auto* t = std::get_if<TcpSummary>(&in.l4)) {
    l4.u16(t->src_port);
    l4.u16(t->dst_port);
  } else if (const auto* i = std::get_if<Icmpv6Summary>(&in.l4)) {
    l4.u8(i->type);
    l4.u8(i->code);
  }
  Ipv6Header hdr = in.ipv6;
  hdr.payload_length = static_cast<uint16_t>(l4.size() + in.payload.size());
  ByteWriter w;
  write_ipv6_header(w, hdr);
  w.raw(l4.take());
  w.raw(in.payload);
  return w.take();
}

Bytes serialize_gtpu(const GtpuHeader& g, const Bytes& payload) {
  ByteWriter tail;
  if (g.has_opt()) {
    tail.u16(g.sequence.value_or(0));
    tail.u8(g.npdu.value_or(0));
    tail.u8(g.ext_headers.empty() ? 0 : g.ext_headers.front().ext_type);
    for (size_t i = 0; i < g.ext_headers.size(); ++i) {
      const auto& e = g.ext_headers[i];
      if ((e.content.size() + 2) % 4 != 0)
        throw InconsistentLayers("gtpu extension content size not 4n-2");
      tail.u8(static_cast<uint8_t>((e.content.size() + 2) / 4));
      tail.raw(e.content);
      tail.u8(i + 1 < g.ext_headers.size() ? g.ext_headers[i + 1].ext_type : 0);
    }
  } else if (!g.ext_headers.empty()) {
    throw InconsistentLayers("gtpu extensions require the optional field area");
  }
  size_t length = tail.size() + payload.size();
  if (length > 0xFFFF) throw InconsistentLayers("gtpu payload too large");
  ByteWriter w;
  w.u8(static_cast<uint8_t>(1u << 5 | 1u << 4 | (g.e_flag ? 4 : 0) |
                            (g.s_flag ? 2 : 0) | (g.pn_flag ? 1 : 0)));
  w.u8(g.message_type);
  w.u16(static_cast<uint16_t>(length));
  w.u32(g.teid);
  w.raw(tail.take());
  w.raw(payload);
  return w.take();
}

}  // namespace

Bytes serialize(const ParsedPacket& pkt) {
  Bytes cur;
  if (pkt.inner) {
    cur = serialize_inner(*pkt.inner);
    cur.insert(cur.end(), pkt.payload.begin(), pkt.payload.end());
  } else {
    cur = pkt.payload;
  }

  if (pkt.gtpu) cur = serialize_gtpu(*pkt.gtpu, cur);

  if (pkt.transport) {
    if (8 + cur.size() > 0xFFFF)
      throw InconsistentLayers("udp payload too large");
    ByteWriter w;
    w.u16(pkt.transport->src_port);
    w.u16(pkt.transport->dst_port);
    w.u16(static_cast<uint16_t>(8 + cur.size()));
    w.u16(pkt.transport->checksum);
    w.raw(cur);
    cur = w.take();
  }

  if (pkt.tunnel_ipv6) {
    if (cur.size() > 0xFFFF)
      throw InconsistentLayers("tunneled ipv6 payload too large");
    Ipv6Header h = *pkt.tunnel_ipv6;
    h.payload_length = static_cast<uint16_t>(cur.size());
    ByteWriter w;
    write_ipv6_header(w, h);
    w.raw(cur);
    cur = w.take();
  }

  if (pkt.srh) {
    ByteWriter w;
    write_srh(w, *pkt.srh);
    w.raw(cur);
    cur = w.take();
  }

  ByteWriter w;
  write_eth(w, pkt.eth);
  if (pkt.outer_ipv6) {
    if (cur.size() > 0xFFFF)
      throw InconsistentLayers("ipv6 payload too large");
    Ipv6Header h = *pkt.outer_ipv6;
    h.payload_length = static_cast<uint16_t>(cur.size());
    write_ipv6_header(w, h);
  }
  w.raw(cur);
  w.raw(pkt.l2_trailer);
  return w.take();
}

namespace {

uint32_t sum16(std::span<const uint8_t> data, uint32_t acc) {
  size_t i = 0;
  for (; i + 1 < data.size(); i += 2)
    acc += static_cast<uint32_t>(data[i]) << 8 | data[i + 1];
  if (i < data.size()) acc += static_cast<uint32_t>(data[i]) << 8;
  return acc;
}

uint16_t checksum_accumulate(const Ipv6Addr& src, const Ipv6Addr& dst,
                             std::span<const uint8_t> udp_bytes) {
  uint32_t acc = 0;
  acc = sum16(src.octets, acc);
  acc = sum16(dst.octets, acc);
  uint32_t len = static_cast<uint32_t>(udp_bytes.size());
  acc += len >> 16;
  acc += len & 0xFFFF;
  acc += kProtoUdp;
  acc = sum16(udp_bytes, acc);
  while (acc >> 16) acc = (acc & 0xFFFF) + (acc >> 16);
  return static_cast<uint16_t>(acc);
}

}  // namespace

uint16_t compute_udp_checksum(const Ipv6Addr& src, const Ipv6Addr& dst,
                              std::span<const uint8_t> udp_bytes) {
  uint16_t sum = checksum_accumulate(src, dst, udp_bytes);
  uint16_t ck = static_cast<uint16_t>(~sum);
  return ck == 0 ? 0xFFFF : ck;
}

uint16_t verify_udp_checksum(const Ipv6Addr& src, const Ipv6Addr& dst,
                             std::span<const uint8_t> udp_bytes) {
  return checksum_accumulate(src, dst, udp_bytes);
}

}  // namespace inca
