#include "inca/pipeline.hpp"

namespace inca {

const char* port_name(PortRole p) {
  switch (p) {
    case PortRole::RanFacing: return "ran";
    case PortRole::UpfFacing: return "upf";
    case PortRole::ServiceFacing: return "svc";
  }
  return "?";
}

const char* drop_reason_name(DropReason r) {
  switch (r) {
    case DropReason::NoMoreSegments: return "no_more_segments";
    case DropReason::HopLimit: return "hop_limit";
    case DropReason::Oversize: return "oversize";
    case DropReason::Malformed: return "malformed";
  }
  return "?";
}

namespace {

Verdict count_emit(PipelineState& s, PortRole port, Bytes frame) {
  s.counters.inc(std::string("tx.") + port_name(port));
  s.counters.inc(std::string("tx.") + port_name(port) + ".octets", frame.size());
  return Verdict::emit(port, std::move(frame));
}

Verdict count_drop(PipelineState& s, DropReason r) {
  s.counters.inc(std::string("drop.") + drop_reason_name(r));
  return Verdict::drop(r);
}

// RAN-side uplink: classify, and either steer into a chain or pass
// through to the UPF untouched.
Verdict process_ran(PipelineState& s, std::span<const uint8_t> frame) {
  ParsedPacket pkt;
  try {
    pkt = parse_frame(frame);
  } catch (const std::exception&) {
    return count_drop(s, DropReason::Malformed);
  }

  std::optional<LookupResult> hit;
  if (pkt.gtpu && pkt.inner) {
    MatchKey key = extract_key(pkt, s.table.teid_to_slice());
    hit = s.table.lookup(key);
  }
  if (!hit)
    return count_emit(s, PortRole::UpfFacing, Bytes(frame.begin(), frame.end()));

  s.counters.inc("rule." + std::to_string(hit->rule_id) + ".hits");
  // The encapsulated payload is the whole captured IPv6 packet, L2 and
  // any Ethernet padding stripped.
  size_t ip_len = 40 + pkt.outer_ipv6->payload_length;
  std::span<const uint8_t> ip_bytes = frame.subspan(14, ip_len);

  SegmentList path;
  path.path = hit->policy.segments;
  path.path.push_back(s.cfg.inca_sid);
  EncapConfig cfg = s.cfg;
  cfg.mtu = s.mtu;
  try {
    Bytes encap = h_encaps(ip_bytes, path, cfg);
    return count_emit(s, PortRole::ServiceFacing,
                      rebuild_l2(encap, MacAddr{}, MacAddr{}));
  } catch (const OversizeResult&) {
    return count_drop(s, DropReason::Oversize);
  } catch (const std::exception&) {
    return count_drop(s, DropReason::Malformed);
  }
}

// Service-side: only completed chains (dst == our SID, SL == 0) are
// accepted; everything else on this port is a protocol violation.
Verdict process_service(PipelineState& s, std::span<const uint8_t> frame) {
  if (frame.size() < 14) return count_drop(s, DropReason::Malformed);
  std::span<const uint8_t> ip_bytes = frame.subspan(14);
  try {
    Bytes inner = decap(ip_bytes, s.cfg.inca_sid);
    return count_emit(s, PortRole::UpfFacing,
                      rebuild_l2(inner, MacAddr{}, MacAddr{}));
  } catch (const std::exception&) {
    return count_drop(s, DropReason::Malformed);
  }
}

}  // namespace

Verdict process(PipelineState& s, PortRole in_port,
                std::span<const uint8_t> frame) {
  s.counters.inc(std::string("rx.") + port_name(in_port));
  s.counters.inc(std::string("rx.") + port_name(in_port) + ".octets",
                 frame.size());
  switch (in_port) {
    case PortRole::RanFacing:
      return process_ran(s, frame);
    case PortRole::ServiceFacing:
      return process_service(s, frame);
    case PortRole::UpfFacing:
      // Downlink is pure pass-through.
      return count_emit(s, PortRole::RanFacing, Bytes(frame.begin(), frame.end()));
  }
  return count_drop(s, DropReason::Malformed);
}

Bytes rebuild_l2(std::span<const uint8_t> ipv6_packet, const MacAddr& next_hop_mac,
                 const MacAddr& src_mac) {
  ByteWriter w;
  EthernetHeader eth;
  eth.dst_mac = next_hop_mac;
  eth.src_mac = src_mac;
  eth.ethertype = kEtherTypeIpv6;
  write_eth(w, eth);
  w.raw(ipv6_packet.data(), ipv6_packet.size());
  return w.take();
}

}  // namespace inca
