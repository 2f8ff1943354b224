#pragma once

#include <random>

#include "inca/pktgen.hpp"

namespace inca::testutil {

// Independent frame-construction oracle: every header is written out
// with literal arithmetic, no shared code with the production codec.
inline Bytes oracle_ran_frame(uint32_t teid, uint8_t qfi, const Bytes& inner) {
  Bytes f;
  auto b = [&](std::initializer_list<int> xs) {
    for (int x : xs) f.push_back(static_cast<uint8_t>(x));
  };
  auto u16 = [&](size_t v) { b({static_cast<int>(v >> 8), static_cast<int>(v & 0xFF)}); };
  auto addr = [&](const char* a) {
    Ipv6Addr p = Ipv6Addr::parse(a);
    f.insert(f.end(), p.octets.begin(), p.octets.end());
  };

  // Ethernet II
  b({0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0x86, 0xDD});
  // Outer IPv6; payload = UDP(8) + GTP(8) + opt(4) + ext(4) + inner
  size_t gtp_tail = 4 + 4 + inner.size();
  size_t udp_len = 8 + 8 + gtp_tail;
  b({0x60, 0, 0, 0});
  u16(udp_len);
  b({17, 64});
  addr("fd00:2::1");
  addr("fd00:3::1");
  // UDP
  u16(40000);
  u16(2152);
  u16(udp_len);
  u16(0x1234);  // placeholder checksum; not validated by parse
  // GTP-U: version 1, PT 1, E 1
  b({0x34, 0xFF});
  u16(gtp_tail);
  b({static_cast<int>(teid >> 24), static_cast<int>((teid >> 16) & 0xFF),
     static_cast<int>((teid >> 8) & 0xFF), static_cast<int>(teid & 0xFF)});
  // seq / n-pdu / next ext = PDU session container
  b({0, 0, 0, 0x85});
  // ext: len 1, UL pdu type, QFI, no further ext
  b({1, 0x10, qfi & 0x3F, 0});
  f.insert(f.end(), inner.begin(), inner.end());
  return f;
}

// Independent inner UDP/IPv6 packet, same literal style.
inline Bytes oracle_inner_udp(const char* src, const char* dst, uint16_t sport,
                              uint16_t dport, const Bytes& payload) {
  Bytes f;
  auto u16 = [&](size_t v) {
    f.push_back(static_cast<uint8_t>(v >> 8));
    f.push_back(static_cast<uint8_t>(v & 0xFF));
  };
  auto addr = [&](const char* a) {
    Ipv6Addr p = Ipv6Addr::parse(a);
    f.insert(f.end(), p.octets.begin(), p.octets.end());
  };
  f.push_back(0x60);
  f.push_back(0);
  u16(0);
  u16(8 + payload.size());
  f.push_back(17);
  f.push_back(64);
  addr(src);
  addr(dst);
  u16(sport);
  u16(dport);
  u16(8 + payload.size());
  u16(0);
  f.insert(f.end(), payload.begin(), payload.end());
  return f;
}

// Randomized generator frames used by the round-trip property suites.
struct FrameGen {
  std::mt19937 rng;

  explicit FrameGen(uint32_t seed) : rng(seed) {}

  Bytes payload(size_t max_len) {
    std::uniform_int_distribution<size_t> len(0, max_len);
    std::uniform_int_distribution<int> byte(0, 255);
    Bytes p(len(rng));
    for (auto& x : p) x = static_cast<uint8_t>(byte(rng));
    return p;
  }

  Ipv6Addr address() {
    std::uniform_int_distribution<int> byte(0, 255);
    Ipv6Addr a;
    a.octets[0] = 0xfd;
    for (size_t i = 1; i < 16; ++i) a.octets[i] = static_cast<uint8_t>(byte(rng));
    return a;
  }

  Bytes inner_packet() {
    std::uniform_int_distribution<int> pick(0, 2);
    std::uniform_int_distribution<int> port(1, 65535);
    Bytes p = payload(1400);
    Ipv6Addr s = address(), d = address();
    switch (pick(rng)) {
      case 0:
        return build_inner_udp(s, d, static_cast<uint16_t>(port(rng)),
                               static_cast<uint16_t>(port(rng)), p);
      case 1:
        return build_inner_tcp(s, d, static_cast<uint16_t>(port(rng)),
                               static_cast<uint16_t>(port(rng)), p);
      default:
        return build_inner_icmp6(s, d, 128, 0, p);
    }
  }

  // Full RAN-encapsulated Ethernet frame with randomized TEID/QFI.
  Bytes ran_frame() {
    std::uniform_int_distribution<uint32_t> teid(1, 0xFFFFFFFF);
    std::uniform_int_distribution<int> qfi(0, 63);
    std::uniform_int_distribution<int> with_qfi(0, 1);
    std::optional<uint8_t> q;
    if (with_qfi(rng)) q = static_cast<uint8_t>(qfi(rng));
    Bytes ip = gtp_encapsulate(address(), address(), teid(rng), q, inner_packet());
    ByteWriter w;
    write_eth(w, EthernetHeader{{}, {}, kEtherTypeIpv6});
    w.raw(ip);
    return w.take();
  }
};

}  // namespace inca::testutil
