#include <doctest.h>

#include "inca/pipeline.hpp"
#include "test_util.hpp"

using namespace inca;
using namespace inca::testutil;

namespace {

PipelineState poc_state() {
  PipelineState s;
  s.cfg.outer_src = Ipv6Addr::parse("fd00:10::1");
  s.cfg.inca_sid = Ipv6Addr::parse("fd00:10::1");
  ChainPolicy dash{"dash", {Ipv6Addr::parse("fd00:a::1"), Ipv6Addr::parse("fd00:b::1")}};
  s.chains[dash.chain_name] = dash;
  Rule r{1, 10, {}, dash};
  r.match.qfi = ValueMatch::exact(1);
  s.table.add_rule(r);
  return s;
}

Bytes ran_frame(std::optional<uint8_t> qfi, uint8_t proto = kProtoUdp) {
  Ipv6Addr ue = Ipv6Addr::parse("fd00:1::2");
  Ipv6Addr dn = Ipv6Addr::parse("fd00:4::2");
  Bytes inner = proto == kProtoIcmpv6
                    ? build_inner_icmp6(ue, dn, 128, 0, Bytes(8, 1))
                    : build_inner_udp(ue, dn, 5000, 80, Bytes(64, 2));
  Bytes ip = gtp_encapsulate(Ipv6Addr::parse("fd00:2::1"),
                             Ipv6Addr::parse("fd00:3::1"), 100, qfi, inner);
  return rebuild_l2(ip, {}, {});
}

}  // namespace

TEST_CASE("matched RAN frame is steered into the chain") {
  PipelineState s = poc_state();
  Bytes f = ran_frame(uint8_t{1});
  Verdict v = process(s, PortRole::RanFacing, f);
  REQUIRE(v.is_emit());
  CHECK(v.port == PortRole::ServiceFacing);

  ParsedPacket pkt = parse_frame(v.frame);
  REQUIRE(pkt.srh);
  CHECK(pkt.outer_ipv6->dst == Ipv6Addr::parse("fd00:a::1"));
  CHECK(pkt.srh->segments_left == 2);
  // Emitted path is chain.segments + the return SID, in order.
  CHECK(pkt.srh->segment_list[2] == Ipv6Addr::parse("fd00:a::1"));
  CHECK(pkt.srh->segment_list[1] == Ipv6Addr::parse("fd00:b::1"));
  CHECK(pkt.srh->segment_list[0] == Ipv6Addr::parse("fd00:10::1"));
  // The whole captured GTP packet rides inside.
  CHECK(Bytes(v.frame.end() - (f.size() - 14), v.frame.end()) ==
        Bytes(f.begin() + 14, f.end()));
  CHECK(s.counters.get("rule.1.hits") == 1);
}

TEST_CASE("unmatched RAN traffic passes through byte-identical") {
  PipelineState s = poc_state();
  Bytes f = ran_frame(std::nullopt);  // QFI absent -> no rule matches
  Verdict v = process(s, PortRole::RanFacing, f);
  REQUIRE(v.is_emit());
  CHECK(v.port == PortRole::UpfFacing);
  CHECK(v.frame == f);
}

TEST_CASE("non-GTP RAN traffic passes through") {
  PipelineState s = poc_state();
  Bytes plain = rebuild_l2(build_inner_udp(Ipv6Addr::parse("fd00:1::2"),
                                           Ipv6Addr::parse("fd00:4::2"), 1, 2, {}),
                           {}, {});
  Verdict v = process(s, PortRole::RanFacing, plain);
  REQUIRE(v.is_emit());
  CHECK(v.port == PortRole::UpfFacing);
  CHECK(v.frame == plain);
}

TEST_CASE("completed chains decap back to the original GTP packet") {
  PipelineState s = poc_state();
  Bytes f = ran_frame(uint8_t{1});
  Verdict out = process(s, PortRole::RanFacing, f);
  REQUIRE(out.is_emit());

  Bytes p(out.frame.begin() + 14, out.frame.end());
  p = end_process(p, Ipv6Addr::parse("fd00:a::1"));
  p = end_process(p, Ipv6Addr::parse("fd00:b::1"));
  Verdict back = process(s, PortRole::ServiceFacing, rebuild_l2(p, {}, {}));
  REQUIRE(back.is_emit());
  CHECK(back.port == PortRole::UpfFacing);
  CHECK(Bytes(back.frame.begin() + 14, back.frame.end()) ==
        Bytes(f.begin() + 14, f.end()));
}

TEST_CASE("service-side frames not terminating at INCA are dropped") {
  PipelineState s = poc_state();
  Bytes f = ran_frame(uint8_t{1});
  Verdict out = process(s, PortRole::RanFacing, f);
  // SL still 2: chain not finished.
  Verdict v = process(s, PortRole::ServiceFacing, out.frame);
  CHECK(!v.is_emit());
  CHECK(v.reason == DropReason::Malformed);
  CHECK(s.counters.get("drop.malformed") == 1);
}

TEST_CASE("downlink is pure pass-through") {
  PipelineState s = poc_state();
  Bytes f = ran_frame(uint8_t{1});
  Verdict v = process(s, PortRole::UpfFacing, f);
  REQUIRE(v.is_emit());
  CHECK(v.port == PortRole::RanFacing);
  CHECK(v.frame == f);
}

TEST_CASE("oversize encapsulation is a counted drop") {
  PipelineState s = poc_state();
  s.mtu = 200;
  Verdict v = process(s, PortRole::RanFacing, ran_frame(uint8_t{1}));
  CHECK(!v.is_emit());
  CHECK(v.reason == DropReason::Oversize);
  CHECK(s.counters.get("drop.oversize") == 1);
}

TEST_CASE("conservation: rx equals tx plus drops") {
  PipelineState s = poc_state();
  FrameGen gen(17);
  for (int i = 0; i < 300; ++i) {
    switch (i % 3) {
      case 0: process(s, PortRole::RanFacing, ran_frame(uint8_t{1})); break;
      case 1: process(s, PortRole::RanFacing, gen.ran_frame()); break;
      default: process(s, PortRole::ServiceFacing, gen.ran_frame()); break;
    }
  }
  uint64_t rx = s.counters.get("rx.ran") + s.counters.get("rx.upf") +
                s.counters.get("rx.svc");
  uint64_t tx = s.counters.get("tx.ran") + s.counters.get("tx.upf") +
                s.counters.get("tx.svc");
  uint64_t drops = 0;
  for (const auto& [name, v] : s.counters.values)
    if (name.rfind("drop.", 0) == 0) drops += v;
  CHECK(rx == 300);
  CHECK(tx + drops == rx);
}

TEST_CASE("determinism: identical inputs give identical verdicts") {
  Bytes f = ran_frame(uint8_t{1});
  PipelineState a = poc_state(), b = poc_state();
  Verdict va = process(a, PortRole::RanFacing, f);
  Verdict vb = process(b, PortRole::RanFacing, f);
  CHECK(va.is_emit() == vb.is_emit());
  CHECK(va.frame == vb.frame);
  CHECK(a.counters.values == b.counters.values);
}

TEST_CASE("rebuild_l2 framing") {
  Bytes ip = build_inner_udp(Ipv6Addr::parse("fd00:1::1"),
                             Ipv6Addr::parse("fd00:1::2"), 1, 2, Bytes(5, 0));
  MacAddr dst = MacAddr::parse("02:00:00:00:01:02");
  MacAddr src = MacAddr::parse("02:00:00:00:01:01");
  Bytes f = rebuild_l2(ip, dst, src);
  CHECK(f.size() == 14 + ip.size());
  CHECK(f[12] == 0x86);
  CHECK(f[13] == 0xDD);
  CHECK(Bytes(f.begin(), f.begin() + 6) ==
        Bytes(dst.octets.begin(), dst.octets.end()));

  Bytes zero = rebuild_l2(ip, {}, {});
  CHECK(Bytes(zero.begin(), zero.begin() + 12) == Bytes(12, 0));
}
