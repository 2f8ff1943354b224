#include <doctest.h>

#include <random>

#include "inca/classifier.hpp"
#include "inca/pipeline.hpp"
#include "test_util.hpp"

using namespace inca;
using namespace inca::testutil;

namespace {

ChainPolicy chain_a() {
  return {"chain-a", {Ipv6Addr::parse("fd00:a::1"), Ipv6Addr::parse("fd00:b::1")}};
}
ChainPolicy chain_b() {
  return {"chain-b", {Ipv6Addr::parse("fd00:a::1"), Ipv6Addr::parse("fd00:c::1")}};
}

Rule qfi_rule(uint32_t id, int32_t prio, uint8_t qfi, ChainPolicy chain) {
  Rule r{id, prio, {}, std::move(chain)};
  r.match.qfi = ValueMatch::exact(qfi);
  return r;
}

Rule proto_rule(uint32_t id, int32_t prio, uint8_t proto, ChainPolicy chain) {
  Rule r{id, prio, {}, std::move(chain)};
  r.match.proto = ValueMatch::exact(proto);
  return r;
}

// Independent linear-scan oracle: max priority, ties to lowest rule id.
std::optional<uint32_t> oracle_lookup(const std::vector<Rule>& rules,
                                      const MatchKey& key) {
  const Rule* best = nullptr;
  for (const Rule& r : rules) {
    if (!r.match.matches(key)) continue;
    if (!best || r.priority > best->priority ||
        (r.priority == best->priority && r.rule_id < best->rule_id))
      best = &r;
  }
  return best ? std::optional(best->rule_id) : std::nullopt;
}

}  // namespace

TEST_CASE("extract_key reads tunnel fields and the inner 5-tuple") {
  Bytes inner = build_inner_udp(Ipv6Addr::parse("fd00:1::2"),
                                Ipv6Addr::parse("fd00:4::2"), 5000, 80, Bytes(10, 1));
  Bytes ip = gtp_encapsulate(Ipv6Addr::parse("fd00:2::1"),
                             Ipv6Addr::parse("fd00:3::1"), 100, uint8_t{1}, inner);
  ParsedPacket pkt = parse_frame(rebuild_l2(ip, {}, {}));
  std::map<uint32_t, uint16_t> slice_map{{100, 7}};
  MatchKey k = extract_key(pkt, slice_map);
  CHECK(k.teid == 100);
  CHECK(k.qfi == 1);
  CHECK(k.slice_id == 7);
  CHECK(k.inner_src == Ipv6Addr::parse("fd00:1::2"));
  CHECK(k.inner_dst == Ipv6Addr::parse("fd00:4::2"));
  CHECK(k.inner_proto == 17);
  CHECK(k.inner_src_port == 5000);
  CHECK(k.inner_dst_port == 80);
}

TEST_CASE("missing PDU session container defaults QFI to 0") {
  FrameGen gen(5);
  Bytes ip = gtp_encapsulate(gen.address(), gen.address(), 8, std::nullopt,
                             build_inner_udp(gen.address(), gen.address(), 1, 2, {}));
  ParsedPacket pkt = parse_frame(rebuild_l2(ip, {}, {}));
  MatchKey k = extract_key(pkt, {});
  CHECK(k.qfi == 0);
  CHECK(k.slice_id == 0);  // unmapped TEID
}

TEST_CASE("ICMPv6 inner packets carry zero ports") {
  FrameGen gen(6);
  Bytes inner = build_inner_icmp6(gen.address(), gen.address(), 128, 0, Bytes(4, 9));
  Bytes ip = gtp_encapsulate(gen.address(), gen.address(), 8, uint8_t{0}, inner);
  MatchKey k = extract_key(parse_frame(rebuild_l2(ip, {}, {})), {});
  CHECK(k.inner_proto == 58);
  CHECK(k.inner_src_port == 0);
  CHECK(k.inner_dst_port == 0);
}

TEST_CASE("non-GTP frames raise NotGtpTraffic") {
  Bytes f = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0x08, 0x00};
  CHECK_THROWS_AS(extract_key(parse_frame(f), {}), NotGtpTraffic);
}

TEST_CASE("QFI rule and proto rule steer as in the PoC") {
  RuleTable t;
  t.add_rule(qfi_rule(1, 10, 1, chain_a()));
  t.add_rule(proto_rule(2, 10, 58, chain_b()));

  MatchKey dash;
  dash.qfi = 1;
  dash.inner_proto = 17;
  auto r = t.lookup(dash);
  REQUIRE(r);
  CHECK(r->rule_id == 1);

  MatchKey icmp;
  icmp.qfi = 0;
  icmp.inner_proto = 58;
  r = t.lookup(icmp);
  REQUIRE(r);
  CHECK(r->rule_id == 2);

  CHECK(!RuleTable{}.lookup(dash));
}

TEST_CASE("add and remove are inverses; duplicates and unknowns rejected") {
  RuleTable t;
  t.add_rule(qfi_rule(1, 5, 3, chain_a()));
  MatchKey k;
  k.qfi = 3;
  CHECK(t.lookup(k));
  CHECK_THROWS_AS(t.add_rule(qfi_rule(1, 9, 3, chain_b())), DuplicateRuleId);
  t.remove_rule(1);
  CHECK(!t.lookup(k));
  CHECK_THROWS_AS(t.remove_rule(1), UnknownRuleId);
}

TEST_CASE("equal priority ties break to the lowest rule id, both insert orders") {
  MatchKey k;
  k.qfi = 2;
  for (bool reversed : {false, true}) {
    RuleTable t;
    Rule a = qfi_rule(3, 10, 2, chain_a());
    Rule b = qfi_rule(8, 10, 2, chain_b());
    if (reversed) {
      t.add_rule(b);
      t.add_rule(a);
    } else {
      t.add_rule(a);
      t.add_rule(b);
    }
    auto r = t.lookup(k);
    REQUIRE(r);
    CHECK(r->rule_id == 3);
    CHECK(oracle_lookup({a, b}, k) == 3);
  }
}

TEST_CASE("prefix matching applies only to address fields") {
  Rule r{1, 0, {}, chain_a()};
  r.match.src = AddrMatch::prefix(Ipv6Addr::parse("fd00:1::"), 32);
  RuleTable t;
  t.add_rule(r);
  MatchKey k;
  k.inner_src = Ipv6Addr::parse("fd00:1::beef");
  CHECK(t.lookup(k));
  k.inner_src = Ipv6Addr::parse("fd00:2::beef");
  CHECK(!t.lookup(k));
}

namespace {

Rule random_rule(std::mt19937& rng, uint32_t id) {
  std::uniform_int_distribution<int> prio(0, 7);
  std::uniform_int_distribution<int> coin(0, 3);
  std::uniform_int_distribution<int> small(0, 3);
  Rule r{id, prio(rng), {}, {"c", {Ipv6Addr::parse("fd00:a::1")}}};
  // Narrow value domains so matches actually occur.
  if (coin(rng) == 0) r.match.teid = ValueMatch::exact(small(rng));
  if (coin(rng) == 0) r.match.qfi = ValueMatch::exact(small(rng));
  if (coin(rng) == 0) r.match.slice = ValueMatch::exact(small(rng));
  if (coin(rng) == 0) r.match.proto = ValueMatch::exact(small(rng) == 0 ? 17 : 58);
  if (coin(rng) == 0) r.match.sport = ValueMatch::exact(small(rng));
  if (coin(rng) == 0) r.match.dport = ValueMatch::exact(small(rng));
  if (coin(rng) == 0) {
    Ipv6Addr a{};
    a.octets[0] = 0xfd;
    a.octets[15] = static_cast<uint8_t>(small(rng));
    std::uniform_int_distribution<int> len(0, 128);
    r.match.src = AddrMatch::prefix(a, static_cast<uint8_t>(len(rng)));
  }
  return r;
}

MatchKey random_key(std::mt19937& rng) {
  std::uniform_int_distribution<int> small(0, 3);
  MatchKey k;
  k.teid = small(rng);
  k.qfi = static_cast<uint8_t>(small(rng));
  k.slice_id = static_cast<uint16_t>(small(rng));
  k.inner_proto = small(rng) == 0 ? 17 : 58;
  k.inner_src_port = static_cast<uint16_t>(small(rng));
  k.inner_dst_port = static_cast<uint16_t>(small(rng));
  k.inner_src.octets[0] = 0xfd;
  k.inner_src.octets[15] = static_cast<uint8_t>(small(rng));
  return k;
}

}  // namespace

TEST_CASE("lookup equals the linear-scan oracle over 10k randomized trials") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<size_t> table_size(0, 256);
  for (int trial = 0; trial < 10000; ++trial) {
    size_t n = table_size(rng) % 40;  // small tables for most trials
    if (trial % 50 == 0) n = table_size(rng);
    std::vector<Rule> rules;
    RuleTable t;
    for (uint32_t id = 1; id <= n; ++id) {
      Rule r = random_rule(rng, id);
      rules.push_back(r);
      t.add_rule(r);
    }
    MatchKey k = random_key(rng);
    auto got = t.lookup(k);
    auto want = oracle_lookup(rules, k);
    CHECK(bool(got) == bool(want));
    if (got && want) CHECK(got->rule_id == *want);
  }
}

TEST_CASE("insertion order never changes lookup results") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Rule> rules;
    for (uint32_t id = 1; id <= 16; ++id) rules.push_back(random_rule(rng, id));
    RuleTable fwd, rev;
    for (const auto& r : rules) fwd.add_rule(r);
    for (auto it = rules.rbegin(); it != rules.rend(); ++it) rev.add_rule(*it);
    for (int i = 0; i < 20; ++i) {
      MatchKey k = random_key(rng);
      auto a = fwd.lookup(k);
      auto b = rev.lookup(k);
      CHECK(bool(a) == bool(b));
      if (a && b) CHECK(a->rule_id == b->rule_id);
    }
  }
}

TEST_CASE("adding a rule never disturbs keys it does not match") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    RuleTable t;
    for (uint32_t id = 1; id <= 8; ++id) t.add_rule(random_rule(rng, id));
    MatchKey k = random_key(rng);
    auto before = t.lookup(k);
    Rule extra = random_rule(rng, 1000);
    t.add_rule(extra);
    auto after = t.lookup(k);
    if (!extra.match.matches(k)) {
      CHECK(bool(before) == bool(after));
      if (before && after) CHECK(before->rule_id == after->rule_id);
    }
  }
}
