#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "inca/pkt_codec.hpp"

namespace inca {

struct NotGtpTraffic : std::runtime_error {
  NotGtpTraffic() : std::runtime_error("frame carries no GTP-U layer") {}
};
struct DuplicateRuleId : std::runtime_error {
  explicit DuplicateRuleId(uint32_t id)
      : std::runtime_error("duplicate rule id " + std::to_string(id)) {}
};
struct UnknownRuleId : std::runtime_error {
  explicit UnknownRuleId(uint32_t id)
      : std::runtime_error("unknown rule id " + std::to_string(id)) {}
};

/// Traffic identification key: tunnel fields plus the inner 5-tuple.
struct MatchKey {
  uint32_t teid = 0;
  uint8_t qfi = 0;          // 0 when no PDU session container
  uint16_t slice_id = 0;    // 0 when the TEID is unmapped
  Ipv6Addr inner_src;
  Ipv6Addr inner_dst;
  uint8_t inner_proto = 0;
  uint16_t inner_src_port = 0;  // 0 for port-less protocols
  uint16_t inner_dst_port = 0;

  bool operator==(const MatchKey&) const = default;
};

/// Exact-or-any match on a scalar field.
struct ValueMatch {
  bool any = true;
  uint32_t value = 0;

  static ValueMatch exact(uint32_t v) { return {false, v}; }
  bool matches(uint32_t v) const { return any || v == value; }
  bool operator==(const ValueMatch&) const = default;
};

/// Any / exact / prefix match on an address field.
struct AddrMatch {
  bool any = true;
  Ipv6Addr value;
  uint8_t prefix_len = 128;

  static AddrMatch exact(const Ipv6Addr& a) { return {false, a, 128}; }
  static AddrMatch prefix(const Ipv6Addr& a, uint8_t len) { return {false, a, len}; }
  bool matches(const Ipv6Addr& a) const {
    return any || a.matches_prefix(value, prefix_len);
  }
  bool operator==(const AddrMatch&) const = default;
};

struct RuleMatch {
  ValueMatch teid, qfi, slice, proto, sport, dport;
  AddrMatch src, dst;

  bool matches(const MatchKey& k) const {
    return teid.matches(k.teid) && qfi.matches(k.qfi) &&
           slice.matches(k.slice_id) && proto.matches(k.inner_proto) &&
           sport.matches(k.inner_src_port) && dport.matches(k.inner_dst_port) &&
           src.matches(k.inner_src) && dst.matches(k.inner_dst);
  }
  bool operator==(const RuleMatch&) const = default;
};

/// Ordered NF path for one chain, excluding the return SID.
struct ChainPolicy {
  std::string chain_name;
  std::vector<Ipv6Addr> segments;

  bool operator==(const ChainPolicy&) const = default;
};

struct Rule {
  uint32_t rule_id = 0;
  int32_t priority = 0;   // higher wins; ties broken by lowest rule_id
  RuleMatch match;
  ChainPolicy action;

  bool operator==(const Rule&) const = default;
};

struct LookupResult {
  uint32_t rule_id;
  ChainPolicy policy;
};

/// Priority-ordered match-action table. Rules are kept sorted by
/// (priority desc, rule_id asc) so lookup returns the first hit.
class RuleTable {
 public:
  void add_rule(const Rule& rule);
  void remove_rule(uint32_t rule_id);
  bool has_rule(uint32_t rule_id) const;
  std::optional<LookupResult> lookup(const MatchKey& key) const;

  const std::vector<Rule>& rules() const { return rules_; }
  std::map<uint32_t, uint16_t>& teid_to_slice() { return teid_to_slice_; }
  const std::map<uint32_t, uint16_t>& teid_to_slice() const { return teid_to_slice_; }

  bool operator==(const RuleTable&) const = default;

 private:
  std::vector<Rule> rules_;
  std::map<uint32_t, uint16_t> teid_to_slice_;
};

/// Pulls the identification key out of a parsed GTP-U frame.
/// Throws NotGtpTraffic when the frame has no GTP-U or inner layer.
MatchKey extract_key(const ParsedPacket& pkt,
                     const std::map<uint32_t, uint16_t>& teid_to_slice);

}  // namespace inca
