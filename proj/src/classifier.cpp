#include "inca/classifier.hpp"

#include <algorithm>

namespace inca {

namespace {

bool order_before(const Rule& a, const Rule& b) {
  if (a.priority != b.priority) return a.priority > b.priority;
  return a.rule_id < b.rule_id;
}

}  // namespace

void RuleTable::add_rule(const Rule& rule) {
  if (has_rule(rule.rule_id)) throw DuplicateRuleId(rule.rule_id);
  auto pos = std::upper_bound(rules_.begin(), rules_.end(), rule, order_before);
  rules_.insert(pos, rule);
}

void RuleTable::remove_rule(uint32_t rule_id) {
  auto it = std::find_if(rules_.begin(), rules_.end(),
                         [&](const Rule& r) { return r.rule_id == rule_id; });
  if (it == rules_.end()) throw UnknownRuleId(rule_id);
  rules_.erase(it);
}

bool RuleTable::has_rule(uint32_t rule_id) const {
  return std::any_of(rules_.begin(), rules_.end(),
                     [&](const Rule& r) { return r.rule_id == rule_id; });
}

std::optional<LookupResult> RuleTable::lookup(const MatchKey& key) const {
  for (const Rule& r : rules_)
    if (r.match.matches(key)) return LookupResult{r.rule_id, r.action};
  return std::nullopt;
}

MatchKey extract_key(const ParsedPacket& pkt,
                     const std::map<uint32_t, uint16_t>& teid_to_slice) {
  if (!pkt.gtpu || !pkt.inner) throw NotGtpTraffic();
  MatchKey k;
  k.teid = pkt.gtpu->teid;
  k.qfi = pkt.pdu_container ? pkt.pdu_container->qfi : 0;
  if (auto it = teid_to_slice.find(k.teid); it != teid_to_slice.end())
    k.slice_id = it->second;
  const InnerPacket& in = *pkt.inner;
  k.inner_src = in.ipv6.src;
  k.inner_dst = in.ipv6.dst;
  k.inner_proto = in.l4_proto;
  if (const auto* u = std::get_if<UdpHeader>(&in.l4)) {
    k.inner_src_port = u->src_port;
    k.inner_dst_port = u->dst_port;
  } else if (const auto* t = std::get_if<TcpSummary>(&in.l4)) {
    k.inner_src_port = t->src_port;
    k.inner_dst_port = t->dst_port;
  }
  return k;
}

}  // namespace inca
