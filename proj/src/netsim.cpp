#include "inca/netsim.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace inca {

using json = nlohmann::ordered_json;

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Ue: return "ue";
    case NodeKind::Ran: return "ran";
    case NodeKind::Inca: return "inca";
    case NodeKind::Nf: return "nf";
    case NodeKind::Upf: return "upf";
    case NodeKind::Dn: return "dn";
  }
  return "?";
}

const NodeSpec* Topology::find(const std::string& name) const {
  for (const auto& n : nodes)
    if (n.name == name) return &n;
  return nullptr;
}

namespace {

NodeKind parse_kind(const std::string& s) {
  if (s == "ue") return NodeKind::Ue;
  if (s == "ran") return NodeKind::Ran;
  if (s == "inca") return NodeKind::Inca;
  if (s == "nf") return NodeKind::Nf;
  if (s == "upf") return NodeKind::Upf;
  if (s == "dn") return NodeKind::Dn;
  throw SchemaError("unknown node kind '" + s + "'");
}

NfBehavior parse_behavior(const json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "tap") return {NfBehavior::Kind::Tap, 0};
    if (s == "pass") return {NfBehavior::Kind::Pass, 0};
    throw SchemaError("unknown behavior '" + s + "'");
  }
  if (j.is_object() && j.contains("drop_proto"))
    return {NfBehavior::Kind::DropMatching, j.at("drop_proto").get<uint8_t>()};
  throw SchemaError("behavior must be \"tap\", \"pass\" or {\"drop_proto\":N}");
}

void check_connected(const Topology& topo) {
  if (topo.nodes.empty()) return;
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& l : topo.links) {
    adj[l.a].push_back(l.b);
    adj[l.b].push_back(l.a);
  }
  std::vector<std::string> stack{topo.nodes[0].name};
  std::map<std::string, bool> seen{{topo.nodes[0].name, true}};
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    for (const auto& nxt : adj[cur])
      if (!seen[nxt]) {
        seen[nxt] = true;
        stack.push_back(nxt);
      }
  }
  for (const auto& n : topo.nodes)
    if (!seen[n.name]) throw SchemaError("topology is not connected: node '" +
                                         n.name + "' is unreachable");
}

}  // namespace

Topology load_topology(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("topology JSON: ") + e.what());
  }
  Topology topo;
  try {
    for (const auto& jn : doc.at("nodes")) {
      NodeSpec n;
      n.name = jn.at("name").get<std::string>();
      n.kind = parse_kind(jn.at("kind").get<std::string>());
      for (const auto& a : jn.value("addresses", json::array()))
        n.addresses.push_back(Ipv6Addr::parse(a.get<std::string>()));
      if (jn.contains("sid")) n.sid = Ipv6Addr::parse(jn.at("sid").get<std::string>());
      if (jn.contains("behavior")) n.behavior = parse_behavior(jn.at("behavior"));
      if (jn.contains("teid")) n.teid = jn.at("teid").get<uint32_t>();
      if (jn.contains("qfi")) {
        uint32_t q = jn.at("qfi").get<uint32_t>();
        if (q > 63) throw SchemaError("qfi out of range at node " + n.name);
        n.qfi = static_cast<uint8_t>(q);
      }
      for (const auto& jr : jn.value("routes", json::array())) {
        RouteEntry r;
        r.prefix = Ipv6Addr::parse(jr.at("prefix").get<std::string>());
        r.prefix_len = jr.at("len").get<uint8_t>();
        r.via = jr.at("via").get<std::string>();
        n.routes.push_back(r);
      }
      topo.nodes.push_back(std::move(n));
    }
    for (const auto& jl : doc.at("links")) {
      LinkSpec l;
      l.a = jl.at("a").get<std::string>();
      l.b = jl.at("b").get<std::string>();
      l.mac_a = MacAddr::parse(jl.value("mac_a", "00:00:00:00:00:00"));
      l.mac_b = MacAddr::parse(jl.value("mac_b", "00:00:00:00:00:00"));
      topo.links.push_back(l);
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("topology JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("topology JSON: ") + e.what());
  }

  // Referential checks.
  for (const auto& l : topo.links) {
    if (!topo.find(l.a)) throw UnknownNodeReference("link endpoint '" + l.a + "'");
    if (!topo.find(l.b)) throw UnknownNodeReference("link endpoint '" + l.b + "'");
  }
  for (const auto& n : topo.nodes)
    for (const auto& r : n.routes)
      if (!topo.find(r.via))
        throw UnknownNodeReference("route via '" + r.via + "' at node " + n.name);
  std::map<Ipv6Addr, std::string> sids;
  for (const auto& n : topo.nodes) {
    if (!n.sid) continue;
    auto [it, fresh] = sids.emplace(*n.sid, n.name);
    if (!fresh)
      throw DuplicateSid("SID " + n.sid->str() + " on both " + it->second +
                         " and " + n.name);
  }
  for (const auto& n : topo.nodes) {
    if ((n.kind == NodeKind::Inca || n.kind == NodeKind::Nf) && !n.sid)
      throw SchemaError("node '" + n.name + "' needs a sid");
    if (n.addresses.empty() && n.kind != NodeKind::Nf)
      throw SchemaError("node '" + n.name + "' needs at least one address");
  }
  check_connected(topo);
  return topo;
}

std::vector<Injection> load_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("scenario JSON: ") + e.what());
  }
  std::vector<Injection> out;
  try {
    size_t i = 0;
    for (const auto& ji : doc.at("injections")) {
      Injection inj;
      inj.name = ji.value("name", "flow" + std::to_string(i));
      inj.at_node = ji.at("at").get<std::string>();
      if (ji.contains("raw_hex")) {
        inj.raw = from_hex(ji.at("raw_hex").get<std::string>());
      } else {
        const auto& jg = ji.at("gen");
        GenSpec g;
        g.src = Ipv6Addr::parse(jg.at("src").get<std::string>());
        g.dst = Ipv6Addr::parse(jg.at("dst").get<std::string>());
        g.proto = jg.value("proto", kProtoUdp);
        g.sport = jg.value("sport", 0);
        g.dport = jg.value("dport", 0);
        g.payload_len = jg.value("payload_len", 0);
        g.count = jg.value("count", 1u);
        g.gap_us = jg.value("gap_us", 0ull);
        inj.gen = g;
      }
      out.push_back(std::move(inj));
      ++i;
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("scenario JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("scenario JSON: ") + e.what());
  }
  return out;
}

Bytes ran_encapsulate(const NodeSpec& node, const Ipv6Addr& upf_addr,
                      std::span<const uint8_t> inner) {
  if (node.kind != NodeKind::Ran || !node.teid)
    throw MissingTunnelConfig(node.name);
  return gtp_encapsulate(node.addresses.at(0), upf_addr, *node.teid, node.qfi,
                         inner);
}

Bytes upf_decapsulate(const NodeSpec& node, std::span<const uint8_t> ipv6_packet) {
  Ipv6Addr dst;
  if (ipv6_packet.size() < 40) throw NotGtp();
  std::memcpy(dst.octets.data(), ipv6_packet.data() + 24, 16);
  if (std::find(node.addresses.begin(), node.addresses.end(), dst) ==
      node.addresses.end())
    throw WrongDestination();
  return gtp_decapsulate(ipv6_packet);
}

// ---------------------------------------------------------------------------
// Simulator

Simulator::Simulator(Topology topology, const RulesConfig& rules)
    : topo_(std::move(topology)) {
  adjacency_.resize(topo_.nodes.size());
  for (size_t i = 0; i < topo_.nodes.size(); ++i)
    name_to_node_[topo_.nodes[i].name] = i;
  for (size_t li = 0; li < topo_.links.size(); ++li) {
    adjacency_[name_to_node_.at(topo_.links[li].a)].push_back(li);
    adjacency_[name_to_node_.at(topo_.links[li].b)].push_back(li);
  }
  for (size_t i = 0; i < topo_.nodes.size(); ++i) {
    const NodeSpec& n = topo_.nodes[i];
    if (n.kind == NodeKind::Inca && inca_node_ == SIZE_MAX) {
      inca_node_ = i;
      inca_state_.cfg.inca_sid = *n.sid;
      inca_state_.cfg.outer_src = n.addresses.empty() ? *n.sid : n.addresses[0];
    }
    if (n.kind == NodeKind::Upf && upf_addr_.is_zero())
      upf_addr_ = n.addresses.at(0);
  }
  install_rules(rules, inca_state_);
  for (const auto& l : topo_.links)
    captures_[l.a + "-" + l.b];  // stable key set even for idle links
}

size_t Simulator::node_index(const std::string& name) const {
  auto it = name_to_node_.find(name);
  if (it == name_to_node_.end()) throw UnknownNodeReference(name);
  return it->second;
}

namespace {

Ipv6Addr packet_dst(std::span<const uint8_t> ipv6_pkt) {
  Ipv6Addr a;
  if (ipv6_pkt.size() < 40) return a;
  std::memcpy(a.octets.data(), ipv6_pkt.data() + 24, 16);
  return a;
}

bool node_owns(const NodeSpec& n, const Ipv6Addr& addr) {
  if (n.sid && *n.sid == addr) return true;
  return std::find(n.addresses.begin(), n.addresses.end(), addr) !=
         n.addresses.end();
}

Bytes gen_payload(size_t len, size_t frame_idx) {
  Bytes p(len);
  for (size_t i = 0; i < len; ++i)
    p[i] = static_cast<uint8_t>((i + frame_idx * 7) & 0xFF);
  return p;
}

Bytes build_gen_frame(const GenSpec& g, size_t frame_idx) {
  Bytes payload = gen_payload(g.payload_len, frame_idx);
  switch (g.proto) {
    case kProtoUdp:
      return build_inner_udp(g.src, g.dst, g.sport, g.dport, payload);
    case kProtoTcp:
      return build_inner_tcp(g.src, g.dst, g.sport, g.dport, payload);
    case kProtoIcmpv6:
      return build_inner_icmp6(g.src, g.dst, 128, 0, payload);  // echo request
    default:
      throw SchemaError("generator proto " + std::to_string(g.proto) +
                        " not supported");
  }
}

}  // namespace

std::optional<size_t> Simulator::neighbor_link(size_t node, const Ipv6Addr& dst) const {
  for (size_t li : adjacency_[node]) {
    const LinkSpec& l = topo_.links[li];
    size_t peer = name_to_node_.at(l.a) == node ? name_to_node_.at(l.b)
                                                : name_to_node_.at(l.a);
    if (node_owns(topo_.nodes[peer], dst)) return li;
  }
  return std::nullopt;
}

std::optional<size_t> Simulator::route_link(size_t node, const Ipv6Addr& dst) const {
  const RouteEntry* best = nullptr;
  for (const auto& r : topo_.nodes[node].routes)
    if (dst.matches_prefix(r.prefix, r.prefix_len) &&
        (!best || r.prefix_len > best->prefix_len))
      best = &r;
  if (!best) return std::nullopt;
  size_t via = name_to_node_.at(best->via);
  for (size_t li : adjacency_[node]) {
    const LinkSpec& l = topo_.links[li];
    size_t peer = name_to_node_.at(l.a) == node ? name_to_node_.at(l.b)
                                                : name_to_node_.at(l.a);
    if (peer == via) return li;
  }
  return std::nullopt;
}

void Simulator::transmit(size_t from_node, size_t link,
                         std::span<const uint8_t> ipv6_pkt, const Event& cause) {
  const LinkSpec& l = topo_.links[link];
  bool from_a = name_to_node_.at(l.a) == from_node;
  MacAddr src = from_a ? l.mac_a : l.mac_b;
  MacAddr dst = from_a ? l.mac_b : l.mac_a;
  Bytes frame = rebuild_l2(ipv6_pkt, dst, src);
  captures_[l.a + "-" + l.b].push_back(
      CaptureRecord{static_cast<uint32_t>(now_us_ / 1000000),
                    static_cast<uint32_t>(now_us_ % 1000000), frame});
  Event e;
  e.t = now_us_ + link_latency_us_;
  e.seq = next_seq_++;
  e.kind = Event::Kind::Arrival;
  e.node = from_a ? name_to_node_.at(l.b) : name_to_node_.at(l.a);
  e.link = link;
  e.bytes = std::move(frame);
  e.flow = cause.flow;
  e.frame_idx = cause.frame_idx;
  queue_.push(std::move(e));
}

void Simulator::mark(const Event& e, const std::string& node_name) {
  flows_[e.flow].frames[e.frame_idx].traversal.push_back(node_name);
}

void Simulator::drop(const Event& e, const std::string& node_name,
                     const std::string& counter) {
  auto& fs = flows_[e.flow].frames[e.frame_idx];
  if (!fs.dropped_at) fs.dropped_at = node_name;
  sim_counters_.inc(counter);
}

void Simulator::deliver(const Event& e, size_t node,
                        std::span<const uint8_t> ipv6_pkt) {
  mark(e, topo_.nodes[node].name);
  auto& flow = flows_[e.flow];
  flow.frames[e.frame_idx].delivered = true;
  flow.delivered_pkts.emplace_back(ipv6_pkt.begin(), ipv6_pkt.end());
}

void Simulator::forward(size_t node, std::span<const uint8_t> ipv6_pkt,
                        const Event& cause, const char* drop_counter) {
  Ipv6Addr dst = packet_dst(ipv6_pkt);
  std::optional<size_t> link = neighbor_link(node, dst);
  if (!link) link = route_link(node, dst);
  if (!link) {
    drop(cause, topo_.nodes[node].name, drop_counter);
    return;
  }
  transmit(node, *link, ipv6_pkt, cause);
}

void Simulator::inject(const Injection& injection) {
  size_t node = node_index(injection.at_node);
  FlowState flow;
  flow.name = injection.name;
  size_t flow_id = flows_.size();
  uint32_t count = injection.gen ? injection.gen->count : 1;
  uint64_t gap = injection.gen ? injection.gen->gap_us : 0;
  for (uint32_t k = 0; k < count; ++k) {
    Bytes pkt = injection.raw ? *injection.raw : build_gen_frame(*injection.gen, k);
    flow.injected.push_back(pkt);
    flow.frames.emplace_back();
    Event e;
    e.t = now_us_ + k * gap;
    e.seq = next_seq_++;
    e.kind = Event::Kind::Origin;
    e.node = node;
    e.link = SIZE_MAX;
    e.bytes = std::move(pkt);
    e.flow = flow_id;
    e.frame_idx = k;
    queue_.push(std::move(e));
  }
  flows_.push_back(std::move(flow));
}

void Simulator::run_until_idle() {
  while (!queue_.empty()) {
    Event e = queue_.top();
    queue_.pop();
    now_us_ = e.t;
    handle(e);
  }
}

void Simulator::handle(const Event& e) {
  if (e.kind == Event::Kind::Origin) {
    mark(e, topo_.nodes[e.node].name);
    forward(e.node, e.bytes, e, "drop.no_route");
    return;
  }
  switch (topo_.nodes[e.node].kind) {
    case NodeKind::Ue: return handle_ue(e.node, e);
    case NodeKind::Ran: return handle_ran(e.node, e);
    case NodeKind::Inca: return handle_inca(e.node, e);
    case NodeKind::Nf: return handle_nf(e.node, e);
    case NodeKind::Upf: return handle_upf(e.node, e);
    case NodeKind::Dn: return handle_dn(e.node, e);
  }
}

namespace {

std::span<const uint8_t> ip_of(const Bytes& frame) {
  if (frame.size() < 14) return {};
  return std::span<const uint8_t>(frame).subspan(14);
}

}  // namespace

void Simulator::handle_ue(size_t node, const Event& e) {
  deliver(e, node, ip_of(e.bytes));
}

void Simulator::handle_ran(size_t node, const Event& e) {
  const NodeSpec& spec = topo_.nodes[node];
  const LinkSpec& l = topo_.links[e.link];
  size_t peer = name_to_node_.at(l.a) == node ? name_to_node_.at(l.b)
                                              : name_to_node_.at(l.a);
  std::span<const uint8_t> ip = ip_of(e.bytes);
  if (topo_.nodes[peer].kind == NodeKind::Ue) {
    mark(e, spec.name);
    try {
      Bytes tunneled = ran_encapsulate(spec, upf_addr_, ip);
      forward(node, tunneled, e, "drop.no_route");
    } catch (const MissingTunnelConfig&) {
      drop(e, spec.name, "ran." + spec.name + ".missing_tunnel_config");
    }
    return;
  }
  // Core side: downlink GTP terminating here goes back to the UE.
  if (node_owns(spec, packet_dst(ip))) {
    try {
      Bytes inner = gtp_decapsulate(ip);
      mark(e, spec.name);
      forward(node, inner, e, "drop.no_route");
      return;
    } catch (const NotGtp&) {
      deliver(e, node, ip);
      return;
    }
  }
  forward(node, ip, e, "drop.no_route");
}

void Simulator::handle_inca(size_t node, const Event& e) {
  const NodeSpec& spec = topo_.nodes[node];
  const LinkSpec& l = topo_.links[e.link];
  size_t peer = name_to_node_.at(l.a) == node ? name_to_node_.at(l.b)
                                              : name_to_node_.at(l.a);
  PortRole role;
  switch (topo_.nodes[peer].kind) {
    case NodeKind::Ran: role = PortRole::RanFacing; break;
    case NodeKind::Upf: role = PortRole::UpfFacing; break;
    default: role = PortRole::ServiceFacing; break;
  }
  std::span<const uint8_t> ip = ip_of(e.bytes);

  // Between-NF transit: SRv6 frames not addressed to our SID are routed
  // normally, like any non-endpoint IPv6 hop.
  if (role == PortRole::ServiceFacing &&
      packet_dst(ip) != inca_state_.cfg.inca_sid) {
    sim_counters_.inc("inca.transit");
    forward(node, ip, e, "drop.no_route");
    return;
  }

  mark(e, spec.name);
  Verdict v = process(inca_state_, role, e.bytes);
  if (!v.is_emit()) {
    drop(e, spec.name, std::string("inca.drop.") + drop_reason_name(v.reason));
    return;
  }
  std::span<const uint8_t> out_ip = ip_of(v.frame);
  switch (v.port) {
    case PortRole::RanFacing:
    case PortRole::UpfFacing: {
      NodeKind want = v.port == PortRole::RanFacing ? NodeKind::Ran : NodeKind::Upf;
      for (size_t li : adjacency_[node]) {
        const LinkSpec& lk = topo_.links[li];
        size_t p = name_to_node_.at(lk.a) == node ? name_to_node_.at(lk.b)
                                                  : name_to_node_.at(lk.a);
        if (topo_.nodes[p].kind == want) {
          transmit(node, li, out_ip, e);
          return;
        }
      }
      drop(e, spec.name, "drop.no_route");
      return;
    }
    case PortRole::ServiceFacing:
      forward(node, out_ip, e, "drop.no_route");
      return;
  }
}

void Simulator::handle_nf(size_t node, const Event& e) {
  const NodeSpec& spec = topo_.nodes[node];
  std::span<const uint8_t> ip = ip_of(e.bytes);
  if (!spec.sid || packet_dst(ip) != *spec.sid) {
    forward(node, ip, e, "drop.no_route");
    return;
  }

  Bytes after_end;
  try {
    after_end = end_process(ip, *spec.sid);
  } catch (const NoMoreSegments&) {
    mark(e, spec.name);
    drop(e, spec.name, "nf." + spec.name + ".drop.no_more_segments");
    return;
  } catch (const HopLimitExceeded&) {
    mark(e, spec.name);
    drop(e, spec.name, "nf." + spec.name + ".drop.hop_limit");
    return;
  } catch (const std::exception&) {
    mark(e, spec.name);
    drop(e, spec.name, "nf." + spec.name + ".drop.malformed");
    return;
  }
  mark(e, spec.name);

  NfBehavior behavior = spec.behavior.value_or(NfBehavior{});
  switch (behavior.kind) {
    case NfBehavior::Kind::Tap:
      captures_["tap-" + spec.name].push_back(
          CaptureRecord{static_cast<uint32_t>(now_us_ / 1000000),
                        static_cast<uint32_t>(now_us_ % 1000000), e.bytes});
      break;
    case NfBehavior::Kind::Pass:
      break;
    case NfBehavior::Kind::DropMatching: {
      uint8_t innermost = 0;
      try {
        ParsedPacket pkt = parse_frame(rebuild_l2(after_end, MacAddr{}, MacAddr{}));
        if (pkt.inner)
          innermost = pkt.inner->l4_proto;
        else if (pkt.tunnel_ipv6)
          innermost = pkt.tunnel_ipv6->next_header;
        else if (pkt.outer_ipv6)
          innermost = pkt.outer_ipv6->next_header;
      } catch (const std::exception&) {
      }
      if (innermost == behavior.drop_proto) {
        drop(e, spec.name, "nf." + spec.name + ".dropped");
        return;
      }
      break;
    }
  }
  forward(node, after_end, e, "drop.no_route");
}

void Simulator::handle_upf(size_t node, const Event& e) {
  const NodeSpec& spec = topo_.nodes[node];
  std::span<const uint8_t> ip = ip_of(e.bytes);
  if (!node_owns(spec, packet_dst(ip))) {
    forward(node, ip, e, "drop.no_route");
    return;
  }
  try {
    Bytes inner = upf_decapsulate(spec, ip);
    mark(e, spec.name);
    forward(node, inner, e, "drop.no_route");
  } catch (const std::exception&) {
    deliver(e, node, ip);
  }
}

void Simulator::handle_dn(size_t node, const Event& e) {
  const NodeSpec& spec = topo_.nodes[node];
  std::span<const uint8_t> ip = ip_of(e.bytes);
  if (node_owns(spec, packet_dst(ip))) {
    deliver(e, node, ip);
    return;
  }
  forward(node, ip, e, "drop.no_route");
}

ScenarioReport Simulator::report() const {
  ScenarioReport rep;
  for (const auto& flow : flows_) {
    FlowReport fr;
    fr.name = flow.name;
    fr.injected = static_cast<uint32_t>(flow.frames.size());
    if (!flow.frames.empty()) fr.traversal = flow.frames[0].traversal;
    for (const auto& f : flow.frames) {
      if (f.delivered) ++fr.delivered;
      if (f.dropped_at && !fr.dropped_at) fr.dropped_at = f.dropped_at;
    }
    fr.delivered_packets = flow.delivered_pkts;
    fr.injected_packets = flow.injected;
    rep.flows.push_back(std::move(fr));
  }
  rep.counters = inca_state_.counters;
  for (const auto& [name, value] : sim_counters_.values)
    rep.counters.values[name] += value;
  rep.captures = captures_;
  return rep;
}

std::string report_to_json(const ScenarioReport& report) {
  json doc;
  doc["flows"] = json::array();
  for (const auto& f : report.flows) {
    json jf;
    jf["name"] = f.name;
    jf["traversal"] = f.traversal;
    jf["injected"] = f.injected;
    jf["delivered"] = f.delivered;
    jf["dropped_at"] = f.dropped_at ? json(*f.dropped_at) : json(nullptr);
    doc["flows"].push_back(std::move(jf));
  }
  json jc = json::object();
  for (const auto& [name, value] : report.counters.values) jc[name] = value;
  doc["counters"] = std::move(jc);
  return doc.dump(2) + "\n";
}

ScenarioReport run_scenario(const Topology& topology, const std::string& rules_text,
                            const std::vector<Injection>& injections) {
  RulesConfig rules = load_rules_file(rules_text);
  Simulator sim(topology, rules);
  for (const auto& inj : injections) sim.inject(inj);
  sim.run_until_idle();
  return sim.report();
}

}  // namespace inca
