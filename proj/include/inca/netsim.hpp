#pragma once

#include <queue>

#include "inca/ctrl.hpp"
#include "inca/pcap.hpp"
#include "inca/pipeline.hpp"
#include "inca/pktgen.hpp"

namespace inca {

struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& w) : std::runtime_error(w) {}
};
struct UnknownNodeReference : std::runtime_error {
  explicit UnknownNodeReference(const std::string& w) : std::runtime_error(w) {}
};
struct DuplicateSid : std::runtime_error {
  explicit DuplicateSid(const std::string& w) : std::runtime_error(w) {}
};
struct MissingTunnelConfig : std::runtime_error {
  explicit MissingTunnelConfig(const std::string& node)
      : std::runtime_error("RAN node '" + node + "' has no TEID configured") {}
};

enum class NodeKind { Ue, Ran, Inca, Nf, Upf, Dn };

const char* node_kind_name(NodeKind k);

struct NfBehavior {
  enum class Kind { Tap, Pass, DropMatching };
  Kind kind = Kind::Pass;
  uint8_t drop_proto = 0;  // DropMatching only
};

struct RouteEntry {
  Ipv6Addr prefix;
  uint8_t prefix_len = 0;
  std::string via;
};

struct NodeSpec {
  std::string name;
  NodeKind kind = NodeKind::Ue;
  std::vector<Ipv6Addr> addresses;
  std::optional<Ipv6Addr> sid;              // Inca and Nf
  std::optional<NfBehavior> behavior;       // Nf
  std::optional<uint32_t> teid;             // Ran
  std::optional<uint8_t> qfi;               // Ran
  std::vector<RouteEntry> routes;
};

struct LinkSpec {
  std::string a, b;
  MacAddr mac_a, mac_b;
};

struct Topology {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;

  const NodeSpec* find(const std::string& name) const;
};

Topology load_topology(const std::string& json_text);

struct GenSpec {
  Ipv6Addr src, dst;
  uint8_t proto = kProtoUdp;
  uint16_t sport = 0, dport = 0;
  size_t payload_len = 0;
  uint32_t count = 1;
  uint64_t gap_us = 0;
};

struct Injection {
  std::string name;       // flow label in the report
  std::string at_node;
  std::optional<Bytes> raw;
  std::optional<GenSpec> gen;
};

std::vector<Injection> load_scenario(const std::string& json_text);

/// RAN-side GTP-U encapsulation using the node's static tunnel config.
Bytes ran_encapsulate(const NodeSpec& node, const Ipv6Addr& upf_addr,
                      std::span<const uint8_t> inner);
/// UPF-side extraction of the tunneled user packet.
Bytes upf_decapsulate(const NodeSpec& node, std::span<const uint8_t> ipv6_packet);

struct FlowReport {
  std::string name;
  std::vector<std::string> traversal;   // node names, first frame of the flow
  uint32_t injected = 0;
  uint32_t delivered = 0;
  std::optional<std::string> dropped_at;
  std::vector<Bytes> delivered_packets;  // IPv6 bytes as seen at the terminal node
  std::vector<Bytes> injected_packets;   // IPv6 bytes as emitted at the source
};

struct ScenarioReport {
  std::vector<FlowReport> flows;
  Counters counters;
  // Keyed "linkA-linkB" for links and "tap-<nf>" for NF tap captures.
  std::map<std::string, std::vector<CaptureRecord>> captures;
};

std::string report_to_json(const ScenarioReport& report);

/// Deterministic single-threaded event simulator over one topology.
class Simulator {
 public:
  Simulator(Topology topology, const RulesConfig& rules);

  /// Schedules one injection's frames starting at the current virtual
  /// time and assigns it the next flow slot.
  void inject(const Injection& injection);
  /// Drains the event queue.
  void run_until_idle();

  PipelineState& inca_state() { return inca_state_; }
  uint64_t now_us() const { return now_us_; }
  ScenarioReport report() const;

 private:
  struct Event {
    uint64_t t;
    uint64_t seq;
    enum class Kind { Origin, Arrival } kind;
    size_t node;     // Origin: source node; Arrival: receiving node
    size_t link;     // Arrival only
    Bytes bytes;     // Origin: IPv6 packet; Arrival: Ethernet frame
    size_t flow, frame_idx;
  };
  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      return std::tie(a.t, a.seq) > std::tie(b.t, b.seq);
    }
  };
  struct FrameState {
    std::vector<std::string> traversal;
    bool delivered = false;
    std::optional<std::string> dropped_at;
  };
  struct FlowState {
    std::string name;
    std::vector<FrameState> frames;
    std::vector<Bytes> injected;
    std::vector<Bytes> delivered_pkts;
  };

  size_t node_index(const std::string& name) const;
  std::optional<size_t> neighbor_link(size_t node, const Ipv6Addr& dst) const;
  std::optional<size_t> route_link(size_t node, const Ipv6Addr& dst) const;
  void transmit(size_t from_node, size_t link, std::span<const uint8_t> ipv6_pkt,
                const Event& cause);
  void forward(size_t node, std::span<const uint8_t> ipv6_pkt, const Event& cause,
               const char* drop_counter);
  void mark(const Event& e, const std::string& node_name);
  void drop(const Event& e, const std::string& node_name, const std::string& counter);
  void deliver(const Event& e, size_t node, std::span<const uint8_t> ipv6_pkt);

  void handle(const Event& e);
  void handle_ue(size_t node, const Event& e);
  void handle_ran(size_t node, const Event& e);
  void handle_inca(size_t node, const Event& e);
  void handle_nf(size_t node, const Event& e);
  void handle_upf(size_t node, const Event& e);
  void handle_dn(size_t node, const Event& e);

  Topology topo_;
  std::vector<std::vector<size_t>> adjacency_;  // node -> link indices
  std::map<std::string, size_t> name_to_node_;
  PipelineState inca_state_;
  size_t inca_node_ = SIZE_MAX;
  Ipv6Addr upf_addr_{};
  Counters sim_counters_;
  std::map<std::string, std::vector<CaptureRecord>> captures_;
  std::vector<FlowState> flows_;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  uint64_t now_us_ = 0;
  uint64_t next_seq_ = 0;
  uint64_t link_latency_us_ = 1;
};

ScenarioReport run_scenario(const Topology& topology, const std::string& rules_text,
                            const std::vector<Injection>& injections);

}  // namespace inca
