#pragma once

#include <map>

#include "inca/classifier.hpp"
#include "inca/srv6.hpp"

namespace inca {

enum class PortRole { RanFacing, UpfFacing, ServiceFacing };

const char* port_name(PortRole p);

enum class DropReason { NoMoreSegments, HopLimit, Oversize, Malformed };

const char* drop_reason_name(DropReason r);

/// Flat named counters, exposed verbatim through the STATS command.
struct Counters {
  std::map<std::string, uint64_t> values;

  void inc(const std::string& name, uint64_t delta = 1) { values[name] += delta; }
  uint64_t get(const std::string& name) const {
    auto it = values.find(name);
    return it == values.end() ? 0 : it->second;
  }
};

struct PipelineState {
  RuleTable table;
  std::map<std::string, ChainPolicy> chains;
  EncapConfig cfg;
  Counters counters;
  size_t mtu = 9000;
};

/// The single outcome of processing one frame.
struct Verdict {
  enum class Kind { Emit, Drop };
  Kind kind;
  PortRole port = PortRole::UpfFacing;   // Emit only
  Bytes frame;                           // Emit only
  DropReason reason = DropReason::Malformed;  // Drop only

  static Verdict emit(PortRole p, Bytes f) {
    return Verdict{Kind::Emit, p, std::move(f), DropReason::Malformed};
  }
  static Verdict drop(DropReason r) {
    return Verdict{Kind::Drop, PortRole::UpfFacing, {}, r};
  }
  bool is_emit() const { return kind == Kind::Emit; }
};

/// Process one Ethernet frame through the INCA element. Never throws;
/// every failure is a counted Drop verdict.
Verdict process(PipelineState& state, PortRole in_port,
                std::span<const uint8_t> frame);

/// Prepend a fresh Ethernet II header (ethertype 0x86DD).
Bytes rebuild_l2(std::span<const uint8_t> ipv6_packet, const MacAddr& next_hop_mac,
                 const MacAddr& src_mac);

}  // namespace inca
