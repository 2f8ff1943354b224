#pragma once

#include "inca/bytes.hpp"

namespace inca {

struct BadMagic : std::runtime_error {
  BadMagic() : std::runtime_error("BadMagic: not a classic pcap file") {}
};
struct TruncatedRecord : std::runtime_error {
  TruncatedRecord() : std::runtime_error("truncated pcap record") {}
};
struct UnsupportedLinkType : std::runtime_error {
  explicit UnsupportedLinkType(uint32_t lt)
      : std::runtime_error("unsupported link type " + std::to_string(lt)) {}
};
struct NonMonotonicTimestamps : std::runtime_error {
  NonMonotonicTimestamps() : std::runtime_error("pcap timestamps go backwards") {}
};

struct CaptureRecord {
  uint32_t ts_sec = 0;
  uint32_t ts_usec = 0;
  Bytes frame;

  bool operator==(const CaptureRecord&) const = default;
};

/// Classic pcap (magic 0xa1b2c3d4 either endianness, linktype 1 only).
std::vector<CaptureRecord> read_pcap(std::span<const uint8_t> bytes);

/// Little-endian classic pcap, version 2.4, linktype 1, snaplen 65535.
Bytes write_pcap(const std::vector<CaptureRecord>& records);

std::vector<CaptureRecord> read_pcap_file(const std::string& path);
void write_pcap_file(const std::string& path, const std::vector<CaptureRecord>& records);

}  // namespace inca
