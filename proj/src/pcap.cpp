#include "inca/pcap.hpp"

#include <fstream>

namespace inca {

namespace {

constexpr uint32_t kMagic = 0xa1b2c3d4;
constexpr uint32_t kMagicSwapped = 0xd4c3b2a1;

uint32_t rd32(const uint8_t* p, bool swap) {
  uint32_t v;
  std::memcpy(&v, p, 4);
  if (swap) v = __builtin_bswap32(v);
  return v;
}

uint16_t rd16(const uint8_t* p, bool swap) {
  uint16_t v;
  std::memcpy(&v, p, 2);
  if (swap) v = __builtin_bswap16(v);
  return v;
}

void wr32(Bytes& out, uint32_t v) {
  // Host is little-endian on every supported target.
  const uint8_t* p = reinterpret_cast<const uint8_t*>(&v);
  out.insert(out.end(), p, p + 4);
}

void wr16(Bytes& out, uint16_t v) {
  const uint8_t* p = reinterpret_cast<const uint8_t*>(&v);
  out.insert(out.end(), p, p + 2);
}

}  // namespace

std::vector<CaptureRecord> read_pcap(std::span<const uint8_t> bytes) {
  if (bytes.size() < 24) throw BadMagic();
  uint32_t magic = rd32(bytes.data(), false);
  bool swap;
  if (magic == kMagic)
    swap = false;
  else if (magic == kMagicSwapped)
    swap = true;
  else
    throw BadMagic();
  uint32_t linktype = rd32(bytes.data() + 20, swap);
  if (linktype != 1) throw UnsupportedLinkType(linktype);

  std::vector<CaptureRecord> records;
  size_t pos = 24;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 16) throw TruncatedRecord();
    CaptureRecord rec;
    rec.ts_sec = rd32(bytes.data() + pos, swap);
    rec.ts_usec = rd32(bytes.data() + pos + 4, swap);
    uint32_t incl = rd32(bytes.data() + pos + 8, swap);
    pos += 16;
    if (bytes.size() - pos < incl) throw TruncatedRecord();
    rec.frame.assign(bytes.begin() + pos, bytes.begin() + pos + incl);
    pos += incl;
    records.push_back(std::move(rec));
  }
  return records;
}

Bytes write_pcap(const std::vector<CaptureRecord>& records) {
  for (size_t i = 1; i < records.size(); ++i) {
    const auto& a = records[i - 1];
    const auto& b = records[i];
    if (std::pair(b.ts_sec, b.ts_usec) < std::pair(a.ts_sec, a.ts_usec))
      throw NonMonotonicTimestamps();
  }
  Bytes out;
  wr32(out, kMagic);
  wr16(out, 2);       // version major
  wr16(out, 4);       // version minor
  wr32(out, 0);       // thiszone
  wr32(out, 0);       // sigfigs
  wr32(out, 65535);   // snaplen
  wr32(out, 1);       // linktype: Ethernet
  for (const auto& rec : records) {
    wr32(out, rec.ts_sec);
    wr32(out, rec.ts_usec);
    wr32(out, static_cast<uint32_t>(rec.frame.size()));
    wr32(out, static_cast<uint32_t>(rec.frame.size()));
    out.insert(out.end(), rec.frame.begin(), rec.frame.end());
  }
  return out;
}

std::vector<CaptureRecord> read_pcap_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return read_pcap(data);
}

void write_pcap_file(const std::string& path, const std::vector<CaptureRecord>& records) {
  Bytes data = write_pcap(records);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
}

}  // namespace inca
