#include <doctest.h>

#include <filesystem>

#include "inca/pcap.hpp"
#include "test_util.hpp"

using namespace inca;
using namespace inca::testutil;

namespace {

void push_le32(Bytes& b, uint32_t v) {
  b.push_back(static_cast<uint8_t>(v));
  b.push_back(static_cast<uint8_t>(v >> 8));
  b.push_back(static_cast<uint8_t>(v >> 16));
  b.push_back(static_cast<uint8_t>(v >> 24));
}

void push_be32(Bytes& b, uint32_t v) {
  b.push_back(static_cast<uint8_t>(v >> 24));
  b.push_back(static_cast<uint8_t>(v >> 16));
  b.push_back(static_cast<uint8_t>(v >> 8));
  b.push_back(static_cast<uint8_t>(v));
}

// Independent byte-literal writer used to cross-check the reader.
Bytes hand_built_pcap(bool big_endian, uint32_t linktype,
                      const std::vector<CaptureRecord>& records) {
  auto put = big_endian ? push_be32 : push_le32;
  Bytes b;
  put(b, 0xa1b2c3d4);
  if (big_endian) {
    b.insert(b.end(), {0, 2, 0, 4});
  } else {
    b.insert(b.end(), {2, 0, 4, 0});
  }
  put(b, 0);
  put(b, 0);
  put(b, 65535);
  put(b, linktype);
  for (const auto& r : records) {
    put(b, r.ts_sec);
    put(b, r.ts_usec);
    put(b, static_cast<uint32_t>(r.frame.size()));
    put(b, static_cast<uint32_t>(r.frame.size()));
    b.insert(b.end(), r.frame.begin(), r.frame.end());
  }
  return b;
}

}  // namespace

TEST_CASE("empty capture is a bare 24-byte header") {
  Bytes out = write_pcap({});
  CHECK(out.size() == 24);
  CHECK(out[0] == 0xd4);  // little-endian magic on the wire
  CHECK(out[1] == 0xc3);
  CHECK(out[2] == 0xb2);
  CHECK(out[3] == 0xa1);
  CHECK(read_pcap(out).empty());
}

TEST_CASE("write then read returns the records unchanged") {
  FrameGen gen(21);
  std::vector<CaptureRecord> recs;
  recs.push_back({0, 0, gen.ran_frame()});
  recs.push_back({0, 10, gen.ran_frame()});
  recs.push_back({1, 0, gen.ran_frame()});
  CHECK(read_pcap(write_pcap(recs)) == recs);
}

TEST_CASE("file size arithmetic: 24 + n*(16 + len)") {
  std::vector<CaptureRecord> recs{{5, 6, Bytes(60, 0xAB)}};
  Bytes out = write_pcap(recs);
  CHECK(out.size() == 24 + 16 + 60);
}

TEST_CASE("reader agrees with a hand-built little-endian file") {
  std::vector<CaptureRecord> recs{{100, 200, Bytes{1, 2, 3, 4, 5}},
                                  {100, 300, Bytes{9, 8}}};
  Bytes wire = hand_built_pcap(false, 1, recs);
  CHECK(wire == write_pcap(recs));  // writer matches the byte-literal layout
  CHECK(read_pcap(wire) == recs);
}

TEST_CASE("swapped-magic (big-endian) files are readable") {
  std::vector<CaptureRecord> recs{{7, 8, Bytes{0xDE, 0xAD, 0xBE, 0xEF}}};
  Bytes wire = hand_built_pcap(true, 1, recs);
  CHECK(wire[0] == 0xa1);  // big-endian magic on the wire
  CHECK(read_pcap(wire) == recs);
}

TEST_CASE("non-monotonic timestamps are rejected on write") {
  std::vector<CaptureRecord> recs{{10, 500, {}}, {10, 499, {}}};
  CHECK_THROWS_AS(write_pcap(recs), NonMonotonicTimestamps);
  // Equal timestamps are fine (same-tick frames).
  CHECK_NOTHROW(write_pcap({{10, 500, {}}, {10, 500, {}}}));
}

TEST_CASE("bad magic and short files are rejected") {
  CHECK_THROWS_AS(read_pcap(Bytes{1, 2, 3}), BadMagic);
  Bytes wire = hand_built_pcap(false, 1, {});
  wire[0] ^= 0xFF;
  CHECK_THROWS_AS(read_pcap(wire), BadMagic);
}

TEST_CASE("unsupported link types are rejected") {
  Bytes wire = hand_built_pcap(false, 101, {});  // raw IP, not Ethernet
  CHECK_THROWS_AS(read_pcap(wire), UnsupportedLinkType);
}

TEST_CASE("truncated record bodies are rejected") {
  std::vector<CaptureRecord> recs{{1, 2, Bytes(40, 0x55)}};
  Bytes wire = hand_built_pcap(false, 1, recs);
  wire.resize(wire.size() - 10);  // cut into the frame body
  CHECK_THROWS_AS(read_pcap(wire), TruncatedRecord);
  wire.resize(24 + 8);  // cut into the record header
  CHECK_THROWS_AS(read_pcap(wire), TruncatedRecord);
}

TEST_CASE("file round-trip through disk") {
  FrameGen gen(3);
  std::vector<CaptureRecord> recs{{0, 1, gen.ran_frame()}, {0, 2, gen.ran_frame()}};
  std::string path =
      (std::filesystem::temp_directory_path() / "pcap_roundtrip.pcap").string();
  write_pcap_file(path, recs);
  CHECK(read_pcap_file(path) == recs);
}
