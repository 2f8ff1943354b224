#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace inca {

using Bytes = std::vector<uint8_t>;

struct TruncatedHeader : std::runtime_error {
  explicit TruncatedHeader(const std::string& what) : std::runtime_error(what) {}
};

/// 128-bit IPv6 address, stored in network byte order.
struct Ipv6Addr {
  std::array<uint8_t, 16> octets{};

  static Ipv6Addr parse(const std::string& text);
  std::string str() const;
  bool is_zero() const;
  /// True when the first prefix_len bits of both addresses agree.
  bool matches_prefix(const Ipv6Addr& prefix, uint8_t prefix_len) const;

  auto operator<=>(const Ipv6Addr&) const = default;
};

struct MacAddr {
  std::array<uint8_t, 6> octets{};

  static MacAddr parse(const std::string& text);
  std::string str() const;

  auto operator<=>(const MacAddr&) const = default;
};

/// Bounds-checked big-endian reader over a borrowed byte span.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  size_t offset() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }

  void require(size_t n, const char* what) const {
    if (remaining() < n)
      throw TruncatedHeader(std::string(what) + ": need " + std::to_string(n) +
                            " bytes, have " + std::to_string(remaining()));
  }

  uint8_t u8(const char* what = "u8") {
    require(1, what);
    return data_[pos_++];
  }
  uint16_t u16(const char* what = "u16") {
    require(2, what);
    uint16_t v = static_cast<uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  uint32_t u32(const char* what = "u32") {
    require(4, what);
    uint32_t v = static_cast<uint32_t>(data_[pos_]) << 24 |
                 static_cast<uint32_t>(data_[pos_ + 1]) << 16 |
                 static_cast<uint32_t>(data_[pos_ + 2]) << 8 |
                 static_cast<uint32_t>(data_[pos_ + 3]);
    pos_ += 4;
    return v;
  }
  Ipv6Addr addr(const char* what = "ipv6 addr") {
    require(16, what);
    Ipv6Addr a;
    std::memcpy(a.octets.data(), data_.data() + pos_, 16);
    pos_ += 16;
    return a;
  }
  Bytes bytes(size_t n, const char* what = "bytes") {
    require(n, what);
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
  }
  Bytes rest() { return bytes(remaining(), "rest"); }

 private:
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

/// Big-endian appender.
class ByteWriter {
 public:
  void u8(uint8_t v) { out_.push_back(v); }
  void u16(uint16_t v) {
    out_.push_back(static_cast<uint8_t>(v >> 8));
    out_.push_back(static_cast<uint8_t>(v));
  }
  void u32(uint32_t v) {
    u16(static_cast<uint16_t>(v >> 16));
    u16(static_cast<uint16_t>(v));
  }
  void addr(const Ipv6Addr& a) { raw(a.octets.data(), 16); }
  void raw(const uint8_t* p, size_t n) { out_.insert(out_.end(), p, p + n); }
  void raw(const Bytes& b) { raw(b.data(), b.size()); }

  size_t size() const { return out_.size(); }
  Bytes take() { return std::move(out_); }
  Bytes& buffer() { return out_; }

 private:
  Bytes out_;
};

std::string to_hex(std::span<const uint8_t> data);
Bytes from_hex(const std::string& hex);

}  // namespace inca
