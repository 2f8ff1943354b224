#include "inca/bytes.hpp"

#include <arpa/inet.h>

#include <cstdio>

namespace inca {

Ipv6Addr Ipv6Addr::parse(const std::string& text) {
  Ipv6Addr a;
  if (inet_pton(AF_INET6, text.c_str(), a.octets.data()) != 1)
    throw std::invalid_argument("bad IPv6 address: " + text);
  return a;
}

std::string Ipv6Addr::str() const {
  char buf[INET6_ADDRSTRLEN];
  inet_ntop(AF_INET6, octets.data(), buf, sizeof(buf));
  return buf;
}

bool Ipv6Addr::is_zero() const {
  for (uint8_t b : octets)
    if (b) return false;
  return true;
}

bool Ipv6Addr::matches_prefix(const Ipv6Addr& prefix, uint8_t prefix_len) const {
  if (prefix_len > 128) prefix_len = 128;
  size_t full = prefix_len / 8;
  if (std::memcmp(octets.data(), prefix.octets.data(), full) != 0) return false;
  unsigned rem = prefix_len % 8;
  if (rem == 0) return true;
  uint8_t mask = static_cast<uint8_t>(0xFF << (8 - rem));
  return (octets[full] & mask) == (prefix.octets[full] & mask);
}

MacAddr MacAddr::parse(const std::string& text) {
  MacAddr m;
  unsigned v[6];
  if (std::sscanf(text.c_str(), "%x:%x:%x:%x:%x:%x", &v[0], &v[1], &v[2], &v[3],
                  &v[4], &v[5]) != 6)
    throw std::invalid_argument("bad MAC address: " + text);
  for (int i = 0; i < 6; ++i) {
    if (v[i] > 0xFF) throw std::invalid_argument("bad MAC address: " + text);
    m.octets[i] = static_cast<uint8_t>(v[i]);
  }
  return m;
}

std::string MacAddr::str() const {
  char buf[18];
  std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x", octets[0],
                octets[1], octets[2], octets[3], octets[4], octets[5]);
  return buf;
}

std::string to_hex(std::span<const uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

static int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::invalid_argument(std::string("bad hex digit: ") + c);
}

Bytes from_hex(const std::string& hex) {
  if (hex.size() % 2) throw std::invalid_argument("odd-length hex string");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (size_t i = 0; i < hex.size(); i += 2)
    out.push_back(static_cast<uint8_t>(hex_val(hex[i]) << 4 | hex_val(hex[i + 1])));
  return out;
}

}  // namespace inca
