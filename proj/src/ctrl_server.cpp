#include "inca/ctrl_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cstring>

namespace inca {

namespace {

bool is_unix_addr(const std::string& addr) {
  return addr.rfind("unix:", 0) == 0 || addr.find('/') != std::string::npos;
}

std::string unix_path_of(const std::string& addr) {
  return addr.rfind("unix:", 0) == 0 ? addr.substr(5) : addr;
}

std::pair<std::string, uint16_t> split_host_port(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos)
    throw std::runtime_error("control address must be host:port or a unix path");
  std::string host = addr.substr(0, colon);
  int port = std::stoi(addr.substr(colon + 1));
  if (port <= 0 || port > 65535) throw std::runtime_error("bad control port");
  return {host, static_cast<uint16_t>(port)};
}

int connect_to(const std::string& addr) {
  if (is_unix_addr(addr)) {
    int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd < 0) throw std::runtime_error("socket: " + std::string(strerror(errno)));
    sockaddr_un sa{};
    sa.sun_family = AF_UNIX;
    std::string path = unix_path_of(addr);
    if (path.size() >= sizeof(sa.sun_path))
      throw std::runtime_error("unix socket path too long");
    std::strcpy(sa.sun_path, path.c_str());
    if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) < 0) {
      ::close(fd);
      throw std::runtime_error("connect " + path + ": " + strerror(errno));
    }
    return fd;
  }
  auto [host, port] = split_host_port(addr);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw std::runtime_error("socket: " + std::string(strerror(errno)));
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
    ::close(fd);
    throw std::runtime_error("bad control host '" + host + "'");
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) < 0) {
    ::close(fd);
    throw std::runtime_error("connect " + addr + ": " + strerror(errno));
  }
  return fd;
}

std::optional<std::string> read_line(int fd) {
  std::string line;
  char c;
  while (true) {
    ssize_t n = ::read(fd, &c, 1);
    if (n <= 0) return line.empty() ? std::nullopt : std::optional(line);
    if (c == '\n') return line;
    if (c != '\r') line.push_back(c);
  }
}

void write_all(int fd, const std::string& data) {
  size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n <= 0) throw std::runtime_error("control channel write failed");
    off += static_cast<size_t>(n);
  }
}

}  // namespace

void write_response(int fd, const ControlResponse& resp) {
  std::string out = resp.ok ? "OK\n" : "ERR " + resp.body.at(0) + "\n";
  if (resp.ok)
    for (const auto& line : resp.body) out += line + "\n";
  out += "\n";
  write_all(fd, out);
}

CtlServer::CtlServer(const std::string& addr) {
  if (is_unix_addr(addr)) {
    unix_path_ = unix_path_of(addr);
    ::unlink(unix_path_.c_str());
    listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (listen_fd_ < 0)
      throw std::runtime_error("socket: " + std::string(strerror(errno)));
    sockaddr_un sa{};
    sa.sun_family = AF_UNIX;
    if (unix_path_.size() >= sizeof(sa.sun_path))
      throw std::runtime_error("unix socket path too long");
    std::strcpy(sa.sun_path, unix_path_.c_str());
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) < 0)
      throw std::runtime_error("bind " + unix_path_ + ": " + strerror(errno));
  } else {
    auto [host, port] = split_host_port(addr);
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0)
      throw std::runtime_error("socket: " + std::string(strerror(errno)));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    if (inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1)
      throw std::runtime_error("bad control host '" + host + "'");
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) < 0)
      throw std::runtime_error("bind " + addr + ": " + strerror(errno));
  }
  if (::listen(listen_fd_, 8) < 0)
    throw std::runtime_error("listen: " + std::string(strerror(errno)));
}

CtlServer::~CtlServer() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
  if (!unix_path_.empty()) ::unlink(unix_path_.c_str());
}

void CtlServer::serve(const Handler& handler) {
  bool done = false;
  while (!done) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("accept: " + std::string(strerror(errno)));
    }
    while (auto line = read_line(fd)) {
      if (line->empty()) continue;
      auto [resp, finished] = handler(*line);
      try {
        write_response(fd, resp);
      } catch (const std::exception&) {
        break;  // client went away mid-response
      }
      if (finished) done = true;
    }
    ::close(fd);
  }
}

std::pair<bool, std::vector<std::string>> ctl_request(const std::string& addr,
                                                      const std::string& line) {
  int fd = connect_to(addr);
  write_all(fd, line + "\n");
  std::vector<std::string> lines;
  while (auto got = read_line(fd)) {
    if (got->empty()) break;
    lines.push_back(*got);
  }
  ::close(fd);
  if (lines.empty()) throw std::runtime_error("empty response");
  bool ok = lines[0] == "OK" || lines[0].rfind("OK ", 0) == 0;
  return {ok, lines};
}

}  // namespace inca
