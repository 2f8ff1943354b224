#pragma once

#include <functional>
#include <string>

#include "inca/ctrl.hpp"

namespace inca {

/// Newline-delimited request/response protocol over a local stream
/// socket. Addresses: "host:port" (TCP, loopback expected) or a
/// filesystem path / "unix:<path>" (AF_UNIX).
///
/// One client is served at a time; further clients queue in the listen
/// backlog. The handler's second result tells the server to stop
/// accepting once the current client disconnects.
class CtlServer {
 public:
  using Handler = std::function<std::pair<ControlResponse, bool>(const std::string&)>;

  explicit CtlServer(const std::string& addr);
  ~CtlServer();

  CtlServer(const CtlServer&) = delete;
  CtlServer& operator=(const CtlServer&) = delete;

  /// Blocks until the handler reports completion.
  void serve(const Handler& handler);

 private:
  int listen_fd_ = -1;
  std::string unix_path_;
};

/// Client side: send one command line, return the raw response lines.
/// Throws std::runtime_error on connection failure.
std::pair<bool, std::vector<std::string>> ctl_request(const std::string& addr,
                                                      const std::string& line);

void write_response(int fd, const ControlResponse& resp);

}  // namespace inca
