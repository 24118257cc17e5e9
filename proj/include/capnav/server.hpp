#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <string>

#include "capnav/session.hpp"

namespace capnav {

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 7878;                 // 0 picks an ephemeral port
    double rate = 30.0;              // snapshot rate, Hz (<= 120)
    double max_wall_seconds = 0.0;   // 0 = until the session ends
    /// Called once the socket listens, with the bound port.
    std::function<void(int port)> on_listening;
    /// Optional external stop request (e.g. from a signal handler).
    const std::atomic<bool>* stop = nullptr;
};

/*!
 * Serves one session over TCP until it finishes (or a stop is requested).
 * The first connection is the controller; later ones are observers whose
 * commands are ignored. Ticks at `rate`: queued commands are applied and
 * acked, the session advances by the elapsed wall time, and a snapshot is
 * broadcast. Returns the terminal snapshot.
 */
Snapshot serve_session(Session& session, const ServerOptions& options);

/// Minimal blocking line client, used by tests and tooling.
class LineClient {
  public:
    LineClient(const std::string& host, int port);
    ~LineClient();
    LineClient(const LineClient&) = delete;
    LineClient& operator=(const LineClient&) = delete;

    void send_line(const std::string& line);
    /// Next line without the terminator; nullopt on EOF.
    std::optional<std::string> read_line();

  private:
    int fd_ = -1;
    std::string buffer_;
};

}  // namespace capnav
