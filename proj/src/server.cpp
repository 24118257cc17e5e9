#include "capnav/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "capnav/protocol.hpp"

namespace capnav {

namespace {

using Clock = std::chrono::steady_clock;

std::runtime_error sys_error(const std::string& what) {
    return std::runtime_error(what + ": " + std::strerror(errno));
}

sockaddr_in make_address(const std::string& host, int port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        throw InvalidParameter("server: bad IPv4 address '" + host + "'");
    }
    return addr;
}

struct Connection {
    explicit Connection(int f) : fd(f) {}
    ~Connection() {
        if (fd >= 0) ::close(fd);
    }

    bool send(const std::string& line) {
        std::lock_guard lock(write_mutex);
        if (broken) return false;
        const std::string data = line + '\n';
        std::size_t sent = 0;
        while (sent < data.size()) {
            const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
            if (n <= 0) {
                broken = true;
                return false;
            }
            sent += static_cast<std::size_t>(n);
        }
        return true;
    }

    int fd;
    bool controller = false;
    std::mutex write_mutex;
    bool broken = false;
};

struct Inbox {
    std::mutex mutex;
    std::deque<Message> messages;
};

void read_loop(const std::shared_ptr<Connection>& conn, Inbox& inbox, const std::atomic<bool>& done) {
    std::string buffer;
    char chunk[4096];
    while (!done) {
        pollfd p{conn->fd, POLLIN, 0};
        const int ready = ::poll(&p, 1, 50);
        if (ready < 0 && errno != EINTR) return;
        if (ready <= 0) continue;
        const ssize_t n = ::recv(conn->fd, chunk, sizeof chunk, 0);
        if (n <= 0) return;
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t nl;
        while ((nl = buffer.find('\n')) != std::string::npos) {
            const std::string line = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            if (!conn->controller || line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                Message m = parse_message(line);
                if (m.kind == "command" || m.kind == "advance_mode") {
                    std::lock_guard lock(inbox.mutex);
                    inbox.messages.push_back(std::move(m));
                }
            } catch (const ProtocolError&) {
                // Malformed controller input is dropped; the stream continues.
            }
        }
    }
}

void write_loop(const std::shared_ptr<Connection>& conn,
                const std::shared_ptr<SnapshotBroadcaster::Subscription>& sub,
                const std::string& error_reason) {
    while (auto snap = sub->pop()) {
        if (!conn->send(encode(state_message(*snap)))) return;
        if (snap->status == SessionStatus::finished || snap->status == SessionStatus::error) {
            conn->send(encode(end_message(*snap, error_reason)));
            return;
        }
    }
}

}  // namespace

Snapshot serve_session(Session& session, const ServerOptions& options) {
    if (!(options.rate > 0.0 && options.rate <= kMaxSnapshotRate)) {
        throw InvalidParameter("server: rate must lie in (0, 120] Hz");
    }
    const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) throw sys_error("socket");
    const int one = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr = make_address(options.host, options.port);
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
        ::close(listener);
        throw sys_error("bind " + options.host + ":" + std::to_string(options.port));
    }
    if (::listen(listener, 16) < 0) {
        ::close(listener);
        throw sys_error("listen");
    }
    socklen_t len = sizeof addr;
    ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
    if (options.on_listening) options.on_listening(ntohs(addr.sin_port));

    SnapshotBroadcaster broadcaster;
    Inbox inbox;
    std::atomic<bool> done{false};
    std::string error_reason;
    std::mutex conns_mutex;
    std::vector<std::shared_ptr<Connection>> conns;
    std::shared_ptr<Connection> controller;
    std::vector<std::thread> threads;

    Hello hello;
    hello.session = session.id();
    hello.scenario = session.scenario().name;
    hello.mode = session.scenario().mode;
    hello.dilation = session.time_dilation();
    hello.rate = options.rate;

    std::thread acceptor([&] {
        while (!done) {
            pollfd p{listener, POLLIN, 0};
            if (::poll(&p, 1, 50) <= 0) continue;
            const int fd = ::accept(listener, nullptr, nullptr);
            if (fd < 0) continue;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            auto conn = std::make_shared<Connection>(fd);
            std::lock_guard lock(conns_mutex);
            conn->controller = !controller;
            if (conn->controller) controller = conn;
            Hello h = hello;
            h.controller = conn->controller;
            conn->send(encode(hello_message(h)));
            auto sub = broadcaster.subscribe();
            conns.push_back(conn);
            threads.emplace_back(read_loop, conn, std::ref(inbox), std::cref(done));
            threads.emplace_back(write_loop, conn, sub, std::cref(error_reason));
        }
    });

    const auto period = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(1.0 / options.rate));
    const auto start = Clock::now();
    auto last = start;
    auto next_tick = start;
    broadcaster.publish(session.snapshot());
    Snapshot terminal;
    while (true) {
        next_tick += period;
        std::this_thread::sleep_until(next_tick);
        std::deque<Message> pending;
        {
            std::lock_guard lock(inbox.mutex);
            pending.swap(inbox.messages);
        }
        for (const auto& m : pending) {
            try {
                if (m.kind == "command") {
                    const SessionCommand ack = session.apply_command(parse_command(m));
                    std::lock_guard lock(conns_mutex);
                    if (controller) controller->send(encode(command_message(ack)));
                } else {
                    session.set_running(parse_advance_mode(m));
                }
            } catch (const std::exception&) {
                // Rejected command (bad fields or finished session): not applied, not acked.
            }
        }
        const auto now = Clock::now();
        session.advance(std::chrono::duration<double>(now - last).count());
        last = now;
        if (session.status() == SessionStatus::error) error_reason = session.error_message();
        terminal = session.snapshot();
        broadcaster.publish(terminal);
        const bool ended = terminal.status == SessionStatus::finished ||
                           terminal.status == SessionStatus::error;
        const bool timed_out = options.max_wall_seconds > 0.0 &&
                               std::chrono::duration<double>(now - start).count() >= options.max_wall_seconds;
        if (ended || timed_out || (options.stop && options.stop->load())) break;
    }
    broadcaster.close();
    done = true;
    acceptor.join();
    for (auto& t : threads) t.join();
    ::close(listener);
    return terminal;
}

LineClient::LineClient(const std::string& host, int port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw sys_error("socket");
    sockaddr_in addr = make_address(host, port);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
        ::close(fd_);
        fd_ = -1;
        throw sys_error("connect " + host + ":" + std::to_string(port));
    }
}

LineClient::~LineClient() {
    if (fd_ >= 0) ::close(fd_);
}

void LineClient::send_line(const std::string& line) {
    const std::string data = line + '\n';
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) throw sys_error("send");
        sent += static_cast<std::size_t>(n);
    }
}

std::optional<std::string> LineClient::read_line() {
    char chunk[4096];
    while (true) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n <= 0) return std::nullopt;
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

}  // namespace capnav
