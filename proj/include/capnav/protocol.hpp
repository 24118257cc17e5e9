#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "capnav/session.hpp"

namespace capnav {

/*
 * Session wire format: one message per line, `kind key=value key=value ...`.
 * Values contain no whitespace; floats are SI decimals printed with 17
 * significant digits, vectors are `x,y,z`.
 *
 *   hello        session= scenario= mode= dilation= rate= role=controller|observer
 *   command      field= dir= grad= amf=0|1 freq=
 *   advance_mode mode=running|paused
 *   state        seq= t= pos= vel= region= dissolved= status=
 *   end          seq= t= outcome= [reason=]
 *
 * The controller sends `command` and `advance_mode`; the server answers each
 * command with the clamped `command` it will apply (the ack).
 */
class ProtocolError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Message {
    std::string kind;
    std::vector<std::pair<std::string, std::string>> fields;

    const std::string* find(std::string_view key) const;
    const std::string& get(std::string_view key) const;
    double number(std::string_view key) const;
    Vec3 vector(std::string_view key) const;
    Message& set(std::string key, std::string value);
};

Message parse_message(std::string_view line);
std::string encode(const Message& message);

std::string format_number(double value);

struct Hello {
    std::string session;
    std::string scenario;
    SessionMode mode = SessionMode::in_flow;
    double dilation = 1.0;
    double rate = 30.0;
    bool controller = false;
};

Message hello_message(const Hello& hello);
Hello parse_hello(const Message& message);
Message command_message(const SessionCommand& command);
SessionCommand parse_command(const Message& message);
Message advance_mode_message(bool running);
bool parse_advance_mode(const Message& message);
Message state_message(const Snapshot& snapshot);
Snapshot parse_state(const Message& message);
/// Terminal message for a finished or failed session.
Message end_message(const Snapshot& snapshot, const std::string& reason = {});

/*!
 * Replays a session script without any network: protocol `command` and
 * `advance_mode` lines plus `advance wall_dt=<seconds>`. Every reply the
 * server would send (acks, states, the final `end`) is written to `out`.
 * Returns the terminal snapshot.
 */
Snapshot run_script(Session& session, std::istream& script, std::ostream& out,
                    const std::string& source = "<script>");

}  // namespace capnav
