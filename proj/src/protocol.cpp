#include "capnav/protocol.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace capnav {

namespace {

bool is_key(std::string_view k) {
    if (k.empty()) return false;
    for (char c : k) {
        if (!((c >= 'a' && c <= 'z') || c == '_')) return false;
    }
    return true;
}

bool known_kind(std::string_view k) {
    return k == "hello" || k == "command" || k == "advance_mode" || k == "state" || k == "end";
}

std::string format_vector(const Vec3& v) {
    return format_number(v.x()) + ',' + format_number(v.y()) + ',' + format_number(v.z());
}

double to_double(const std::string& text, std::string_view key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ProtocolError("field '" + std::string(key) + "': malformed number '" + text + "'");
    }
}

}  // namespace

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

const std::string* Message::find(std::string_view key) const {
    for (const auto& [k, v] : fields) {
        if (k == key) return &v;
    }
    return nullptr;
}

const std::string& Message::get(std::string_view key) const {
    if (const auto* v = find(key)) return *v;
    throw ProtocolError(kind + ": missing field '" + std::string(key) + "'");
}

double Message::number(std::string_view key) const { return to_double(get(key), key); }

Vec3 Message::vector(std::string_view key) const {
    const std::string& text = get(key);
    Vec3 out;
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
        const std::size_t comma = text.find(',', start);
        if ((i < 2) != (comma != std::string::npos)) {
            throw ProtocolError("field '" + std::string(key) + "': expected x,y,z");
        }
        out[i] = to_double(text.substr(start, comma - start), key);
        start = comma + 1;
    }
    return out;
}

Message& Message::set(std::string key, std::string value) {
    for (auto& [k, v] : fields) {
        if (k == key) {
            v = std::move(value);
            return *this;
        }
    }
    fields.emplace_back(std::move(key), std::move(value));
    return *this;
}

Message parse_message(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
    std::istringstream is{std::string(line)};
    Message m;
    if (!(is >> m.kind)) throw ProtocolError("empty message");
    if (!known_kind(m.kind)) throw ProtocolError("unknown message kind '" + m.kind + "'");
    std::string token;
    while (is >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq + 1 == token.size()) {
            throw ProtocolError(m.kind + ": expected key=value, got '" + token + "'");
        }
        std::string key = token.substr(0, eq);
        if (!is_key(key)) throw ProtocolError(m.kind + ": bad key '" + key + "'");
        if (m.find(key)) throw ProtocolError(m.kind + ": duplicate key '" + key + "'");
        m.fields.emplace_back(std::move(key), token.substr(eq + 1));
    }
    return m;
}

std::string encode(const Message& message) {
    std::string out = message.kind;
    for (const auto& [k, v] : message.fields) {
        out += ' ';
        out += k;
        out += '=';
        out += v;
    }
    return out;
}

Message hello_message(const Hello& h) {
    Message m{"hello", {}};
    m.set("session", h.session)
        .set("scenario", h.scenario)
        .set("mode", std::string(to_string(h.mode)))
        .set("dilation", format_number(h.dilation))
        .set("rate", format_number(h.rate))
        .set("role", h.controller ? "controller" : "observer");
    return m;
}

Hello parse_hello(const Message& m) {
    if (m.kind != "hello") throw ProtocolError("expected hello, got " + m.kind);
    Hello h;
    h.session = m.get("session");
    h.scenario = m.get("scenario");
    try {
        h.mode = parse_session_mode(m.get("mode"));
    } catch (const InvalidParameter& e) {
        throw ProtocolError(e.what());
    }
    h.dilation = m.number("dilation");
    h.rate = m.number("rate");
    const std::string& role = m.get("role");
    if (role != "controller" && role != "observer") throw ProtocolError("hello: bad role '" + role + "'");
    h.controller = role == "controller";
    return h;
}

Message command_message(const SessionCommand& c) {
    Message m{"command", {}};
    m.set("field", format_number(c.field))
        .set("dir", format_vector(c.direction))
        .set("grad", format_vector(c.gradient))
        .set("amf", c.amf_on ? "1" : "0")
        .set("freq", format_number(c.rotation_frequency));
    return m;
}

SessionCommand parse_command(const Message& m) {
    if (m.kind != "command") throw ProtocolError("expected command, got " + m.kind);
    SessionCommand c;
    c.field = m.number("field");
    c.direction = m.vector("dir");
    c.gradient = m.vector("grad");
    const std::string& amf = m.get("amf");
    if (amf != "0" && amf != "1") throw ProtocolError("command: amf must be 0 or 1");
    c.amf_on = amf == "1";
    if (const auto* f = m.find("freq")) c.rotation_frequency = to_double(*f, "freq");
    for (const auto& [k, v] : m.fields) {
        if (k != "field" && k != "dir" && k != "grad" && k != "amf" && k != "freq") {
            throw ProtocolError("command: unknown field '" + k + "'");
        }
    }
    return c;
}

Message advance_mode_message(bool running) {
    Message m{"advance_mode", {}};
    m.set("mode", running ? "running" : "paused");
    return m;
}

bool parse_advance_mode(const Message& m) {
    if (m.kind != "advance_mode") throw ProtocolError("expected advance_mode, got " + m.kind);
    const std::string& mode = m.get("mode");
    if (mode != "running" && mode != "paused") {
        throw ProtocolError("advance_mode: mode must be running or paused");
    }
    return mode == "running";
}

Message state_message(const Snapshot& s) {
    Message m{"state", {}};
    m.set("seq", std::to_string(s.seq))
        .set("t", format_number(s.state.time))
        .set("pos", format_vector(s.state.position))
        .set("vel", format_vector(s.state.velocity))
        .set("region", std::string(to_string(s.state.region)))
        .set("dissolved", format_number(s.state.dissolved_fraction))
        .set("status", std::string(to_string(s.status)));
    return m;
}

Snapshot parse_state(const Message& m) {
    if (m.kind != "state") throw ProtocolError("expected state, got " + m.kind);
    Snapshot s;
    s.seq = static_cast<std::uint64_t>(std::stoull(m.get("seq")));
    s.state.time = m.number("t");
    s.state.position = m.vector("pos");
    s.state.velocity = m.vector("vel");
    s.state.dissolved_fraction = m.number("dissolved");
    try {
        s.state.region = parse_region(m.get("region"));
        s.status = parse_session_status(m.get("status"));
    } catch (const InvalidParameter& e) {
        throw ProtocolError(e.what());
    }
    return s;
}

Message end_message(const Snapshot& s, const std::string& reason) {
    Message m{"end", {}};
    m.set("seq", std::to_string(s.seq))
        .set("t", format_number(s.state.time))
        .set("outcome", s.outcome ? std::string(to_string(*s.outcome)) : "none");
    if (!reason.empty()) {
        std::string r = reason;
        for (char& c : r) {
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') c = '_';
        }
        m.set("reason", r);
    }
    return m;
}

Snapshot run_script(Session& session, std::istream& script, std::ostream& out,
                    const std::string& source) {
    Hello hello;
    hello.session = session.id();
    hello.scenario = session.scenario().name;
    hello.mode = session.scenario().mode;
    hello.dilation = session.time_dilation();
    hello.rate = 0.0;
    hello.controller = true;
    out << encode(hello_message(hello)) << '\n';

    std::string line;
    int lineno = 0;
    while (std::getline(script, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            if (line.compare(first, 8, "advance ") == 0) {
                std::istringstream is(line.substr(first + 8));
                std::string token;
                double wall_dt = -1.0;
                while (is >> token) {
                    if (token.rfind("wall_dt=", 0) != 0) throw ProtocolError("advance: expected wall_dt=");
                    wall_dt = to_double(token.substr(8), "wall_dt");
                }
                if (!(wall_dt >= 0.0)) throw ProtocolError("advance: wall_dt must be >= 0");
                session.advance(wall_dt);
                out << encode(state_message(session.snapshot())) << '\n';
            } else {
                const Message m = parse_message(std::string_view(line).substr(first));
                if (m.kind == "command") {
                    out << encode(command_message(session.apply_command(parse_command(m)))) << '\n';
                } else if (m.kind == "advance_mode") {
                    session.set_running(parse_advance_mode(m));
                } else if (m.kind != "hello") {
                    throw ProtocolError("scripts may not send '" + m.kind + "'");
                }
            }
        } catch (const ProtocolError& e) {
            throw ParseError(source, lineno, e.what());
        } catch (const SessionError& e) {
            throw ParseError(source, lineno, e.what());
        }
        if (session.status() == SessionStatus::finished || session.status() == SessionStatus::error) break;
    }
    Snapshot last = session.snapshot();
    if (last.status == SessionStatus::finished || last.status == SessionStatus::error) {
        out << encode(end_message(last, session.error_message())) << '\n';
    } else {
        out << encode(state_message(last)) << '\n';
    }
    return last;
}

}  // namespace capnav
