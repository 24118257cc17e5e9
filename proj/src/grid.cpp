#include "capnav/grid.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

namespace capnav::detail {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double parse_number(const std::string& tok, const std::string& source, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw ParseError(source, line, "not a number: '" + tok + "'");
    }
    if (used != tok.size()) throw ParseError(source, line, "not a number: '" + tok + "'");
    if (!std::isfinite(v)) throw ParseError(source, line, "non-finite value '" + tok + "'");
    return v;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

GridText read_grid_text(std::istream& in, const std::string& source, const std::string& magic,
                        std::size_t width) {
    GridText g;
    std::string line;
    int lineno = 0;

    // Header: optional comments/blank lines, then magic, dims, origin, spacing.
    bool seen_magic = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (line != magic) {
            throw ParseError(source, lineno, "expected header '" + magic + "'");
        }
        seen_magic = true;
        break;
    }
    if (!seen_magic) throw ParseError(source, lineno, "missing header '" + magic + "'");

    auto header_row = [&](const char* key) {
        if (!std::getline(in, line)) {
            throw ParseError(source, lineno + 1, std::string("missing '") + key + "' line");
        }
        ++lineno;
        const auto toks = split_ws(line);
        if (toks.size() != 4 || toks[0] != key) {
            throw ParseError(source, lineno, std::string("expected '") + key + " a b c'");
        }
        return toks;
    };

    const auto dims = header_row("dims");
    for (int a = 0; a < 3; ++a) {
        const double v = parse_number(dims[a + 1], source, lineno);
        if (v != std::floor(v) || v < 2 || v > 1e7) {
            throw ParseError(source, lineno, "dims must be integers >= 2");
        }
        g.dims[a] = static_cast<int>(v);
    }
    const auto origin = header_row("origin");
    for (int a = 0; a < 3; ++a) g.origin[a] = parse_number(origin[a + 1], source, lineno);
    const auto spacing = header_row("spacing");
    for (int a = 0; a < 3; ++a) {
        g.spacing[a] = parse_number(spacing[a + 1], source, lineno);
        if (!(g.spacing[a] > 0.0)) throw ParseError(source, lineno, "spacing must be > 0");
    }

    const std::size_t expected = static_cast<std::size_t>(g.dims[0]) * g.dims[1] * g.dims[2];
    g.values.reserve(expected * width);
    std::size_t rows = 0;
    int last_line = lineno;
    while (std::getline(in, line)) {
        ++lineno;
        const auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (rows == expected) {
            throw ParseError(source, lineno,
                             "extra value row beyond the expected " + std::to_string(expected));
        }
        if (toks.size() != width) {
            throw ParseError(source, lineno,
                             "expected " + std::to_string(width) + " values, found " +
                                 std::to_string(toks.size()));
        }
        for (const auto& t : toks) g.values.push_back(parse_number(t, source, lineno));
        ++rows;
        last_line = lineno;
    }
    if (rows != expected) {
        throw ParseError(source, last_line,
                         "expected " + std::to_string(expected) + " value rows, found " +
                             std::to_string(rows) + " (missing " +
                             std::to_string(expected - rows) + ")");
    }
    return g;
}

void write_grid_text(std::ostream& out, const std::string& magic, const std::array<int, 3>& dims,
                     const Vec3& origin, const Vec3& spacing, const std::vector<double>& values,
                     std::size_t width) {
    out << magic << '\n';
    out << "dims " << dims[0] << ' ' << dims[1] << ' ' << dims[2] << '\n';
    out << "origin " << format_double(origin.x()) << ' ' << format_double(origin.y()) << ' '
        << format_double(origin.z()) << '\n';
    out << "spacing " << format_double(spacing.x()) << ' ' << format_double(spacing.y()) << ' '
        << format_double(spacing.z()) << '\n';
    for (std::size_t i = 0; i < values.size(); i += width) {
        for (std::size_t c = 0; c < width; ++c) {
            if (c) out << ' ';
            out << format_double(values[i + c]);
        }
        out << '\n';
    }
}

}  // namespace capnav::detail
