#include "capnav/magnetics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace capnav {

namespace {

double langevin(double x) {
    if (std::abs(x) < 1e-4) return x / 3.0 - x * x * x / 45.0;
    return 1.0 / std::tanh(x) - 1.0 / x;
}

// Solves L(x) = target for x > 0 by bisection (L is increasing, L < 1).
double inverse_langevin(double target) {
    double lo = 0.0;
    double hi = 1.0;
    while (langevin(hi) < target) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (langevin(mid) < target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

MagnetizationCurve::MagnetizationCurve(std::vector<Sample> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw InvalidParameter("magnetization curve: no samples");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        if (!std::isfinite(s.field) || !std::isfinite(s.moment) || s.field < 0.0 || s.moment < 0.0) {
            throw InvalidParameter("magnetization curve: samples must be finite and >= 0");
        }
        if (i > 0) {
            if (!(s.field > samples_[i - 1].field)) {
                throw InvalidParameter("magnetization curve: fields must be strictly increasing");
            }
            if (s.moment < samples_[i - 1].moment) {
                throw InvalidParameter("magnetization curve: moment must be non-decreasing");
            }
        }
    }
    if (samples_.front().field == 0.0 && samples_.front().moment != 0.0) {
        throw InvalidParameter("magnetization curve: moment at zero field must be zero");
    }
}

MagnetizationCurve MagnetizationCurve::reference() {
    const double saturation = kSaturationRatio * kReferenceMoment;
    const double x_ref = inverse_langevin(1.0 / kSaturationRatio);
    const double scale = kReferenceField / x_ref;  // B0 in L(B / B0)
    constexpr int per_anchor = 12;
    constexpr int count = 10 * per_anchor;
    std::vector<Sample> samples;
    samples.reserve(count + 1);
    for (int i = 0; i <= count; ++i) {
        if (i == per_anchor) {
            samples.push_back({kReferenceField, kReferenceMoment});
            continue;
        }
        const double b = kReferenceField * i / per_anchor;
        samples.push_back({b, saturation * langevin(b / scale)});
    }
    return MagnetizationCurve(std::move(samples));
}

MagnetizationCurve MagnetizationCurve::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::vector<Sample> samples;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream is(line);
        std::string first;
        if (!(is >> first) || first[0] == '#') continue;
        Sample s{};
        std::istringstream row(line);
        std::string extra;
        if (!(row >> s.field >> s.moment) || (row >> extra)) {
            throw ParseError(path, lineno, "expected 'B_tesla moment_Am2'");
        }
        samples.push_back(s);
    }
    try {
        return MagnetizationCurve(std::move(samples));
    } catch (const InvalidParameter& e) {
        throw ParseError(path, lineno, e.what());
    }
}

double MagnetizationCurve::moment_at(double field) const {
    if (field < 0.0) return -moment_at(-field);
    if (field >= samples_.back().field) return samples_.back().moment;
    const auto hi = std::upper_bound(samples_.begin(), samples_.end(), field,
                                     [](double b, const Sample& s) { return b < s.field; });
    const Sample lo_sample = hi == samples_.begin() ? Sample{0.0, 0.0} : *(hi - 1);
    if (field == lo_sample.field) return lo_sample.moment;
    const double t = (field - lo_sample.field) / (hi->field - lo_sample.field);
    return lo_sample.moment + t * (hi->moment - lo_sample.moment);
}

Vec3 moment_vector(const MagnetizationCurve& curve, const Vec3& field) {
    const double b = field.norm();
    if (b == 0.0) return Vec3::Zero();
    return curve.moment_at(b) * (field / b);
}

UniformMagnetics uniform_command(const Vec3& direction, double field_magnitude,
                                 const Vec3& gradient_vector) {
    if (!(field_magnitude >= 0.0)) throw InvalidParameter("uniform command: |B| must be >= 0");
    const double n = direction.norm();
    if (!(n > 0.0)) throw InvalidParameter("uniform command: field direction must be non-zero");
    const Vec3 unit = direction / n;
    MagneticSample s;
    s.field = field_magnitude * unit;
    s.gradient = gradient_vector * unit.transpose();
    s.gradient -= (s.gradient.trace() / 3.0) * Mat3::Identity();
    return UniformMagnetics(s);
}

WorkspaceMap WorkspaceMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    const auto text = detail::read_grid_text(in, path, "BFIELD v1", 12);
    std::vector<WorkspaceGrid::Node> nodes(text.values.size() / 12);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::copy_n(text.values.begin() + 12 * static_cast<std::ptrdiff_t>(i), 12, nodes[i].begin());
    }
    return WorkspaceMap(WorkspaceGrid(text.dims, text.origin, text.spacing, std::move(nodes)));
}

void WorkspaceMap::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    std::vector<double> flat;
    flat.reserve(grid_.values().size() * 12);
    for (const auto& v : grid_.values()) flat.insert(flat.end(), v.begin(), v.end());
    detail::write_grid_text(out, "BFIELD v1", grid_.dims(), grid_.origin(), grid_.spacing(), flat, 12);
}

MagneticSample WorkspaceMap::sample(const Vec3& p) const {
    const auto v = grid_.sample(p);
    MagneticSample s;
    s.field = Vec3(v[0], v[1], v[2]);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) s.gradient(i, j) = v[3 + 3 * i + j];
    }
    return s;
}

void CapabilityEnvelope::validate() const {
    if (!(max_field > 0.0) || !(max_gradient_at_max_field > 0.0)) {
        throw InvalidParameter("capability envelope: limits must be > 0");
    }
}

FieldCommand clamp_command(const CapabilityEnvelope& envelope, const FieldCommand& request) {
    // Relative slack keeps clamping idempotent under rounding.
    constexpr double slack = 1.0 + 1e-12;
    FieldCommand out = request;
    const double dn = request.direction.norm();
    out.direction = dn > 0.0 ? Vec3(request.direction / dn) : Vec3::UnitX();
    if (std::abs(dn - 1.0) <= 1e-15) out.direction = request.direction;
    out.field = std::max(0.0, request.field);
    if (out.field > envelope.max_field * slack) out.field = envelope.max_field;
    const double g = request.gradient.norm();
    if (g > envelope.max_gradient_at_max_field * slack) {
        out.gradient = request.gradient * (envelope.max_gradient_at_max_field / g);
    }
    return out;
}

}  // namespace capnav
