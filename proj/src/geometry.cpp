#include "capnav/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace capnav {

namespace {

struct AxisDistance {
    double distance;  // to the segment
    Vec3 foot;        // nearest point on the segment
};

AxisDistance segment_distance(const Vec3& p, const Vec3& start, const Vec3& dir, double length) {
    const double t = std::clamp((p - start).dot(dir), 0.0, length);
    Vec3 foot = start + t * dir;
    return {(p - foot).norm(), foot};
}

// Distance to the infinite axis line, used for region classification.
double line_distance(const Vec3& p, const Vec3& origin, const Vec3& dir) {
    const Vec3 rel = p - origin;
    return (rel - rel.dot(dir) * dir).norm();
}

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << "geometry: " << name << " must be > 0 (got " << value << ")";
        throw InvalidParameter(os.str());
    }
}

}  // namespace

std::string_view to_string(GeometryKind kind) {
    return kind == GeometryKind::tube ? "tube" : "y_junction";
}

std::string_view to_string(Region region) {
    switch (region) {
        case Region::inlet: return "inlet";
        case Region::main: return "main";
        case Region::junction: return "junction";
        case Region::branch_a: return "branch_A";
        case Region::branch_b: return "branch_B";
        case Region::exited_a: return "exited_A";
        case Region::exited_b: return "exited_B";
    }
    return "unknown";
}

Region parse_region(std::string_view text) {
    for (Region r : {Region::inlet, Region::main, Region::junction, Region::branch_a,
                     Region::branch_b, Region::exited_a, Region::exited_b}) {
        if (to_string(r) == text) return r;
    }
    throw InvalidParameter("geometry: unknown region '" + std::string(text) + "'");
}

GeometryKind parse_geometry_kind(std::string_view text) {
    if (text == "tube") return GeometryKind::tube;
    if (text == "y_junction") return GeometryKind::y_junction;
    throw InvalidParameter("geometry: unknown kind '" + std::string(text) + "'");
}

Geometry::Geometry(const GeometryParams& params) : params_(params) {
    require_positive(params_.main_length, "main_length");
    require_positive(params_.diameter, "diameter");
    if (params_.inlet_extrusion < 0.0 || !std::isfinite(params_.inlet_extrusion)) {
        throw InvalidParameter("geometry: inlet_extrusion must be >= 0");
    }
    junction_ = Vec3(params_.main_length, 0.0, 0.0);
    const double r = radius();

    lo_ = Vec3(-params_.inlet_extrusion - r, -r, -r);
    hi_ = Vec3(params_.main_length + r, r, r);

    if (params_.kind == GeometryKind::y_junction) {
        require_positive(params_.branch_length, "branch_length");
        if (!(params_.branch_angle > 0.0 && params_.branch_angle < kPi)) {
            throw InvalidParameter("geometry: branch_angle must lie in (0, pi)");
        }
        if (params_.fillet_radius < 0.0 || !std::isfinite(params_.fillet_radius)) {
            throw InvalidParameter("geometry: fillet_radius must be >= 0");
        }
        const double half = 0.5 * params_.branch_angle;
        dir_a_ = Vec3(std::cos(half), std::sin(half), 0.0);
        dir_b_ = Vec3(std::cos(half), -std::sin(half), 0.0);
        apex_offset_ = r / std::tan(half);
        for (const Vec3& end : {branch_outlet(Branch::a), branch_outlet(Branch::b)}) {
            lo_ = lo_.cwiseMin(end - Vec3::Constant(r));
            hi_ = hi_.cwiseMax(end + Vec3::Constant(r));
        }
    } else {
        dir_a_ = Vec3::UnitX();
        dir_b_ = Vec3::UnitX();
    }
    const Vec3 margin = Vec3::Constant(params_.diameter);
    lo_ -= margin;
    hi_ += margin;
}

Vec3 Geometry::branch_outlet(Branch b) const {
    if (params_.kind == GeometryKind::tube) return junction_;
    return junction_ + params_.branch_length * branch_direction(b);
}

Vec3 Geometry::apex_point() const {
    if (params_.kind == GeometryKind::tube) return junction_;
    return junction_ + Vec3(radius() / std::sin(0.5 * params_.branch_angle), 0.0, 0.0);
}

bool Geometry::in_bounds(const Vec3& p) const {
    return (p.array() >= lo_.array()).all() && (p.array() <= hi_.array()).all();
}

WallQuery Geometry::wall_query(const Vec3& p) const {
    if (!in_bounds(p) || !all_finite(p)) {
        std::ostringstream os;
        os << "geometry: point (" << p.x() << ", " << p.y() << ", " << p.z()
           << ") outside the domain bounding box";
        throw OutOfDomain(os.str());
    }
    const double r = radius();
    const double eps = 1e-12 * r;
    const Vec3 inlet(-params_.inlet_extrusion, 0.0, 0.0);
    const double main_span = params_.main_length + params_.inlet_extrusion;
    const AxisDistance main = segment_distance(p, inlet, Vec3::UnitX(), main_span);

    WallQuery q;
    q.distance = r - main.distance;
    q.normal_defined = main.distance > eps;
    if (q.normal_defined) q.inward_normal = (main.foot - p) / main.distance;
    if (params_.kind == GeometryKind::tube) return q;

    const AxisDistance da = segment_distance(p, junction_, dir_a_, params_.branch_length);
    const AxisDistance db = segment_distance(p, junction_, dir_b_, params_.branch_length);
    const double a = r - da.distance;
    const double b = r - db.distance;

    // Quadratic smooth maximum; weights wa + wb = 1 keep the gradient norm <= 1.
    const double k = params_.fillet_radius;
    double blend = std::max(a, b);
    double wa = a >= b ? 1.0 : 0.0;
    double wb = 1.0 - wa;
    if (k > 0.0) {
        const double h = std::max(k - std::abs(a - b), 0.0) / k;
        blend += 0.25 * k * h * h;
        const double w_small = 0.5 * h;
        if (a > b) {
            wa = 1.0 - w_small;
            wb = w_small;
        } else if (b > a) {
            wb = 1.0 - w_small;
            wa = w_small;
        } else {
            wa = wb = 0.5;
        }
    }
    if (blend <= q.distance) return q;

    q.distance = blend;
    Vec3 n = Vec3::Zero();
    bool defined = true;
    if (wa > 0.0) {
        if (da.distance > eps) n += wa * (da.foot - p) / da.distance;
        else defined = false;
    }
    if (wb > 0.0) {
        if (db.distance > eps) n += wb * (db.foot - p) / db.distance;
        else defined = false;
    }
    const double norm = n.norm();
    q.normal_defined = defined && norm > 1e-12;
    q.inward_normal = q.normal_defined ? Vec3(n / norm) : Vec3::Zero();
    return q;
}

Region Geometry::classify(const Vec3& p) const {
    if (p.x() <= 0.0) return Region::inlet;
    if (params_.kind == GeometryKind::tube) {
        return p.x() >= params_.main_length ? Region::exited_a : Region::main;
    }
    const Vec3 rel = p - junction_;
    const double ta = rel.dot(dir_a_);
    const double tb = rel.dot(dir_b_);
    const bool nearer_a = line_distance(p, junction_, dir_a_) <= line_distance(p, junction_, dir_b_);
    const double t_near = nearer_a ? ta : tb;
    if (t_near >= params_.branch_length) return nearer_a ? Region::exited_a : Region::exited_b;
    if (p.x() < params_.main_length - params_.diameter) return Region::main;
    if (t_near < apex_offset_ + params_.diameter) return Region::junction;
    return nearer_a ? Region::branch_a : Region::branch_b;
}

EntranceSet Geometry::entrance_positions(int count, double capsule_radius) const {
    if (count < 1) throw InvalidParameter("entrance_positions: count must be >= 1");
    if (!(capsule_radius >= 0.0) || capsule_radius >= radius()) {
        throw InvalidParameter("entrance_positions: capsule does not fit in the lumen");
    }
    const double r_max = radius() - capsule_radius;
    EntranceSet set;
    set.positions.reserve(static_cast<std::size_t>(count));
    set.positions.emplace_back(0.0, 0.0, 0.0);
    const int rest = count - 1;
    if (rest == 0) return set;

    // Ring count from the hexagonal packing number 1 + 3K(K+1) ~ count.
    const int rings = std::max(
        1, static_cast<int>(std::lround((std::sqrt(12.0 * count - 3.0) - 3.0) / 6.0)));
    const int weight_sum = rings * (rings + 1) / 2;
    std::vector<int> per_ring(static_cast<std::size_t>(rings));
    std::vector<std::pair<double, int>> remainders;
    int assigned = 0;
    for (int k = 1; k <= rings; ++k) {
        const double share = static_cast<double>(rest) * k / weight_sum;
        per_ring[k - 1] = static_cast<int>(std::floor(share));
        assigned += per_ring[k - 1];
        remainders.emplace_back(share - per_ring[k - 1], k - 1);
    }
    // Largest remainder first; ties favour the outer ring.
    std::sort(remainders.begin(), remainders.end(), [](const auto& l, const auto& r) {
        return l.first != r.first ? l.first > r.first : l.second > r.second;
    });
    for (int i = 0; assigned < rest; ++i, ++assigned) ++per_ring[remainders[i].second];

    for (int k = 1; k <= rings; ++k) {
        const int n = per_ring[k - 1];
        const double rr = r_max * k / rings;
        for (int j = 0; j < n; ++j) {
            const double theta = 2.0 * kPi * (j + 0.5) / n;
            set.positions.emplace_back(0.0, rr * std::cos(theta), rr * std::sin(theta));
        }
    }
    return set;
}

Geometry build_geometry(GeometryKind kind, double main_length, double branch_length,
                        double diameter, double branch_angle) {
    GeometryParams params;
    params.kind = kind;
    params.main_length = main_length;
    params.branch_length = branch_length;
    params.diameter = diameter;
    params.branch_angle = branch_angle;
    return Geometry(params);
}

}  // namespace capnav
