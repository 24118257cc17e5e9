#include "capnav/flowfield.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace capnav {

void FluidProperties::validate() const {
    if (!(density > 0.0) || !(viscosity > 0.0)) {
        throw InvalidParameter("fluid: density and viscosity must be > 0");
    }
}

double reynolds(const FluidProperties& props, double mean_velocity, double diameter) {
    if (!(diameter > 0.0)) throw InvalidParameter("reynolds: diameter must be > 0");
    return props.density * mean_velocity * diameter / props.viscosity;
}

double friction_factor_from_pressure(double pressure_drop, double diameter, double length,
                                     const FluidProperties& props, double mean_velocity) {
    if (!(length > 0.0)) throw InvalidParameter("friction factor: length must be > 0");
    if (!(mean_velocity > 0.0)) {
        throw InvalidParameter("friction factor: mean velocity must be > 0");
    }
    return pressure_drop * diameter / (0.5 * props.density * mean_velocity * mean_velocity * length);
}

double friction_factor_blasius(double re) {
    if (!(re >= 3000.0 && re <= 1e5)) {
        std::ostringstream os;
        os << "blasius: Re = " << re << " outside the validity range [3000, 1e5]";
        throw OutOfRange(os.str());
    }
    return 0.316 * std::pow(re, -0.25);
}

double VelocityProfile::shape(double r_over_radius) const {
    const double s = std::abs(r_over_radius);
    if (s >= 1.0) return 0.0;
    if (kind == ProfileKind::parabolic) return 2.0 * (1.0 - s * s);
    return peak_ratio() * std::pow(1.0 - s, 1.0 / exponent);
}

double VelocityProfile::peak_ratio() const {
    if (kind == ProfileKind::parabolic) return 2.0;
    const double n = exponent;
    return (n + 1.0) * (2.0 * n + 1.0) / (2.0 * n * n);
}

VelocityProfile VelocityProfile::for_reynolds(double re, double exponent) {
    if (!(exponent > 0.0)) throw InvalidParameter("profile: power-law exponent must be > 0");
    VelocityProfile p;
    p.kind = re < kTransitionReynolds ? ProfileKind::parabolic : ProfileKind::power_law;
    p.exponent = exponent;
    return p;
}

GridVectorField load_grid_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    const auto text = detail::read_grid_text(in, path, "VFIELD v1", 3);
    std::vector<GridVectorField::Node> nodes(text.values.size() / 3);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        nodes[i] = {text.values[3 * i], text.values[3 * i + 1], text.values[3 * i + 2]};
    }
    return GridVectorField(text.dims, text.origin, text.spacing, std::move(nodes));
}

void save_grid_field(const GridVectorField& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    std::vector<double> flat;
    flat.reserve(field.values().size() * 3);
    for (const auto& v : field.values()) flat.insert(flat.end(), v.begin(), v.end());
    detail::write_grid_text(out, "VFIELD v1", field.dims(), field.origin(), field.spacing(), flat, 3);
}

Vec3 sample_grid_field(const GridVectorField& field, const Vec3& p) {
    const auto v = field.sample(p);
    return {v[0], v[1], v[2]};
}

FlowField FlowField::analytic(const Geometry& geometry, double mean_velocity,
                              VelocityProfile profile, double split_fraction) {
    if (!(mean_velocity >= 0.0) || !std::isfinite(mean_velocity)) {
        throw InvalidParameter("flow: mean velocity must be >= 0");
    }
    if (!(split_fraction >= 0.0 && split_fraction <= 1.0)) {
        throw InvalidParameter("flow: split fraction must lie in [0, 1]");
    }
    FlowField f(geometry);
    f.source_ = FlowSource::analytic;
    f.mean_velocity_ = mean_velocity;
    f.profile_ = profile;
    f.split_fraction_ = split_fraction;
    return f;
}

FlowField FlowField::from_grid(const Geometry& geometry, GridVectorField grid) {
    FlowField f(geometry);
    f.source_ = FlowSource::grid;
    f.grid_ = std::make_shared<const GridVectorField>(std::move(grid));
    return f;
}

double FlowField::branch_mean_velocity(Branch b) const {
    // Equal branch and main diameters: the area ratio is one.
    if (geometry_.kind() == GeometryKind::tube) return mean_velocity_;
    const double fraction = b == Branch::a ? split_fraction_ : 1.0 - split_fraction_;
    return fraction * mean_velocity_;
}

Vec3 FlowField::tube_velocity(const Vec3& p, const Vec3& start, const Vec3& dir,
                              double mean) const {
    const Vec3 rel = p - start;
    const double r = (rel - rel.dot(dir) * dir).norm();
    return mean * profile_.shape(r / geometry_.radius()) * dir;
}

Vec3 FlowField::sample(const Vec3& p) const {
    if (source_ == FlowSource::grid) return sample_grid_field(*grid_, p);

    const Vec3 origin = Vec3::Zero();
    if (geometry_.kind() == GeometryKind::tube) {
        return tube_velocity(p, origin, Vec3::UnitX(), mean_velocity_);
    }
    const double apex_x = geometry_.apex_point().x();
    const double blend_start = apex_x - geometry_.diameter();
    const double x = p.x();
    if (x <= blend_start) return tube_velocity(p, origin, Vec3::UnitX(), mean_velocity_);

    const Vec3 j = geometry_.junction_point();
    const Vec3 branches =
        tube_velocity(p, j, geometry_.branch_direction(Branch::a), branch_mean_velocity(Branch::a)) +
        tube_velocity(p, j, geometry_.branch_direction(Branch::b), branch_mean_velocity(Branch::b));
    if (x >= apex_x) return branches;

    const double s = (x - blend_start) / (apex_x - blend_start);
    const double w = s * s * (3.0 - 2.0 * s);
    return (1.0 - w) * tube_velocity(p, origin, Vec3::UnitX(), mean_velocity_) + w * branches;
}

Vec3 FlowField::velocity_at(const Vec3& p) const {
    if (source_ == FlowSource::analytic) {
        const double d = geometry_.signed_distance(p);
        if (d < -1e-12 * geometry_.radius()) {
            std::ostringstream os;
            os << "flow: point (" << p.x() << ", " << p.y() << ", " << p.z()
               << ") outside the lumen";
            throw OutOfDomain(os.str());
        }
    }
    return sample(p);
}

Vec3 velocity_at(const FlowField& flow, const Vec3& p) { return flow.velocity_at(p); }

}  // namespace capnav
