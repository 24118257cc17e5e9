#pragma once

#include <memory>
#include <optional>
#include <string>

#include "capnav/geometry.hpp"
#include "capnav/grid.hpp"
#include "capnav/types.hpp"

namespace capnav {

struct FluidProperties {
    double density = 998.3;    // kg m^-3
    double viscosity = 0.001;  // kg m^-1 s^-1

    void validate() const;
};

/// Pipe Reynolds number rho * u * D / mu.
double reynolds(const FluidProperties& props, double mean_velocity, double diameter);

/// Darcy friction factor from a pressure drop over a developed section.
double friction_factor_from_pressure(double pressure_drop, double diameter, double length,
                                     const FluidProperties& props, double mean_velocity);

/// Smooth-pipe Blasius correlation 0.316 Re^-1/4, valid for 3000 <= Re <= 1e5.
double friction_factor_blasius(double re);

/// Laminar/turbulent selection threshold for analytic profiles.
inline constexpr double kTransitionReynolds = 2300.0;

enum class ProfileKind { parabolic, power_law };

struct VelocityProfile {
    ProfileKind kind = ProfileKind::power_law;
    double exponent = 7.0;  // n in (1 - r/R)^(1/n)

    /// Local axial speed over mean speed at normalized radius r/R (0 outside).
    double shape(double r_over_radius) const;
    /// Centerline speed over mean speed.
    double peak_ratio() const;

    static VelocityProfile for_reynolds(double re, double exponent = 7.0);
};

using GridVectorField = StructuredGrid<3>;

GridVectorField load_grid_field(const std::string& path);
void save_grid_field(const GridVectorField& field, const std::string& path);
Vec3 sample_grid_field(const GridVectorField& field, const Vec3& p);

enum class FlowSource { analytic, grid };

/*!
 * Velocity sampler over a geometry.
 *
 * Analytic fields use a developed profile in each tube segment. In branch k
 * the mean speed is set by the split fraction and the area ratio, so the
 * volumetric flux is conserved. Near the crotch the main-channel profile is
 * blended with the branch profiles by a smoothstep along x over one diameter
 * upstream of the apex.
 */
class FlowField {
  public:
    static FlowField analytic(const Geometry& geometry, double mean_velocity,
                              VelocityProfile profile, double split_fraction = 0.5);
    static FlowField from_grid(const Geometry& geometry, GridVectorField grid);

    FlowSource source() const { return source_; }
    double mean_velocity() const { return mean_velocity_; }
    double split_fraction() const { return split_fraction_; }
    const VelocityProfile& profile() const { return profile_; }
    double branch_mean_velocity(Branch b) const;
    const Geometry& geometry() const { return geometry_; }

    /// Checked sample; throws OutOfDomain if the point is outside the lumen.
    Vec3 velocity_at(const Vec3& p) const;

    /// Unchecked sample for points already known to be inside the domain.
    Vec3 sample(const Vec3& p) const;

  private:
    FlowField(const Geometry& geometry) : geometry_(geometry) {}

    Vec3 tube_velocity(const Vec3& p, const Vec3& start, const Vec3& dir, double mean) const;

    Geometry geometry_;
    FlowSource source_ = FlowSource::analytic;
    double mean_velocity_ = 0.0;
    double split_fraction_ = 0.5;
    VelocityProfile profile_;
    std::shared_ptr<const GridVectorField> grid_;
};

Vec3 velocity_at(const FlowField& flow, const Vec3& p);

}  // namespace capnav
