#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "capnav/types.hpp"

namespace capnav {

enum class GeometryKind { tube, y_junction };

enum class Region { inlet, main, junction, branch_a, branch_b, exited_a, exited_b };

enum class Branch { a, b };

std::string_view to_string(GeometryKind kind);
std::string_view to_string(Region region);
GeometryKind parse_geometry_kind(std::string_view text);
Region parse_region(std::string_view text);

inline bool is_exited(Region r) { return r == Region::exited_a || r == Region::exited_b; }

/// Result of a wall query: interior distance to the nearest wall (negative
/// outside the lumen) and the unit normal pointing into the lumen.
///
/// `normal_defined` is false on the medial axis of a tube segment, where the
/// nearest wall direction is ambiguous.
struct WallQuery {
    double distance = 0.0;
    Vec3 inward_normal = Vec3::Zero();
    bool normal_defined = false;
};

struct EntranceSet {
    std::vector<Vec3> positions;
    int count() const { return static_cast<int>(positions.size()); }
};

struct GeometryParams {
    GeometryKind kind = GeometryKind::y_junction;
    double main_length = 0.096;
    double branch_length = 0.046;
    double diameter = 0.005;
    double branch_angle = kPi / 2;  // between the daughter branches
    double fillet_radius = 5e-4;    // crotch blend width
    double inlet_extrusion = 0.0;
};

/*!
 * Parametric vessel: a straight tube or a planar Y-junction.
 *
 * The main channel runs along +x from the inlet plane x = 0 to the junction
 * point J = (main_length, 0, 0). Daughter branches leave J symmetrically at
 * +/- branch_angle/2 in the x-y plane; branch A points toward +y. Gravity is
 * applied along -z by the dynamics, perpendicular to the junction plane.
 *
 * The lumen is the union of round tubes around the three axis segments. The
 * interior distance is max(R - d_main, smax(R - d_a, R - d_b)) where smax is
 * a quadratic smooth maximum of width fillet_radius, which rounds the crotch
 * ridge between the branches. Every term is 1-Lipschitz, so the distance is
 * too. Immutable after construction.
 */
class Geometry {
  public:
    explicit Geometry(const GeometryParams& params);

    const GeometryParams& params() const { return params_; }
    GeometryKind kind() const { return params_.kind; }
    double diameter() const { return params_.diameter; }
    double radius() const { return 0.5 * params_.diameter; }
    double main_length() const { return params_.main_length; }
    double branch_length() const { return params_.branch_length; }

    Vec3 junction_point() const { return junction_; }
    Vec3 branch_direction(Branch b) const { return b == Branch::a ? dir_a_ : dir_b_; }
    Vec3 branch_outlet(Branch b) const;

    /// Along-branch coordinate of the crotch apex, measured from J.
    double apex_offset() const { return apex_offset_; }
    /// Crotch apex in the junction plane (J for a tube).
    Vec3 apex_point() const;

    bool in_bounds(const Vec3& p) const;
    Vec3 bounds_min() const { return lo_; }
    Vec3 bounds_max() const { return hi_; }

    /// Throws OutOfDomain outside the bounding box (plus one diameter margin).
    WallQuery wall_query(const Vec3& p) const;
    double signed_distance(const Vec3& p) const { return wall_query(p).distance; }

    Region classify(const Vec3& p) const;

    /// Deterministic entrance layout on the inlet plane: a center point plus
    /// concentric rings filling the disk of radius R - capsule_radius. Ring k
    /// receives a share of the remaining points proportional to k.
    EntranceSet entrance_positions(int count, double capsule_radius) const;

  private:
    GeometryParams params_;
    Vec3 junction_;
    Vec3 dir_a_;
    Vec3 dir_b_;
    double apex_offset_ = 0.0;
    Vec3 lo_;
    Vec3 hi_;
};

Geometry build_geometry(GeometryKind kind, double main_length, double branch_length,
                        double diameter, double branch_angle = kPi / 2);

}  // namespace capnav
