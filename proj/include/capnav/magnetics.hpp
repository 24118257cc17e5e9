#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "capnav/grid.hpp"
#include "capnav/types.hpp"

namespace capnav {

/// Measured moment of 72 memu at 30 mT for the reference capsule.
inline constexpr double kReferenceField = 0.030;       // T
inline constexpr double kReferenceMoment = 7.2e-5;     // A m^2
inline constexpr double kSaturationRatio = 1.6;        // saturation / reference moment

/*!
 * Capsule moment magnitude versus field magnitude.
 *
 * Piecewise-linear through the samples, clamped to the last sample beyond
 * the data range, extended as an odd function for negative fields.
 */
class MagnetizationCurve {
  public:
    struct Sample {
        double field;   // T
        double moment;  // A m^2
    };

    explicit MagnetizationCurve(std::vector<Sample> samples);

    /// Langevin-shaped curve through the 30 mT anchor, saturating at 1.6x.
    static MagnetizationCurve reference();
    static MagnetizationCurve load(const std::string& path);

    double moment_at(double field) const;
    const std::vector<Sample>& samples() const { return samples_; }

  private:
    std::vector<Sample> samples_;
};

inline double moment_at(const MagnetizationCurve& curve, double field) {
    return curve.moment_at(field);
}

/// Field and its gradient; grad(i, j) = dB_i / dx_j.
struct MagneticSample {
    Vec3 field = Vec3::Zero();
    Mat3 gradient = Mat3::Zero();
};

/// F_i = sum_j dB_i/dx_j m_j.
inline Vec3 magnetic_force(const Mat3& gradient, const Vec3& moment) { return gradient * moment; }

/// Moment vector for a superparamagnetic capsule, aligned with B.
Vec3 moment_vector(const MagnetizationCurve& curve, const Vec3& field);

class MagneticSampler {
  public:
    virtual ~MagneticSampler() = default;
    virtual MagneticSample sample(const Vec3& p) const = 0;
};

/// Spatially uniform field and gradient.
class UniformMagnetics final : public MagneticSampler {
  public:
    explicit UniformMagnetics(MagneticSample value) : value_(std::move(value)) {}
    MagneticSample sample(const Vec3&) const override { return value_; }
    const MagneticSample& value() const { return value_; }

  private:
    MagneticSample value_;
};

/*!
 * Uniform command: field magnitude along `direction` and a gradient vector.
 *
 * The tensor is g * B_hat^T made trace-free by subtracting (tr/3) I, so the
 * force on a moment aligned with B is |m| (g - (g . B_hat) B_hat / 3). For a
 * gradient perpendicular to the field the trace is zero and F = |m| g.
 */
UniformMagnetics uniform_command(const Vec3& direction, double field_magnitude,
                                 const Vec3& gradient_vector);

using WorkspaceGrid = StructuredGrid<12>;

/// Measured workspace map: B then the 9 gradient entries row-major per node.
class WorkspaceMap final : public MagneticSampler {
  public:
    explicit WorkspaceMap(WorkspaceGrid grid) : grid_(std::move(grid)) {}

    static WorkspaceMap load(const std::string& path);
    void save(const std::string& path) const;

    MagneticSample sample(const Vec3& p) const override;
    const WorkspaceGrid& grid() const { return grid_; }

  private:
    WorkspaceGrid grid_;
};

inline MagneticSample sample_workspace(const WorkspaceMap& map, const Vec3& p) {
    return map.sample(p);
}

struct CapabilityEnvelope {
    double max_field = 0.030;                 // T
    double max_gradient_at_max_field = 1.0;   // T m^-1

    void validate() const;
};

struct FieldCommand {
    double field = 0.0;                        // T
    Vec3 direction = Vec3::UnitX();            // unit
    Vec3 gradient = Vec3::Zero();              // T m^-1
};

/// Scales field and gradient magnitudes into the envelope, preserving direction.
FieldCommand clamp_command(const CapabilityEnvelope& envelope, const FieldCommand& request);

}  // namespace capnav
