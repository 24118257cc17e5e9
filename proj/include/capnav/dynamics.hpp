#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "capnav/flowfield.hpp"
#include "capnav/geometry.hpp"
#include "capnav/hyperthermia.hpp"
#include "capnav/magnetics.hpp"
#include "capnav/types.hpp"

namespace capnav {

enum class DragLaw { stokes, schiller_naumann };

std::string_view to_string(DragLaw law);
DragLaw parse_drag_law(std::string_view text);

struct CapsuleSpec {
    double diameter = 1.4e-3;   // m
    double density = 3187.74;   // kg m^-3
    std::shared_ptr<const MagnetizationCurve> magnetization =
        std::make_shared<const MagnetizationCurve>(MagnetizationCurve::reference());
    DragLaw drag_law = DragLaw::schiller_naumann;

    double radius() const { return 0.5 * diameter; }
    double volume() const { return kPi / 6.0 * diameter * diameter * diameter; }
    double mass() const { return density * volume(); }
    void validate() const;
};

struct CapsuleState {
    double time = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Region region = Region::inlet;
    double dissolved_fraction = 0.0;
};

enum class Outcome { exited_a, exited_b, stalled, dissolved, failed };

std::string_view to_string(Outcome outcome);
Outcome parse_outcome(std::string_view text);

struct Trajectory {
    std::vector<CapsuleState> states;
    Outcome outcome = Outcome::stalled;
    int wall_contact_count = 0;
    int medial_axis_skips = 0;
    long steps = 0;

    const CapsuleState& final_state() const { return states.back(); }
};

/// Integrator and environment settings shared by every trajectory.
struct DynamicsConfig {
    double gravity = 9.81;                  // m s^-2
    Vec3 gravity_direction = -Vec3::UnitZ();
    bool gravity_on = true;
    double dt_constant = 1e-5;              // m, numerator of the adaptive step
    double dt_min = 1e-7;                   // s
    double dt_max = 1e-3;                   // s
    double restitution = 1.0;               // 1 = specular elastic

    void validate() const;
};

struct Limits {
    double max_time = 5.0;
    long max_steps = 5'000'000;
};

class NumericalFailure : public std::runtime_error {
  public:
    NumericalFailure(const std::string& what, CapsuleState last_valid)
        : std::runtime_error(what), last_valid_(std::move(last_valid)) {}
    const CapsuleState& last_valid_state() const { return last_valid_; }

  private:
    CapsuleState last_valid_;
};

/// Everything a trajectory reads; all members immutable and shareable.
struct Environment {
    const Geometry& geometry;
    const FlowField& flow;
    const MagneticSampler& magnetics;
    FluidProperties fluid;
    DynamicsConfig config;
};

/// Stokes: rho_p d^2 / (18 mu). Schiller-Naumann divides by
/// 1 + 0.15 Re_p^0.687 with Re_p = rho_f |u_f - u_p| d / mu.
double relaxation_time(const CapsuleSpec& spec, const FluidProperties& props, double slip_speed);

/// Drag + (gravity - buoyancy) + magnetic force on the capsule.
Vec3 net_force(const CapsuleSpec& spec, const FluidProperties& props, const CapsuleState& state,
               const Vec3& flow_velocity, const MagneticSample& magnetic,
               const DynamicsConfig& config);

/// dt = dt_constant / (|u_p| + |u_f|), clamped to [dt_min, dt_max].
double adaptive_dt(const CapsuleState& state, const Vec3& flow_velocity,
                   const DynamicsConfig& config);

/// Counters updated by collision handling.
struct CollisionStats {
    int contacts = 0;
    int medial_axis_skips = 0;
};

/// Projects a penetrating capsule back to distance = radius along the inward
/// normal and reflects the approaching normal velocity component (scaled by
/// the restitution coefficient). No-op if the capsule does not penetrate.
CapsuleState reflect_collision(const Geometry& geometry, const CapsuleSpec& spec,
                               const CapsuleState& state, double restitution = 1.0,
                               CollisionStats* stats = nullptr);

/// One step: exact exponential drag relaxation toward the local flow with the
/// non-drag acceleration held constant over dt, then a first-order position
/// update and collision resolution.
CapsuleState step(const CapsuleSpec& spec, const Environment& env, const CapsuleState& state,
                  double dt, CollisionStats* stats = nullptr);

struct TrajectoryOptions {
    Limits limits;
    /// Record every n-th step (0: only initial and final states).
    long record_stride = 1;
    /// Attaches the lumped heating model; `amf_on` is then evaluated per step.
    std::optional<DissolutionModel> dissolution;
    FieldSchedule amf_on;
};

Trajectory simulate_trajectory(const CapsuleSpec& spec, const Environment& env,
                               const Vec3& entrance_point, const TrajectoryOptions& options = {});

/// CSV `t,x,y,z,vx,vy,vz,region`, 9 significant digits.
void write_trajectory_csv(const Trajectory& trajectory, const std::string& path);

}  // namespace capnav
