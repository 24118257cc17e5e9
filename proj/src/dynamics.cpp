#include "capnav/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace capnav {

std::string_view to_string(DragLaw law) {
    return law == DragLaw::stokes ? "stokes" : "schiller_naumann";
}

DragLaw parse_drag_law(std::string_view text) {
    if (text == "stokes") return DragLaw::stokes;
    if (text == "schiller_naumann") return DragLaw::schiller_naumann;
    throw InvalidParameter("unknown drag law '" + std::string(text) + "'");
}

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::exited_a: return "exited_A";
        case Outcome::exited_b: return "exited_B";
        case Outcome::stalled: return "stalled";
        case Outcome::dissolved: return "dissolved";
        case Outcome::failed: return "failed";
    }
    return "unknown";
}

Outcome parse_outcome(std::string_view text) {
    for (Outcome o : {Outcome::exited_a, Outcome::exited_b, Outcome::stalled, Outcome::dissolved,
                      Outcome::failed}) {
        if (to_string(o) == text) return o;
    }
    throw InvalidParameter("unknown outcome '" + std::string(text) + "'");
}

void CapsuleSpec::validate() const {
    if (!(diameter > 0.0) || !(density > 0.0)) {
        throw InvalidParameter("capsule: diameter and density must be > 0");
    }
    if (!magnetization) throw InvalidParameter("capsule: missing magnetization curve");
}

void DynamicsConfig::validate() const {
    if (!(dt_constant > 0.0) || !(dt_min > 0.0) || !(dt_max >= dt_min)) {
        throw InvalidParameter("dynamics: need dt_constant > 0 and 0 < dt_min <= dt_max");
    }
    if (!(gravity >= 0.0)) throw InvalidParameter("dynamics: gravity must be >= 0");
    if (!(restitution >= 0.0 && restitution <= 1.0)) {
        throw InvalidParameter("dynamics: restitution must lie in [0, 1]");
    }
    if (!(gravity_direction.norm() > 0.0)) {
        throw InvalidParameter("dynamics: gravity direction must be non-zero");
    }
}

double relaxation_time(const CapsuleSpec& spec, const FluidProperties& props, double slip_speed) {
    const double d = spec.diameter;
    const double stokes = spec.density * d * d / (18.0 * props.viscosity);
    if (spec.drag_law == DragLaw::stokes || slip_speed <= 0.0) return stokes;
    const double re_p = props.density * slip_speed * d / props.viscosity;
    return stokes / (1.0 + 0.15 * std::pow(re_p, 0.687));
}

namespace {

Vec3 gravity_acceleration(const CapsuleSpec& spec, const FluidProperties& props,
                          const DynamicsConfig& config) {
    if (!config.gravity_on) return Vec3::Zero();
    const Vec3 g_hat = config.gravity_direction.normalized();
    return config.gravity * (spec.density - props.density) / spec.density * g_hat;
}

Vec3 magnetic_acceleration(const CapsuleSpec& spec, const MagneticSample& magnetic) {
    const Vec3 m = moment_vector(*spec.magnetization, magnetic.field);
    return magnetic_force(magnetic.gradient, m) / spec.mass();
}

CapsuleState advance(const CapsuleSpec& spec, const Environment& env, const CapsuleState& state,
                     const Vec3& uf, double dt, CollisionStats* stats) {
    if (dt == 0.0) return state;
    const MagneticSample mag = env.magnetics.sample(state.position);
    const Vec3 slip = state.velocity - uf;
    const double tau = relaxation_time(spec, env.fluid, slip.norm());
    const Vec3 a_ext = gravity_acceleration(spec, env.fluid, env.config) + magnetic_acceleration(spec, mag);
    const double decay = std::exp(-dt / tau);
    const double gain = -std::expm1(-dt / tau);

    CapsuleState next = state;
    next.time = state.time + dt;
    next.velocity = uf + slip * decay + a_ext * (tau * gain);
    next.position = state.position + next.velocity * dt;
    if (!all_finite(next.velocity) || !all_finite(next.position)) {
        throw NumericalFailure("dynamics: non-finite state at t = " + std::to_string(next.time),
                               state);
    }
    next = reflect_collision(env.geometry, spec, next, env.config.restitution, stats);
    next.region = env.geometry.classify(next.position);
    return next;
}

}  // namespace

Vec3 net_force(const CapsuleSpec& spec, const FluidProperties& props, const CapsuleState& state,
               const Vec3& flow_velocity, const MagneticSample& magnetic,
               const DynamicsConfig& config) {
    const Vec3 slip = flow_velocity - state.velocity;
    const double m = spec.mass();
    const Vec3 drag = m * slip / relaxation_time(spec, props, slip.norm());
    return drag + m * gravity_acceleration(spec, props, config) +
           magnetic_force(magnetic.gradient, moment_vector(*spec.magnetization, magnetic.field));
}

double adaptive_dt(const CapsuleState& state, const Vec3& flow_velocity,
                   const DynamicsConfig& config) {
    const double speed = state.velocity.norm() + flow_velocity.norm();
    if (!(speed > 0.0)) return config.dt_max;
    return std::clamp(config.dt_constant / speed, config.dt_min, config.dt_max);
}

CapsuleState reflect_collision(const Geometry& geometry, const CapsuleSpec& spec,
                               const CapsuleState& state, double restitution,
                               CollisionStats* stats) {
    const double r = spec.radius();
    WallQuery q = geometry.wall_query(state.position);
    if (q.distance >= r) return state;
    if (!q.normal_defined) {
        if (stats) ++stats->medial_axis_skips;
        return state;
    }
    CapsuleState out = state;
    // The distance field is 1-Lipschitz but only exact per tube segment, so
    // a few projections may be needed near the junction.
    for (int iter = 0; iter < 16 && q.distance < r - 1e-12; ++iter) {
        out.position += (r - q.distance) * q.inward_normal;
        const WallQuery next = geometry.wall_query(out.position);
        if (!next.normal_defined) break;
        q = next;
    }
    const Vec3& n = q.inward_normal;
    const double vn = out.velocity.dot(n);
    if (vn < 0.0) out.velocity -= (1.0 + restitution) * vn * n;
    if (stats) ++stats->contacts;
    return out;
}

CapsuleState step(const CapsuleSpec& spec, const Environment& env, const CapsuleState& state,
                  double dt, CollisionStats* stats) {
    return advance(spec, env, state, env.flow.sample(state.position), dt, stats);
}

Trajectory simulate_trajectory(const CapsuleSpec& spec, const Environment& env,
                               const Vec3& entrance_point, const TrajectoryOptions& options) {
    spec.validate();
    env.config.validate();
    Trajectory traj;
    CapsuleState state;
    state.position = entrance_point;
    state.velocity = env.flow.sample(entrance_point);
    state.region = env.geometry.classify(entrance_point);
    traj.states.push_back(state);

    std::optional<ThermalState> thermal;
    if (options.dissolution) thermal.emplace(*options.dissolution);

    CollisionStats stats;
    bool recorded_last = true;
    try {
        while (true) {
            if (state.region == Region::exited_a) {
                traj.outcome = Outcome::exited_a;
                break;
            }
            if (state.region == Region::exited_b) {
                traj.outcome = Outcome::exited_b;
                break;
            }
            if (state.dissolved_fraction >= 1.0) {
                traj.outcome = Outcome::dissolved;
                break;
            }
            if (state.time >= options.limits.max_time || traj.steps >= options.limits.max_steps) {
                traj.outcome = Outcome::stalled;
                break;
            }
            const Vec3 uf = env.flow.sample(state.position);
            const double dt = adaptive_dt(state, uf, env.config);
            const bool amf = thermal && options.amf_on && options.amf_on(state.time);
            state = advance(spec, env, state, uf, dt, &stats);
            if (thermal) {
                thermal->advance(dt, amf);
                state.dissolved_fraction = thermal->dissolved_fraction();
            }
            ++traj.steps;
            recorded_last = options.record_stride > 0 && traj.steps % options.record_stride == 0;
            if (recorded_last) traj.states.push_back(state);
        }
    } catch (const OutOfDomain& e) {
        throw NumericalFailure(std::string("dynamics: capsule left the domain: ") + e.what(), state);
    }
    if (!recorded_last) traj.states.push_back(state);
    traj.wall_contact_count = stats.contacts;
    traj.medial_axis_skips = stats.medial_axis_skips;
    return traj;
}

void write_trajectory_csv(const Trajectory& trajectory, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "t,x,y,z,vx,vy,vz,region\n";
    char buf[256];
    for (const auto& s : trajectory.states) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,", s.time,
                      s.position.x(), s.position.y(), s.position.z(), s.velocity.x(),
                      s.velocity.y(), s.velocity.z());
        out << buf << to_string(s.region) << '\n';
    }
}

}  // namespace capnav
