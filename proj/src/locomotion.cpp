#include "capnav/locomotion.hpp"

#include <cmath>

namespace capnav {

void RollingModel::validate() const {
    if (!(slip_factor > 0.0 && slip_factor <= 1.0)) {
        throw InvalidParameter("rolling: slip_factor must lie in (0, 1]");
    }
    if (!(band_low >= 0.0 && band_low < band_high && band_high <= step_out_frequency)) {
        throw InvalidParameter("rolling: need 0 <= band_low < band_high <= step_out_frequency");
    }
    if (!(band_efficiency > 0.0 && band_efficiency <= 1.0)) {
        throw InvalidParameter("rolling: band_efficiency must lie in (0, 1]");
    }
}

double rolling_velocity(const RollingModel& model, double capsule_diameter, double frequency) {
    if (!(frequency >= 0.0)) throw InvalidParameter("rolling: frequency must be >= 0");
    if (!(capsule_diameter > 0.0)) throw InvalidParameter("rolling: diameter must be > 0");
    if (frequency > model.step_out_frequency) return 0.0;
    double v = model.slip_factor * kPi * capsule_diameter * frequency;
    if (frequency > model.band_low && frequency <= model.band_high) v *= model.band_efficiency;
    return v;
}

std::string_view to_string(CounterflowProfile p) {
    switch (p) {
        case CounterflowProfile::automatic: return "auto";
        case CounterflowProfile::parabolic: return "parabolic";
        case CounterflowProfile::power_law: return "power_law";
    }
    return "auto";
}

CounterflowProfile parse_counterflow_profile(std::string_view text) {
    if (text == "auto") return CounterflowProfile::automatic;
    if (text == "parabolic") return CounterflowProfile::parabolic;
    if (text == "power_law") return CounterflowProfile::power_law;
    throw InvalidParameter("unknown counterflow profile '" + std::string(text) + "'");
}

double counterflow_drag(const CapsuleSpec& spec, const FluidProperties& props,
                        const CounterflowSetup& setup, double mean_velocity) {
    const double big_r = 0.5 * setup.tube_diameter;
    if (!(spec.radius() < big_r)) throw InvalidParameter("counterflow: capsule does not fit the tube");
    VelocityProfile profile;
    switch (setup.profile) {
        case CounterflowProfile::automatic:
            profile = VelocityProfile::for_reynolds(
                reynolds(props, mean_velocity, setup.tube_diameter), setup.power_law_exponent);
            break;
        case CounterflowProfile::parabolic: profile.kind = ProfileKind::parabolic; break;
        case CounterflowProfile::power_law:
            profile.kind = ProfileKind::power_law;
            profile.exponent = setup.power_law_exponent;
            break;
    }
    const double u = mean_velocity * profile.shape(1.0 - spec.radius() / big_r);
    return spec.mass() * u / relaxation_time(spec, props, u);
}

double max_counterflow(const CapsuleSpec& spec, const FluidProperties& props,
                       const CounterflowSetup& setup, double gradient, double field) {
    if (!(gradient >= 0.0)) throw InvalidParameter("counterflow: gradient must be >= 0");
    spec.validate();
    const double pull = gradient * spec.magnetization->moment_at(field);
    if (pull == 0.0) return 0.0;
    // Drag is increasing in the mean velocity (the laminar-to-turbulent
    // profile switch only raises the near-wall speed), so bracket and bisect.
    double lo = 0.0;
    double hi = 0.01;
    int expansions = 0;
    while (counterflow_drag(spec, props, setup, hi) <= pull) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 60) {
            throw NumericalFailure("counterflow: no drag balance found", CapsuleState{});
        }
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (counterflow_drag(spec, props, setup, mid) <= pull) lo = mid;
        else hi = mid;
    }
    return lo;
}

}  // namespace capnav
