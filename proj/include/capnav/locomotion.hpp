#pragma once

#include <optional>

#include "capnav/dynamics.hpp"
#include "capnav/flowfield.hpp"

namespace capnav {

/// Kinematic surface-rolling model: v = slip * pi * d * f, reduced inside the
/// bounce band and zero past step-out.
struct RollingModel {
    double slip_factor = 0.0037 / (kPi * 1.69e-3 * 5.0);  // 0.37 cm/s at 5 Hz, d = 1.69 mm
    double step_out_frequency = 12.0;                     // Hz
    double band_low = 5.0;                                // Hz, exclusive
    double band_high = 7.0;                               // Hz, inclusive
    double band_efficiency = 0.6;

    void validate() const;
};

double rolling_velocity(const RollingModel& model, double capsule_diameter, double frequency);

/// Which developed profile the counterflow tube uses.
enum class CounterflowProfile { automatic, parabolic, power_law };

std::string_view to_string(CounterflowProfile p);
CounterflowProfile parse_counterflow_profile(std::string_view text);

struct CounterflowSetup {
    double tube_diameter = 6.3e-3;  // m
    CounterflowProfile profile = CounterflowProfile::automatic;
    double power_law_exponent = 7.0;
};

/// Axial drag on a stationary capsule resting on the floor of the tube when
/// the mean counterflow is `mean_velocity`; the flow speed is sampled one
/// capsule radius above the floor.
double counterflow_drag(const CapsuleSpec& spec, const FluidProperties& props,
                        const CounterflowSetup& setup, double mean_velocity);

/// Largest mean counterflow for which the magnetic pull at (gradient, field)
/// still balances the drag. Bisection on the mean velocity.
double max_counterflow(const CapsuleSpec& spec, const FluidProperties& props,
                       const CounterflowSetup& setup, double gradient, double field = 0.030);

}  // namespace capnav
