#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "capnav/types.hpp"

namespace capnav {

struct HeatingSample {
    double time;         // s
    double temperature;  // degC
};

class HeatingCurve {
  public:
    explicit HeatingCurve(std::vector<HeatingSample> samples);
    /// CSV with header `t_seconds,temp_celsius`.
    static HeatingCurve load_csv(const std::string& path);

    const std::vector<HeatingSample>& samples() const { return samples_; }

  private:
    std::vector<HeatingSample> samples_;
};

/// Water heat capacity per unit volume, J K^-1 mL^-1.
inline constexpr double kWaterHeatCapacityPerMl = 4.184;

/// SLP = (C / m) dT/dt with dT/dt the least-squares slope over the first
/// `window` seconds of the curve. Needs at least 3 samples in the window.
double slp_from_curve(const HeatingCurve& curve, double heat_capacity_per_volume,
                      double concentration, double window = 10.0);

/// Capsule composition presets (mass fractions of the wet capsule).
enum class CompositionPreset { methods, cytotoxicity };

/// Iron-oxide mass fraction for the preset: 0.37 (fabrication recipe) or
/// 0.32 (cytotoxicity formulation).
double iron_oxide_fraction(CompositionPreset preset);

struct DissolutionModel {
    double slp = 190.0;               // W g^-1
    double particle_mass = 0.0;       // g of heating particles
    double thermal_mass = 0.5;        // J K^-1, capsule plus surrounding water
    double loss_coefficient = 0.0;    // W K^-1
    double melt_temperature = 37.5;   // degC
    double hold_time = 5.0;           // s
    double ambient = 25.0;            // degC

    double heating_power() const { return slp * particle_mass; }
    void validate() const;
};

/// Loss coefficient k for which the continuous step response
/// T(t) = ambient + (P/k)(1 - exp(-k t / C)) reaches the melt temperature
/// at `target_dissolution_time - hold_time`.
double calibrate_loss_coefficient(const DissolutionModel& model, double target_dissolution_time);

/// Reference scenario: 190 W/g particles in the 1.4 mm reference capsule,
/// loss coefficient calibrated for dissolution at 40 s.
DissolutionModel default_dissolution_model(CompositionPreset preset = CompositionPreset::methods);

inline constexpr double kThermalStep = 0.01;  // s

/*!
 * Lumped capsule temperature integrated in fixed 10 ms steps.
 *
 * Dissolution progresses while T >= melt temperature; the dissolved fraction
 * is the accumulated time at or above melt over hold_time, capped at 1, so it
 * never decreases.
 */
class ThermalState {
  public:
    explicit ThermalState(DissolutionModel model);

    /// Advances by `dt`; whole 10 ms steps are taken, the remainder carries over.
    void advance(double dt, bool field_on);
    void step(bool field_on);

    double temperature() const { return temperature_; }
    double time() const { return time_; }
    double dissolved_fraction() const;
    std::optional<double> dissolution_time() const { return dissolution_time_; }
    const DissolutionModel& model() const { return model_; }

  private:
    DissolutionModel model_;
    double temperature_;
    double time_ = 0.0;
    double carry_ = 0.0;
    std::optional<double> dissolution_time_;
    long steps_ = 0;
    long steps_above_melt_ = 0;
};

struct DissolutionResult {
    std::vector<HeatingSample> trace;
    std::optional<double> dissolution_time;
};

using FieldSchedule = std::function<bool(double time)>;

DissolutionResult simulate_dissolution(const DissolutionModel& model, const FieldSchedule& field_on,
                                       double duration = 120.0);

}  // namespace capnav
