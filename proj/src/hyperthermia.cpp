#include "capnav/hyperthermia.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace capnav {

HeatingCurve::HeatingCurve(std::vector<HeatingSample> samples) : samples_(std::move(samples)) {
    if (samples_.size() < 2) throw InvalidParameter("heating curve: need at least 2 samples");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!std::isfinite(samples_[i].time) || !std::isfinite(samples_[i].temperature)) {
            throw InvalidParameter("heating curve: non-finite sample");
        }
        if (i > 0 && !(samples_[i].time > samples_[i - 1].time)) {
            throw InvalidParameter("heating curve: times must be strictly increasing");
        }
    }
}

HeatingCurve HeatingCurve::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t_seconds,temp_celsius") {
        throw ParseError(path, lineno, "expected header 't_seconds,temp_celsius'");
    }
    std::vector<HeatingSample> samples;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError(path, lineno, "expected 't,T'");
        try {
            std::size_t used_t = 0;
            std::size_t used_T = 0;
            const std::string ts = line.substr(0, comma);
            const std::string Ts = line.substr(comma + 1);
            HeatingSample s{std::stod(ts, &used_t), std::stod(Ts, &used_T)};
            if (used_t != ts.size() || used_T != Ts.size()) throw std::invalid_argument("trailing");
            samples.push_back(s);
        } catch (const std::exception&) {
            throw ParseError(path, lineno, "malformed row '" + line + "'");
        }
    }
    try {
        return HeatingCurve(std::move(samples));
    } catch (const InvalidParameter& e) {
        throw ParseError(path, lineno, e.what());
    }
}

double slp_from_curve(const HeatingCurve& curve, double heat_capacity_per_volume,
                      double concentration, double window) {
    if (!(concentration > 0.0)) throw InvalidParameter("slp: concentration must be > 0");
    const auto& s = curve.samples();
    const double t0 = s.front().time;
    // Least squares on centered data; a constant temperature offset cancels.
    std::size_t n = 0;
    double mean_t = 0.0;
    double mean_T = 0.0;
    for (const auto& p : s) {
        if (p.time - t0 > window) break;
        mean_t += p.time;
        mean_T += p.temperature;
        ++n;
    }
    if (n < 3) throw FitError("slp: fewer than 3 samples in the initial window");
    mean_t /= static_cast<double>(n);
    mean_T /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = s[i].time - mean_t;
        sxx += dt * dt;
        sxy += dt * (s[i].temperature - mean_T);
    }
    if (!(sxx > 0.0)) throw FitError("slp: degenerate fit window");
    return heat_capacity_per_volume / concentration * (sxy / sxx);
}

double iron_oxide_fraction(CompositionPreset preset) {
    return preset == CompositionPreset::methods ? 0.37 : 0.32;
}

void DissolutionModel::validate() const {
    if (!(slp > 0.0) || !(particle_mass > 0.0) || !(thermal_mass > 0.0) ||
        !(loss_coefficient >= 0.0) || !(hold_time > 0.0)) {
        throw InvalidParameter("dissolution model: parameters must be positive");
    }
    if (!(melt_temperature > ambient)) {
        throw InvalidParameter("dissolution model: melt temperature must exceed ambient");
    }
}

double calibrate_loss_coefficient(const DissolutionModel& model, double target_dissolution_time) {
    const double rise = model.melt_temperature - model.ambient;
    const double t_reach = target_dissolution_time - model.hold_time;
    const double power = model.heating_power();
    if (!(t_reach > 0.0) || !(rise > 0.0) || !(power > 0.0)) {
        throw InvalidParameter("calibration: target must exceed the hold time");
    }
    // Temperature at t_reach is decreasing in k; k = 0 gives the adiabatic rise.
    auto reached = [&](double k) {
        if (k == 0.0) return power * t_reach / model.thermal_mass;
        return power / k * -std::expm1(-k * t_reach / model.thermal_mass);
    };
    if (reached(0.0) < rise) {
        throw InvalidParameter("calibration: melt temperature unreachable even without losses");
    }
    double lo = 0.0;
    double hi = power / rise;  // steady state equals the rise: never reached in finite time
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (reached(mid) >= rise) lo = mid;
        else hi = mid;
    }
    return lo;
}

DissolutionModel default_dissolution_model(CompositionPreset preset) {
    constexpr double diameter = 1.4e-3;
    constexpr double density = 3187.74;
    const double capsule_mass_g = density * kPi / 6.0 * diameter * diameter * diameter * 1e3;
    DissolutionModel m;
    m.particle_mass = iron_oxide_fraction(preset) * capsule_mass_g;
    m.loss_coefficient = calibrate_loss_coefficient(m, 40.0);
    return m;
}

ThermalState::ThermalState(DissolutionModel model)
    : model_(std::move(model)), temperature_(model_.ambient) {
    model_.validate();
}

void ThermalState::step(bool field_on) {
    const double power = field_on ? model_.heating_power() : 0.0;
    const double k = model_.loss_coefficient;
    if (k > 0.0) {
        const double steady = model_.ambient + power / k;
        temperature_ = steady + (temperature_ - steady) * std::exp(-k * kThermalStep / model_.thermal_mass);
    } else {
        temperature_ += power * kThermalStep / model_.thermal_mass;
    }
    ++steps_;
    time_ = static_cast<double>(steps_) * kThermalStep;
    if (temperature_ >= model_.melt_temperature) {
        ++steps_above_melt_;
        if (!dissolution_time_ && steps_above_melt_ * kThermalStep >= model_.hold_time - 1e-9) {
            dissolution_time_ = time_;
        }
    }
}

void ThermalState::advance(double dt, bool field_on) {
    carry_ += dt;
    while (carry_ >= kThermalStep - 1e-12) {
        carry_ -= kThermalStep;
        step(field_on);
    }
}

double ThermalState::dissolved_fraction() const {
    if (dissolution_time_) return 1.0;
    return std::min(1.0, steps_above_melt_ * kThermalStep / model_.hold_time);
}

DissolutionResult simulate_dissolution(const DissolutionModel& model, const FieldSchedule& field_on,
                                       double duration) {
    ThermalState state(model);
    DissolutionResult result;
    result.trace.push_back({0.0, state.temperature()});
    const long steps = std::lround(duration / kThermalStep);
    for (long i = 0; i < steps; ++i) {
        state.step(field_on(state.time()));
        result.trace.push_back({state.time(), state.temperature()});
    }
    result.dissolution_time = state.dissolution_time();
    return result;
}

}  // namespace capnav
