#pragma once

#include <map>
#include <string>
#include <vector>

#include "capnav/dynamics.hpp"
#include "capnav/flowfield.hpp"
#include "capnav/geometry.hpp"

namespace capnav {

struct FactorialDesign {
    std::vector<double> velocities;  // m s^-1
    std::vector<double> gradients;   // T m^-1
    int entrance_count = 20;
    Branch target = Branch::a;
    double field = 0.030;            // T, held constant along +x

    /// 5 velocities x 10 gradients x 20 entrances.
    static FactorialDesign reference();
    void validate() const;
};

/// Everything except the design that a sweep trajectory depends on.
struct SweepScenario {
    GeometryParams geometry;
    FluidProperties fluid;
    CapsuleSpec capsule;
    DynamicsConfig dynamics;
    Limits limits;
    double split_fraction = 0.5;
    double power_law_exponent = 7.0;
};

struct TrajectoryRecord {
    int entrance_index = 0;
    Outcome outcome = Outcome::stalled;
    double transit_time = 0.0;   // s
    int wall_contacts = 0;
    Vec3 final_position = Vec3::Zero();
    std::string diagnostic;      // non-empty for failed trajectories
};

struct SweepCell {
    double velocity = 0.0;
    double gradient = 0.0;
    int success_count = 0;
    int total = 0;
    bool flagged = false;        // at least one numerical failure
    std::vector<TrajectoryRecord> records;
};

double success_ratio(const SweepCell& cell);

struct SweepResult {
    std::vector<double> velocities;  // ascending
    std::vector<double> gradients;   // ascending
    Branch target = Branch::a;
    std::vector<SweepCell> cells;    // gradient-major
    std::map<std::string, std::string> metadata;

    const SweepCell& cell(std::size_t gradient_index, std::size_t velocity_index) const {
        return cells.at(gradient_index * velocities.size() + velocity_index);
    }
    /// Success ratios, rows = gradients, columns = velocities.
    std::vector<std::vector<double>> matrix() const;
};

/// One trajectory per (velocity, gradient, entrance). The gradient points
/// along +y (branch A) or -y (branch B), perpendicular to the main channel.
/// Output is independent of `workers`.
SweepResult run_factorial(const FactorialDesign& design, const SweepScenario& scenario,
                          int workers = 1);

inline constexpr const char* kMatrixFile = "success_matrix.csv";
inline constexpr const char* kLongFormFile = "trajectories.csv";

/// Writes the success matrix (3 decimals) and the long-form per-trajectory CSV.
void export_results(const SweepResult& result, const std::string& matrix_path,
                    const std::string& long_form_path);

/// Rebuilds a result from the long-form CSV (final positions are not stored).
SweepResult load_long_form(const std::string& path, Branch target = Branch::a);

struct SuccessMatrix {
    std::vector<double> velocities;
    std::vector<double> gradients;
    std::vector<std::vector<double>> ratios;
};

SuccessMatrix load_matrix(const std::string& path);

}  // namespace capnav
