#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "capnav/dynamics.hpp"
#include "capnav/hyperthermia.hpp"
#include "capnav/locomotion.hpp"
#include "capnav/session.hpp"
#include "capnav/sweep.hpp"

namespace capnav {

/*!
 * Flat `key = value` run configuration. Every key has a default encoding
 * the reference scenario; unknown keys are rejected. Lines starting with `#`
 * are comments.
 */
class RunConfig {
  public:
    RunConfig();

    static RunConfig load(const std::string& path);
    /// Applies `key=value` (the --set syntax).
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    const std::string& raw(const std::string& key) const;
    double number(const std::string& key) const;
    long integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    Vec3 vector(const std::string& key) const;

    /// Effective configuration, one `key = value` per line, sorted by key.
    void write(std::ostream& out) const;
    void save(const std::string& path) const;

    static const std::vector<std::pair<std::string, std::string>>& defaults();

  private:
    std::map<std::string, std::string> values_;
};

GeometryParams geometry_params(const RunConfig& c);
FluidProperties fluid_properties(const RunConfig& c);
CapsuleSpec capsule_spec(const RunConfig& c);
DynamicsConfig dynamics_config(const RunConfig& c);
Limits limits(const RunConfig& c);
CapabilityEnvelope capability_envelope(const RunConfig& c);
FactorialDesign factorial_design(const RunConfig& c);
SweepScenario sweep_scenario(const RunConfig& c);
RollingModel rolling_model(const RunConfig& c);
CounterflowSetup counterflow_setup(const RunConfig& c);
DissolutionModel dissolution_model(const RunConfig& c);
SessionScenario session_scenario(const RunConfig& c);

/// Flow for a single trajectory: the VFIELD grid if `flow.grid_file` is set,
/// else the analytic developed profile.
FlowField flow_field(const RunConfig& c, const Geometry& geometry);
/// BFIELD map if `magnetics.map_file` is set, else a uniform command.
std::unique_ptr<MagneticSampler> magnetic_sampler(const RunConfig& c);

}  // namespace capnav
