#include "capnav/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace capnav {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Rethrows value errors with the offending key in the message.
[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
    throw InvalidParameter("config key '" + key + "': " + what + " (got '" + value + "')");
}

double parse_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument("x");
        return v;
    } catch (const std::exception&) {
        bad_value(key, text, "expected a finite number");
    }
}

template <typename T, typename F>
T wrap(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const InvalidParameter& e) {
        throw InvalidParameter("config key '" + key + "': " + e.what());
    }
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& RunConfig::defaults() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"geometry.kind", "y_junction"},
        {"geometry.main_length", "0.096"},
        {"geometry.branch_length", "0.046"},
        {"geometry.diameter", "0.005"},
        {"geometry.branch_angle", "1.5707963267948966"},
        {"geometry.fillet_radius", "0.0005"},
        {"geometry.inlet_extrusion", "0"},
        {"fluid.density", "998.3"},
        {"fluid.viscosity", "0.001"},
        {"flow.mean_velocity", "0.65"},
        {"flow.profile", "auto"},
        {"flow.exponent", "7"},
        {"flow.split", "0.5"},
        {"flow.grid_file", ""},
        {"capsule.diameter", "0.0014"},
        {"capsule.density", "3187.74"},
        {"capsule.drag_law", "schiller_naumann"},
        {"capsule.magnetization_file", ""},
        {"magnetics.field", "0.03"},
        {"magnetics.direction", "1,0,0"},
        {"magnetics.gradient", "0,0.45,0"},
        {"magnetics.map_file", ""},
        {"limits.max_field", "0.03"},
        {"limits.max_gradient", "1"},
        {"limits.max_time", "5"},
        {"limits.max_steps", "5000000"},
        {"dynamics.gravity", "9.81"},
        {"dynamics.gravity_on", "true"},
        {"dynamics.dt_constant", "1e-05"},
        {"dynamics.dt_min", "1e-07"},
        {"dynamics.dt_max", "0.001"},
        {"dynamics.restitution", "1"},
        {"simulate.entrance_count", "20"},
        {"simulate.entrance_index", "0"},
        {"simulate.record_stride", "1"},
        {"design.velocities", "0.65,0.7,0.75,0.8,0.85"},
        {"design.gradients", "0,0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45"},
        {"design.entrance_count", "20"},
        {"design.target", "A"},
        {"design.field", "0.03"},
        {"rolling.slip_factor", ""},
        {"rolling.step_out", "12"},
        {"rolling.band_low", "5"},
        {"rolling.band_high", "7"},
        {"rolling.band_efficiency", "0.6"},
        {"rolling.capsule_diameter", "0.00169"},
        {"rolling.frequencies", "0,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15"},
        {"counterflow.tube_diameter", "0.0063"},
        {"counterflow.profile", "auto"},
        {"counterflow.gradients", "0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5"},
        {"slp.curve_file", ""},
        {"slp.heat_capacity", "4.184"},
        {"slp.concentration", "0.001"},
        {"slp.window", "10"},
        {"hyperthermia.slp", "190"},
        {"hyperthermia.preset", "methods"},
        {"hyperthermia.thermal_mass", "0.5"},
        {"hyperthermia.melt_temperature", "37.5"},
        {"hyperthermia.hold_time", "5"},
        {"hyperthermia.ambient", "25"},
        {"hyperthermia.target_time", "40"},
        {"hyperthermia.loss_coefficient", ""},
        {"session.id", "session-1"},
        {"session.name", "reference"},
        {"session.mode", "in_flow"},
        {"session.dilation", "100"},
        {"session.rate", "30"},
        {"session.host", "127.0.0.1"},
        {"session.port", "7878"},
        {"session.max_wall_seconds", "0"},
    };
    return table;
}

RunConfig::RunConfig() {
    for (const auto& [k, v] : defaults()) values_[k] = v;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open config file");
    RunConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError(path, lineno, "expected 'key = value'");
        try {
            c.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        } catch (const InvalidParameter& e) {
            throw ParseError(path, lineno, e.what());
        }
    }
    return c;
}

void RunConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw InvalidParameter("override '" + assignment + "' is not of the form key=value");
    }
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw InvalidParameter("unknown config key '" + key + "'");
    it->second = value;
}

const std::string& RunConfig::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw InvalidParameter("unknown config key '" + key + "'");
    return it->second;
}

double RunConfig::number(const std::string& key) const { return parse_double(key, raw(key)); }

long RunConfig::integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 9e15) bad_value(key, raw(key), "expected an integer");
    return static_cast<long>(v);
}

bool RunConfig::flag(const std::string& key) const {
    const std::string& v = raw(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad_value(key, v, "expected true or false");
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
    std::vector<double> out;
    std::istringstream is(raw(key));
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(parse_double(key, trim(item)));
    return out;
}

Vec3 RunConfig::vector(const std::string& key) const {
    const auto v = numbers(key);
    if (v.size() != 3) bad_value(key, raw(key), "expected x,y,z");
    return {v[0], v[1], v[2]};
}

void RunConfig::write(std::ostream& out) const {
    for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
}

void RunConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write(out);
}

GeometryParams geometry_params(const RunConfig& c) {
    GeometryParams g;
    g.kind = wrap<GeometryKind>("geometry.kind", [&] { return parse_geometry_kind(c.raw("geometry.kind")); });
    g.main_length = c.number("geometry.main_length");
    g.branch_length = c.number("geometry.branch_length");
    g.diameter = c.number("geometry.diameter");
    g.branch_angle = c.number("geometry.branch_angle");
    g.fillet_radius = c.number("geometry.fillet_radius");
    g.inlet_extrusion = c.number("geometry.inlet_extrusion");
    return g;
}

FluidProperties fluid_properties(const RunConfig& c) {
    FluidProperties f{c.number("fluid.density"), c.number("fluid.viscosity")};
    wrap<int>("fluid.*", [&] { f.validate(); return 0; });
    return f;
}

CapsuleSpec capsule_spec(const RunConfig& c) {
    CapsuleSpec s;
    s.diameter = c.number("capsule.diameter");
    s.density = c.number("capsule.density");
    s.drag_law = wrap<DragLaw>("capsule.drag_law", [&] { return parse_drag_law(c.raw("capsule.drag_law")); });
    const std::string& file = c.raw("capsule.magnetization_file");
    if (!file.empty()) s.magnetization = std::make_shared<const MagnetizationCurve>(MagnetizationCurve::load(file));
    wrap<int>("capsule.*", [&] { s.validate(); return 0; });
    return s;
}

DynamicsConfig dynamics_config(const RunConfig& c) {
    DynamicsConfig d;
    d.gravity = c.number("dynamics.gravity");
    d.gravity_on = c.flag("dynamics.gravity_on");
    d.dt_constant = c.number("dynamics.dt_constant");
    d.dt_min = c.number("dynamics.dt_min");
    d.dt_max = c.number("dynamics.dt_max");
    d.restitution = c.number("dynamics.restitution");
    wrap<int>("dynamics.*", [&] { d.validate(); return 0; });
    return d;
}

Limits limits(const RunConfig& c) {
    Limits l;
    l.max_time = c.number("limits.max_time");
    l.max_steps = c.integer("limits.max_steps");
    if (!(l.max_time > 0.0) || l.max_steps < 1) {
        throw InvalidParameter("config keys 'limits.max_time'/'limits.max_steps' must be positive");
    }
    return l;
}

CapabilityEnvelope capability_envelope(const RunConfig& c) {
    CapabilityEnvelope e{c.number("limits.max_field"), c.number("limits.max_gradient")};
    wrap<int>("limits.max_field", [&] { e.validate(); return 0; });
    return e;
}

FactorialDesign factorial_design(const RunConfig& c) {
    FactorialDesign d;
    d.velocities = c.numbers("design.velocities");
    d.gradients = c.numbers("design.gradients");
    d.entrance_count = static_cast<int>(c.integer("design.entrance_count"));
    const std::string& target = c.raw("design.target");
    if (target != "A" && target != "B") throw InvalidParameter("config key 'design.target': expected A or B");
    d.target = target == "A" ? Branch::a : Branch::b;
    d.field = c.number("design.field");
    wrap<int>("design.*", [&] { d.validate(); return 0; });
    return d;
}

SweepScenario sweep_scenario(const RunConfig& c) {
    SweepScenario s;
    s.geometry = geometry_params(c);
    s.fluid = fluid_properties(c);
    s.capsule = capsule_spec(c);
    s.dynamics = dynamics_config(c);
    s.limits = limits(c);
    s.split_fraction = c.number("flow.split");
    s.power_law_exponent = c.number("flow.exponent");
    return s;
}

RollingModel rolling_model(const RunConfig& c) {
    RollingModel m;
    if (!c.raw("rolling.slip_factor").empty()) m.slip_factor = c.number("rolling.slip_factor");
    m.step_out_frequency = c.number("rolling.step_out");
    m.band_low = c.number("rolling.band_low");
    m.band_high = c.number("rolling.band_high");
    m.band_efficiency = c.number("rolling.band_efficiency");
    wrap<int>("rolling.*", [&] { m.validate(); return 0; });
    return m;
}

CounterflowSetup counterflow_setup(const RunConfig& c) {
    CounterflowSetup s;
    s.tube_diameter = c.number("counterflow.tube_diameter");
    s.profile = wrap<CounterflowProfile>("counterflow.profile",
                                         [&] { return parse_counterflow_profile(c.raw("counterflow.profile")); });
    s.power_law_exponent = c.number("flow.exponent");
    return s;
}

DissolutionModel dissolution_model(const RunConfig& c) {
    const CapsuleSpec capsule = capsule_spec(c);
    const std::string& preset = c.raw("hyperthermia.preset");
    if (preset != "methods" && preset != "cytotoxicity") {
        throw InvalidParameter("config key 'hyperthermia.preset': expected methods or cytotoxicity");
    }
    DissolutionModel m;
    m.slp = c.number("hyperthermia.slp");
    m.particle_mass = iron_oxide_fraction(preset == "methods" ? CompositionPreset::methods
                                                               : CompositionPreset::cytotoxicity) *
                      capsule.mass() * 1e3;
    m.thermal_mass = c.number("hyperthermia.thermal_mass");
    m.melt_temperature = c.number("hyperthermia.melt_temperature");
    m.hold_time = c.number("hyperthermia.hold_time");
    m.ambient = c.number("hyperthermia.ambient");
    if (c.raw("hyperthermia.loss_coefficient").empty()) {
        m.loss_coefficient = wrap<double>("hyperthermia.target_time", [&] {
            return calibrate_loss_coefficient(m, c.number("hyperthermia.target_time"));
        });
    } else {
        m.loss_coefficient = c.number("hyperthermia.loss_coefficient");
    }
    wrap<int>("hyperthermia.*", [&] { m.validate(); return 0; });
    return m;
}

SessionScenario session_scenario(const RunConfig& c) {
    SessionScenario s;
    s.name = c.raw("session.name");
    s.mode = wrap<SessionMode>("session.mode", [&] { return parse_session_mode(c.raw("session.mode")); });
    s.geometry = geometry_params(c);
    s.fluid = fluid_properties(c);
    s.capsule = capsule_spec(c);
    s.dynamics = dynamics_config(c);
    s.mean_velocity = c.number("flow.mean_velocity");
    s.split_fraction = c.number("flow.split");
    s.power_law_exponent = c.number("flow.exponent");
    s.entrance_count = static_cast<int>(c.integer("simulate.entrance_count"));
    s.entrance_index = static_cast<int>(c.integer("simulate.entrance_index"));
    s.envelope = capability_envelope(c);
    s.dissolution = dissolution_model(c);
    s.rolling = rolling_model(c);
    wrap<int>("session.*", [&] { s.validate(); return 0; });
    return s;
}

FlowField flow_field(const RunConfig& c, const Geometry& geometry) {
    const std::string& grid = c.raw("flow.grid_file");
    if (!grid.empty()) return FlowField::from_grid(geometry, load_grid_field(grid));
    const double v = c.number("flow.mean_velocity");
    const std::string& kind = c.raw("flow.profile");
    VelocityProfile profile;
    profile.exponent = c.number("flow.exponent");
    if (kind == "auto") {
        profile = VelocityProfile::for_reynolds(reynolds(fluid_properties(c), v, geometry.diameter()),
                                                profile.exponent);
    } else if (kind == "parabolic") {
        profile.kind = ProfileKind::parabolic;
    } else if (kind == "power_law") {
        profile.kind = ProfileKind::power_law;
    } else {
        throw InvalidParameter("config key 'flow.profile': expected auto, parabolic or power_law");
    }
    return wrap<FlowField>("flow.*", [&] { return FlowField::analytic(geometry, v, profile, c.number("flow.split")); });
}

std::unique_ptr<MagneticSampler> magnetic_sampler(const RunConfig& c) {
    const std::string& map = c.raw("magnetics.map_file");
    if (!map.empty()) return std::make_unique<WorkspaceMap>(WorkspaceMap::load(map));
    const auto envelope = capability_envelope(c);
    const FieldCommand clamped = clamp_command(
        envelope, FieldCommand{c.number("magnetics.field"), c.vector("magnetics.direction"),
                               c.vector("magnetics.gradient")});
    return std::make_unique<UniformMagnetics>(wrap<UniformMagnetics>("magnetics.direction", [&] {
        return uniform_command(clamped.direction, clamped.field, clamped.gradient);
    }));
}

}  // namespace capnav
