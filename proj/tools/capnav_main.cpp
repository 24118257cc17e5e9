// capnav: command-line front end for the capsule navigation simulator.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "capnav/config.hpp"
#include "capnav/locomotion.hpp"
#include "capnav/protocol.hpp"
#include "capnav/server.hpp"
#include "capnav/stats.hpp"
#include "capnav/sweep.hpp"

namespace fs = std::filesystem;
using namespace capnav;

namespace {

std::atomic<bool> g_stop{false};

struct Common {
    std::string config;
    std::string out = ".";
    std::vector<std::string> sets;
    bool seedless = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "flat key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
    sub->add_option("--set", c.sets, "override, key=value (repeatable)");
    sub->add_flag("--seedless", c.seedless, "assert a fully deterministic run (no RNG is used anywhere)");
}

RunConfig load_config(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : RunConfig::load(c.config);
    for (const auto& s : c.sets) cfg.apply_override(s);
    return cfg;
}

fs::path prepare_out(const Common& c, const RunConfig& cfg) {
    const fs::path dir(c.out);
    fs::create_directories(dir);
    cfg.save((dir / "effective_config.txt").string());
    return dir;
}

std::string num(double v) { return format_number(v); }

int run_simulate(const Common& c) {
    const RunConfig cfg = load_config(c);
    const fs::path dir = prepare_out(c, cfg);
    const Geometry geometry(geometry_params(cfg));
    const FlowField flow = flow_field(cfg, geometry);
    const auto magnetics = magnetic_sampler(cfg);
    const CapsuleSpec capsule = capsule_spec(cfg);
    const Environment env{geometry, flow, *magnetics, fluid_properties(cfg), dynamics_config(cfg)};
    const auto entrances = geometry.entrance_positions(
        static_cast<int>(cfg.integer("simulate.entrance_count")), capsule.radius());
    const long index = cfg.integer("simulate.entrance_index");
    if (index < 0 || index >= entrances.count()) {
        throw InvalidParameter("config key 'simulate.entrance_index': outside the entrance set");
    }
    TrajectoryOptions opt;
    opt.limits = limits(cfg);
    opt.record_stride = cfg.integer("simulate.record_stride");
    const Trajectory t = simulate_trajectory(capsule, env, entrances.positions[index], opt);
    const fs::path csv = dir / "trajectory.csv";
    write_trajectory_csv(t, csv.string());
    std::printf("outcome=%s t=%s steps=%ld wall_contacts=%d\n", std::string(to_string(t.outcome)).c_str(),
                num(t.final_state().time).c_str(), t.steps, t.wall_contact_count);
    std::printf("wrote %s\n", csv.string().c_str());
    return 0;
}

int run_sweep(const Common& c, int workers) {
    const RunConfig cfg = load_config(c);
    const fs::path dir = prepare_out(c, cfg);
    const SweepResult r = run_factorial(factorial_design(cfg), sweep_scenario(cfg), workers);
    export_results(r, (dir / kMatrixFile).string(), (dir / kLongFormFile).string());
    std::ofstream meta(dir / "sweep_metadata.txt");
    for (const auto& [k, v] : r.metadata) meta << k << " = " << v << '\n';
    int flagged = 0;
    for (const auto& cell : r.cells) flagged += cell.flagged ? 1 : 0;
    std::printf("%zu x %zu cells, %zu trajectories, %d flagged\n", r.gradients.size(), r.velocities.size(),
                r.cells.size() * static_cast<std::size_t>(r.cells.empty() ? 0 : r.cells[0].total), flagged);
    std::printf("wrote %s and %s\n", (dir / kMatrixFile).string().c_str(), (dir / kLongFormFile).string().c_str());
    return 0;
}

int run_rolling(const Common& c) {
    const RunConfig cfg = load_config(c);
    const fs::path dir = prepare_out(c, cfg);
    const RollingModel model = rolling_model(cfg);
    const double d = cfg.number("rolling.capsule_diameter");
    std::ofstream out(dir / "rolling.csv");
    out << "frequency_hz,velocity_m_per_s\n";
    for (double f : cfg.numbers("rolling.frequencies")) {
        out << num(f) << ',' << num(rolling_velocity(model, d, f)) << '\n';
    }
    std::printf("wrote %s\n", (dir / "rolling.csv").string().c_str());
    return 0;
}

int run_counterflow(const Common& c) {
    const RunConfig cfg = load_config(c);
    const fs::path dir = prepare_out(c, cfg);
    const CapsuleSpec capsule = capsule_spec(cfg);
    const FluidProperties fluid = fluid_properties(cfg);
    const CounterflowSetup setup = counterflow_setup(cfg);
    const double field = cfg.number("magnetics.field");
    std::vector<double> gs = cfg.numbers("counterflow.gradients");
    std::vector<double> vs;
    std::ofstream out(dir / "counterflow.csv");
    out << "gradient_T_per_m,max_mean_velocity_m_per_s\n";
    for (double g : gs) {
        vs.push_back(max_counterflow(capsule, fluid, setup, g, field));
        out << num(g) << ',' << num(vs.back()) << '\n';
    }
    if (gs.size() >= 2) {
        const LinearFit fit = linear_fit(gs, vs);
        std::printf("linear fit: slope=%.6g (m/s)/(T/m) intercept=%.6g m/s r2=%.6f\n", fit.slope,
                    fit.intercept, fit.r_squared);
    }
    std::printf("wrote %s\n", (dir / "counterflow.csv").string().c_str());
    return 0;
}

int run_slp(const Common& c, const std::string& curve_arg) {
    const RunConfig cfg = load_config(c);
    const std::string path = curve_arg.empty() ? cfg.raw("slp.curve_file") : curve_arg;
    if (path.empty()) throw InvalidParameter("slp: no heating curve (use --curve or slp.curve_file)");
    const double slp = slp_from_curve(HeatingCurve::load_csv(path), cfg.number("slp.heat_capacity"),
                                      cfg.number("slp.concentration"), cfg.number("slp.window"));
    std::printf("slp_W_per_g=%.6g\n", slp);
    return 0;
}

int run_serve(const Common& c, const std::string& script) {
    const RunConfig cfg = load_config(c);
    auto session = create_session(cfg.raw("session.id"), session_scenario(cfg), cfg.number("session.dilation"));
    if (!script.empty()) {
        std::ifstream in(script);
        if (!in) throw ParseError(script, 0, "cannot open script");
        const Snapshot last = run_script(*session, in, std::cout, script);
        return last.status == SessionStatus::error ? 3 : 0;
    }
    ServerOptions opt;
    opt.host = cfg.raw("session.host");
    opt.port = static_cast<int>(cfg.integer("session.port"));
    opt.rate = cfg.number("session.rate");
    opt.max_wall_seconds = cfg.number("session.max_wall_seconds");
    opt.stop = &g_stop;
    opt.on_listening = [](int port) {
        std::fprintf(stderr, "listening on port %d\n", port);
    };
    std::signal(SIGINT, [](int) { g_stop = true; });
    std::signal(SIGTERM, [](int) { g_stop = true; });
    const Snapshot last = serve_session(*session, opt);
    std::cout << encode(state_message(last)) << '\n';
    return last.status == SessionStatus::error ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"capnav - magnetically steered capsule simulator"};
    app.require_subcommand(0, 1);
    Common common;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::string curve;
    std::string script;

    auto* simulate = app.add_subcommand("simulate", "one trajectory -> trajectory.csv");
    add_common(simulate, common);
    auto* sweep = app.add_subcommand("sweep", "factorial design -> success_matrix.csv + trajectories.csv");
    add_common(sweep, common);
    sweep->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    auto* rolling = app.add_subcommand("rolling", "rolling velocity vs frequency -> rolling.csv");
    add_common(rolling, common);
    auto* counterflow = app.add_subcommand("counterflow", "max counterflow vs gradient -> counterflow.csv");
    add_common(counterflow, common);
    auto* slp = app.add_subcommand("slp", "specific loss power from a heating curve");
    add_common(slp, common);
    slp->add_option("--curve", curve, "heating CSV (t_seconds,temp_celsius)");
    auto* serve = app.add_subcommand("serve", "run a live session (TCP) or replay a script");
    add_common(serve, common);
    serve->add_option("--script", script, "replay a session script without networking")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 2;
    }
    try {
        if (*simulate) return run_simulate(common);
        if (*sweep) return run_sweep(common, workers);
        if (*rolling) return run_rolling(common);
        if (*counterflow) return run_counterflow(common);
        if (*slp) return run_slp(common, curve);
        if (*serve) return run_serve(common, script);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
