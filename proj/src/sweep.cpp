#include "capnav/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

namespace capnav {

namespace {

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& text, const std::string& path, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError(path, line, "malformed number '" + text + "'");
    }
}

}  // namespace

FactorialDesign FactorialDesign::reference() {
    FactorialDesign d;
    d.velocities = {0.65, 0.70, 0.75, 0.80, 0.85};
    d.gradients = {0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45};
    return d;
}

void FactorialDesign::validate() const {
    if (velocities.empty() || gradients.empty()) {
        throw InvalidParameter("design: velocities and gradients must be non-empty");
    }
    if (entrance_count < 1) throw InvalidParameter("design: entrance_count must be >= 1");
    for (double v : velocities) {
        if (!(v > 0.0)) throw InvalidParameter("design: velocities must be > 0");
    }
    for (double g : gradients) {
        if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidParameter("design: gradients must be >= 0");
    }
    if (!(field >= 0.0)) throw InvalidParameter("design: field must be >= 0");
}

double success_ratio(const SweepCell& cell) {
    if (cell.total <= 0) throw InvalidParameter("success ratio: empty cell");
    return static_cast<double>(cell.success_count) / cell.total;
}

std::vector<std::vector<double>> SweepResult::matrix() const {
    std::vector<std::vector<double>> m(gradients.size(), std::vector<double>(velocities.size()));
    for (std::size_t g = 0; g < gradients.size(); ++g) {
        for (std::size_t v = 0; v < velocities.size(); ++v) m[g][v] = success_ratio(cell(g, v));
    }
    return m;
}

SweepResult run_factorial(const FactorialDesign& design, const SweepScenario& scenario, int workers) {
    design.validate();
    scenario.fluid.validate();
    scenario.capsule.validate();
    scenario.dynamics.validate();

    SweepResult result;
    result.velocities = sorted_unique(design.velocities);
    result.gradients = sorted_unique(design.gradients);
    result.target = design.target;
    result.metadata = {
        {"code_version", "capnav 1.0.0"},
        {"drag_law", std::string(to_string(scenario.capsule.drag_law))},
        {"capsule_diameter", fmt("%.17g", scenario.capsule.diameter)},
        {"capsule_density", fmt("%.17g", scenario.capsule.density)},
        {"geometry_kind", std::string(to_string(scenario.geometry.kind))},
        {"geometry_diameter", fmt("%.17g", scenario.geometry.diameter)},
        {"entrance_count", std::to_string(design.entrance_count)},
        {"target", design.target == Branch::a ? "A" : "B"},
        {"field", fmt("%.17g", design.field)},
    };

    const Geometry geometry(scenario.geometry);
    const EntranceSet entrances =
        geometry.entrance_positions(design.entrance_count, scenario.capsule.radius());

    std::vector<FlowField> flows;
    for (double v : result.velocities) {
        const auto profile = VelocityProfile::for_reynolds(
            reynolds(scenario.fluid, v, geometry.diameter()), scenario.power_law_exponent);
        flows.push_back(FlowField::analytic(geometry, v, profile, scenario.split_fraction));
    }
    const double sign = design.target == Branch::a ? 1.0 : -1.0;
    std::vector<UniformMagnetics> fields;
    for (double g : result.gradients) {
        fields.push_back(uniform_command(Vec3::UnitX(), design.field, Vec3(0.0, sign * g, 0.0)));
    }

    const std::size_t nv = result.velocities.size();
    const std::size_t ne = static_cast<std::size_t>(design.entrance_count);
    const std::size_t jobs = result.gradients.size() * nv * ne;
    std::vector<TrajectoryRecord> records(jobs);

    TrajectoryOptions options;
    options.limits = scenario.limits;
    options.record_stride = 0;

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job = next++; job < jobs; job = next++) {
            const std::size_t e = job % ne;
            const std::size_t v = (job / ne) % nv;
            const std::size_t g = job / (ne * nv);
            const Environment env{geometry, flows[v], fields[g], scenario.fluid, scenario.dynamics};
            TrajectoryRecord& rec = records[job];
            rec.entrance_index = static_cast<int>(e);
            try {
                const Trajectory t =
                    simulate_trajectory(scenario.capsule, env, entrances.positions[e], options);
                rec.outcome = t.outcome;
                rec.transit_time = t.final_state().time;
                rec.wall_contacts = t.wall_contact_count;
                rec.final_position = t.final_state().position;
            } catch (const NumericalFailure& err) {
                rec.outcome = Outcome::failed;
                rec.transit_time = err.last_valid_state().time;
                rec.final_position = err.last_valid_state().position;
                rec.diagnostic = err.what();
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(jobs)));
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    const Outcome wanted = design.target == Branch::a ? Outcome::exited_a : Outcome::exited_b;
    result.cells.resize(result.gradients.size() * nv);
    for (std::size_t g = 0; g < result.gradients.size(); ++g) {
        for (std::size_t v = 0; v < nv; ++v) {
            SweepCell& cell = result.cells[g * nv + v];
            cell.velocity = result.velocities[v];
            cell.gradient = result.gradients[g];
            cell.total = static_cast<int>(ne);
            const auto first = records.begin() + static_cast<std::ptrdiff_t>((g * nv + v) * ne);
            cell.records.assign(first, first + static_cast<std::ptrdiff_t>(ne));
            for (const auto& r : cell.records) {
                if (r.outcome == wanted) ++cell.success_count;
                if (r.outcome == Outcome::failed) cell.flagged = true;
            }
        }
    }
    return result;
}

void export_results(const SweepResult& result, const std::string& matrix_path,
                    const std::string& long_form_path) {
    std::ofstream m(matrix_path);
    if (!m) throw std::runtime_error("cannot write " + matrix_path);
    m << "gradient";
    for (double v : result.velocities) m << ',' << fmt("%.17g", v);
    m << '\n';
    for (std::size_t g = 0; g < result.gradients.size(); ++g) {
        m << fmt("%.17g", result.gradients[g]);
        for (std::size_t v = 0; v < result.velocities.size(); ++v) {
            m << ',' << fmt("%.3f", success_ratio(result.cell(g, v)));
        }
        m << '\n';
    }
    if (!m) throw std::runtime_error("write failed: " + matrix_path);

    std::ofstream l(long_form_path);
    if (!l) throw std::runtime_error("cannot write " + long_form_path);
    l << "velocity,gradient,entrance_index,outcome,transit_time_s,wall_contacts\n";
    for (const auto& cell : result.cells) {
        for (const auto& r : cell.records) {
            l << fmt("%.17g", cell.velocity) << ',' << fmt("%.17g", cell.gradient) << ','
              << r.entrance_index << ',' << to_string(r.outcome) << ','
              << fmt("%.17g", r.transit_time) << ',' << r.wall_contacts << '\n';
        }
    }
    if (!l) throw std::runtime_error("write failed: " + long_form_path);
}

SweepResult load_long_form(const std::string& path, Branch target) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::string line;
    int lineno = 1;
    if (!std::getline(in, line) ||
        line != "velocity,gradient,entrance_index,outcome,transit_time_s,wall_contacts") {
        throw ParseError(path, 1, "unexpected long-form header");
    }
    struct Row {
        double velocity, gradient;
        TrajectoryRecord rec;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 6) throw ParseError(path, lineno, "expected 6 fields");
        Row r{parse_number(f[0], path, lineno), parse_number(f[1], path, lineno), {}};
        r.rec.entrance_index = static_cast<int>(parse_number(f[2], path, lineno));
        try {
            r.rec.outcome = parse_outcome(f[3]);
        } catch (const InvalidParameter& e) {
            throw ParseError(path, lineno, e.what());
        }
        r.rec.transit_time = parse_number(f[4], path, lineno);
        r.rec.wall_contacts = static_cast<int>(parse_number(f[5], path, lineno));
        rows.push_back(std::move(r));
    }

    SweepResult result;
    result.target = target;
    for (const auto& r : rows) {
        result.velocities.push_back(r.velocity);
        result.gradients.push_back(r.gradient);
    }
    result.velocities = sorted_unique(result.velocities);
    result.gradients = sorted_unique(result.gradients);
    const std::size_t nv = result.velocities.size();
    result.cells.resize(result.gradients.size() * nv);
    const Outcome wanted = target == Branch::a ? Outcome::exited_a : Outcome::exited_b;
    for (const auto& r : rows) {
        const auto vi = static_cast<std::size_t>(
            std::lower_bound(result.velocities.begin(), result.velocities.end(), r.velocity) -
            result.velocities.begin());
        const auto gi = static_cast<std::size_t>(
            std::lower_bound(result.gradients.begin(), result.gradients.end(), r.gradient) -
            result.gradients.begin());
        SweepCell& cell = result.cells[gi * nv + vi];
        cell.velocity = r.velocity;
        cell.gradient = r.gradient;
        cell.records.push_back(r.rec);
        ++cell.total;
        if (r.rec.outcome == wanted) ++cell.success_count;
        if (r.rec.outcome == Outcome::failed) cell.flagged = true;
    }
    for (const auto& cell : result.cells) {
        if (cell.total == 0) throw ParseError(path, lineno, "design is not a full factorial");
    }
    return result;
}

SuccessMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
    auto header = split_csv(line);
    if (header.empty() || header[0] != "gradient") throw ParseError(path, 1, "expected 'gradient' header");
    SuccessMatrix m;
    for (std::size_t i = 1; i < header.size(); ++i) m.velocities.push_back(parse_number(header[i], path, 1));
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != header.size()) throw ParseError(path, lineno, "row width differs from header");
        m.gradients.push_back(parse_number(f[0], path, lineno));
        std::vector<double> row;
        for (std::size_t i = 1; i < f.size(); ++i) row.push_back(parse_number(f[i], path, lineno));
        m.ratios.push_back(std::move(row));
    }
    return m;
}

}  // namespace capnav
