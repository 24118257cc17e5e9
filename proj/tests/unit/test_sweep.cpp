#include <catch_amalgamated.hpp>

#include "capnav/stats.hpp"
#include "capnav/sweep.hpp"
#include "test_util.hpp"

using namespace capnav;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

FactorialDesign small_design() {
    FactorialDesign d;
    d.velocities = {0.85, 0.65};
    d.gradients = {0.45, 0.0};
    d.entrance_count = 5;
    return d;
}

}  // namespace

TEST_CASE("success ratio") {
    SweepCell c;
    c.total = 20;
    c.success_count = 18;
    CHECK(success_ratio(c) == 0.9);
    c.success_count = 20;
    CHECK(success_ratio(c) == 1.0);
    c.success_count = 0;
    CHECK(success_ratio(c) == 0.0);
    c.total = 0;
    CHECK_THROWS_AS(success_ratio(c), InvalidParameter);
}

TEST_CASE("reference design") {
    const auto d = FactorialDesign::reference();
    CHECK(d.velocities.size() == 5);
    CHECK(d.gradients.size() == 10);
    CHECK(d.velocities.size() * d.gradients.size() * d.entrance_count == 1000);
    CHECK(d.gradients.front() == 0.0);
    CHECK(d.gradients.back() == 0.45);
    CHECK_NOTHROW(d.validate());
    FactorialDesign bad = d;
    bad.velocities.clear();
    CHECK_THROWS_AS(bad.validate(), InvalidParameter);
    bad = d;
    bad.entrance_count = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidParameter);
    bad = d;
    bad.gradients.push_back(-0.1);
    CHECK_THROWS_AS(bad.validate(), InvalidParameter);
}

TEST_CASE("small factorial run") {
    const SweepScenario scenario;
    const SweepResult one = run_factorial(small_design(), scenario, 1);
    REQUIRE(one.velocities == std::vector<double>{0.65, 0.85});
    REQUIRE(one.gradients == std::vector<double>{0.0, 0.45});
    REQUIRE(one.cells.size() == 4);
    for (const auto& c : one.cells) {
        CHECK(c.total == 5);
        CHECK(c.records.size() == 5);
        CHECK(c.success_count <= c.total);
        CHECK_FALSE(c.flagged);
        for (int e = 0; e < 5; ++e) CHECK(c.records[e].entrance_index == e);
    }
    CHECK(one.cell(1, 0).gradient == 0.45);
    CHECK(one.cell(1, 0).velocity == 0.65);
    CHECK(success_ratio(one.cell(1, 0)) == 1.0);
    CHECK(success_ratio(one.cell(1, 0)) >= success_ratio(one.cell(0, 0)));
    CHECK(one.metadata.at("drag_law") == "schiller_naumann");
    CHECK(one.metadata.at("entrance_count") == "5");

    SECTION("independent of the worker count") {
        const SweepResult three = run_factorial(small_design(), scenario, 3);
        const auto dir = testutil::tmp_dir("sweep_workers");
        export_results(one, (dir / "m1.csv").string(), (dir / "l1.csv").string());
        export_results(three, (dir / "m3.csv").string(), (dir / "l3.csv").string());
        CHECK(testutil::slurp(dir / "m1.csv") == testutil::slurp(dir / "m3.csv"));
        CHECK(testutil::slurp(dir / "l1.csv") == testutil::slurp(dir / "l3.csv"));
        for (std::size_t i = 0; i < one.cells.size(); ++i) {
            for (std::size_t e = 0; e < 5; ++e) {
                CHECK(one.cells[i].records[e].final_position == three.cells[i].records[e].final_position);
            }
        }
    }
    SECTION("export round trip") {
        const auto dir = testutil::tmp_dir("sweep_export");
        const auto mpath = (dir / kMatrixFile).string();
        const auto lpath = (dir / kLongFormFile).string();
        export_results(one, mpath, lpath);
        const SweepResult back = load_long_form(lpath);
        CHECK(back.matrix() == one.matrix());
        CHECK(back.velocities == one.velocities);
        CHECK(back.gradients == one.gradients);
        for (std::size_t i = 0; i < one.cells.size(); ++i) {
            for (std::size_t e = 0; e < 5; ++e) {
                CHECK(back.cells[i].records[e].transit_time == one.cells[i].records[e].transit_time);
                CHECK(back.cells[i].records[e].outcome == one.cells[i].records[e].outcome);
            }
        }
        const SuccessMatrix m = load_matrix(mpath);
        CHECK(m.velocities == one.velocities);
        CHECK(m.gradients == one.gradients);
        for (std::size_t g = 0; g < 2; ++g) {
            for (std::size_t v = 0; v < 2; ++v) CHECK_THAT(m.ratios[g][v], WithinAbs(one.matrix()[g][v], 5e-4));
        }
        const SweepResult to_b = load_long_form(lpath, Branch::b);
        CHECK(to_b.cell(1, 0).success_count == 0);
    }
}

TEST_CASE("target branch B mirrors the command") {
    FactorialDesign d;
    d.velocities = {0.65};
    d.gradients = {0.45};
    d.entrance_count = 5;
    d.target = Branch::b;
    const SweepResult r = run_factorial(d, SweepScenario{}, 2);
    CHECK(success_ratio(r.cell(0, 0)) == 1.0);
    for (const auto& rec : r.cells[0].records) CHECK(rec.outcome == Outcome::exited_b);
}

TEST_CASE("no steering force leaves the split to symmetry") {
    SweepScenario scenario;
    scenario.dynamics.gravity_on = false;
    const Geometry geometry(scenario.geometry);
    const auto entrances = geometry.entrance_positions(20, scenario.capsule.radius());
    const FlowField flow =
        FlowField::analytic(geometry, 0.75, VelocityProfile::for_reynolds(reynolds({}, 0.75, 0.005)));
    const auto none = uniform_command(Vec3::UnitX(), 0.030, Vec3::Zero());
    const Environment env{geometry, flow, none, scenario.fluid, scenario.dynamics};
    TrajectoryOptions opts;
    opts.record_stride = 0;
    int checked = 0;
    for (const Vec3& p : entrances.positions) {
        if (std::abs(p.y()) < 1e-9) continue;
        const Vec3 mirror(p.x(), -p.y(), p.z());
        const Outcome a = simulate_trajectory(scenario.capsule, env, p, opts).outcome;
        const Outcome b = simulate_trajectory(scenario.capsule, env, mirror, opts).outcome;
        CHECK(a == (p.y() > 0 ? Outcome::exited_a : Outcome::exited_b));
        CHECK(b == (a == Outcome::exited_a ? Outcome::exited_b : Outcome::exited_a));
        ++checked;
    }
    CHECK(checked >= 10);
}

TEST_CASE("empty result exports header-only files") {
    const auto dir = testutil::tmp_dir("sweep_empty");
    export_results(SweepResult{}, (dir / "m.csv").string(), (dir / "l.csv").string());
    CHECK(testutil::slurp(dir / "m.csv") == "gradient\n");
    CHECK(testutil::slurp(dir / "l.csv") ==
          "velocity,gradient,entrance_index,outcome,transit_time_s,wall_contacts\n");
    const SuccessMatrix m = load_matrix((dir / "m.csv").string());
    CHECK(m.velocities.empty());
    CHECK(m.ratios.empty());
    CHECK(load_long_form((dir / "l.csv").string()).cells.empty());
}

TEST_CASE("loader errors") {
    const auto dir = testutil::tmp_dir("sweep_bad");
    const auto header = testutil::write_file(dir / "a.csv", "v,g\n");
    CHECK_THROWS_AS(load_long_form(header), ParseError);
    const auto outcome = testutil::write_file(
        dir / "b.csv", "velocity,gradient,entrance_index,outcome,transit_time_s,wall_contacts\n0.65,0,0,lost,0.1,3\n");
    try {
        load_long_form(outcome);
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    const auto partial = testutil::write_file(
        dir / "c.csv",
        "velocity,gradient,entrance_index,outcome,transit_time_s,wall_contacts\n"
        "0.65,0,0,exited_A,0.1,3\n0.85,0.1,0,exited_A,0.1,3\n");
    CHECK_THROWS_AS(load_long_form(partial), ParseError);
    const auto ragged = testutil::write_file(dir / "d.csv", "gradient,0.65,0.7\n0,0.5\n");
    CHECK_THROWS_AS(load_matrix(ragged), ParseError);
}

TEST_CASE("rank statistics") {
    CHECK(ranks({3.0, 1.0, 2.0}) == std::vector<double>{3.0, 1.0, 2.0});
    CHECK(ranks({1.0, 2.0, 2.0, 5.0}) == std::vector<double>{1.0, 2.5, 2.5, 4.0});
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == 1.0);
    CHECK(spearman({1, 2, 3, 4}, {1, 4, 9, 100}) == 1.0);
    CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == -1.0);
    CHECK(spearman({1, 2, 3, 4}, {0.5, 0.5, 0.5, 0.5}) == 0.0);
    // With ties: Pearson on average ranks.
    CHECK_THAT(spearman({1, 2, 3, 4, 5}, {0.5, 0.9, 0.9, 1.0, 1.0}), WithinRel(0.9486832980505138, 1e-12));
    CHECK_THROWS_AS(spearman({1}, {1}), InvalidParameter);
    CHECK_THROWS_AS(spearman({1, 2}, {1, 2, 3}), InvalidParameter);
}
