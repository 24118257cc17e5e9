#include <catch_amalgamated.hpp>

#include "capnav/flowfield.hpp"
#include "test_util.hpp"

using namespace capnav;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const FluidProperties kWater{998.3, 0.001};

Geometry junction() { return Geometry(GeometryParams{}); }

VelocityProfile parabolic() { return {ProfileKind::parabolic, 7.0}; }
VelocityProfile seventh() { return {ProfileKind::power_law, 7.0}; }

// Midpoint rule over an n x n Cartesian grid covering the cross-section disk
// of radius R centred at `c`, normal `axis`.
double flux(const FlowField& f, const Vec3& c, const Vec3& axis, double R, int n = 64) {
    const Vec3 e1 = Vec3::UnitZ();
    const Vec3 e2 = axis.cross(e1).normalized();
    const double h = 2.0 * R / n;
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double u = -R + (i + 0.5) * h;
            const double v = -R + (j + 0.5) * h;
            if (u * u + v * v >= R * R) continue;
            q += f.velocity_at(c + u * e1 + v * e2).dot(axis) * h * h;
        }
    }
    return q;
}

// Polar midpoint rule, fine in radius, for the area-averaged velocity.
double area_mean(const FlowField& f, const Vec3& c, const Vec3& axis, double R) {
    const Vec3 e1 = Vec3::UnitZ();
    const Vec3 e2 = axis.cross(e1).normalized();
    const int nr = 4000, nt = 16;
    double q = 0.0;
    for (int i = 0; i < nr; ++i) {
        const double r = (i + 0.5) * R / nr;
        for (int j = 0; j < nt; ++j) {
            const double t = 2 * kPi * (j + 0.5) / nt;
            q += f.velocity_at(c + r * (std::cos(t) * e1 + std::sin(t) * e2)).dot(axis) * r;
        }
    }
    return q * (R / nr) * (2 * kPi / nt) / (kPi * R * R);
}

}  // namespace

TEST_CASE("reynolds number") {
    CHECK_THAT(reynolds(kWater, 0.85, 0.005), WithinRel(4242.775, 1e-12));
    CHECK_THAT(reynolds(kWater, 0.65, 0.005), WithinRel(3244.475, 1e-12));
    CHECK(reynolds(kWater, 0.0, 0.005) == 0.0);
    CHECK_THROWS_AS(reynolds(kWater, 0.5, 0.0), InvalidParameter);
}

TEST_CASE("friction factor from pressure drop") {
    const double f = friction_factor_from_pressure(279.03, 0.005, 0.096, kWater, 0.85);
    CHECK_THAT(f, WithinAbs(0.0403, 1e-4));
    CHECK_THAT(f, WithinRel(0.04029774492069043, 1e-12));
    CHECK(friction_factor_from_pressure(0.0, 0.005, 0.096, kWater, 0.85) == 0.0);
    CHECK_THAT(friction_factor_from_pressure(2 * 279.03, 0.005, 0.096, kWater, 0.85), WithinRel(2 * f, 1e-14));
    CHECK_THROWS_AS(friction_factor_from_pressure(279.03, 0.005, 0.0, kWater, 0.85), InvalidParameter);
    CHECK_THROWS_AS(friction_factor_from_pressure(279.03, 0.005, 0.096, kWater, 0.0), InvalidParameter);
}

TEST_CASE("Blasius smooth-pipe correlation") {
    CHECK_THAT(friction_factor_blasius(4250), WithinRel(0.03913720887501893, 1e-12));
    CHECK_THAT(friction_factor_blasius(3244), WithinRel(0.04187134110698587, 1e-12));
    CHECK_THAT(friction_factor_blasius(4250), WithinAbs(0.0392, 1e-4));
    CHECK_THAT(friction_factor_blasius(3244), WithinAbs(0.0419, 1e-4));
    CHECK_THROWS_AS(friction_factor_blasius(2999), OutOfRange);
    CHECK_THROWS_AS(friction_factor_blasius(1.1e5), OutOfRange);
    double prev = friction_factor_blasius(3000);
    for (double re = 3500; re <= 1e5; re += 500) {
        const double f = friction_factor_blasius(re);
        CHECK(f < prev);
        prev = f;
    }
    // Pressure-drop value and the correlation agree within 5 %.
    const double fp = friction_factor_from_pressure(279.03, 0.005, 0.096, kWater, 0.85);
    CHECK(testutil::rel_err(friction_factor_blasius(reynolds(kWater, 0.85, 0.005)), fp) < 0.05);
}

TEST_CASE("developed profiles") {
    const Geometry g = junction();
    SECTION("parabolic") {
        const FlowField f = FlowField::analytic(g, 0.3, parabolic(), 0.5);
        CHECK_THAT(f.velocity_at({0.05, 0, 0}).x(), WithinRel(0.6, 1e-14));
        CHECK(f.velocity_at({0.05, 0.0025, 0}).norm() == 0.0);
        CHECK_THAT(f.velocity_at({0.05, 0.00125, 0}).x(), WithinRel(2 * 0.3 * 0.75, 1e-14));
    }
    SECTION("1/7 power law") {
        const FlowField f = FlowField::analytic(g, 0.65, seventh(), 0.5);
        CHECK_THAT(f.velocity_at({0.05, 0, 0}).x() / 0.65, WithinRel(1.2244897959183674, 1e-14));
        CHECK_THAT(f.velocity_at({0.05, 0, 0}).x() / 0.65, WithinAbs(1.2245, 1e-4));
        CHECK(f.velocity_at({0.05, 0, -0.0025}).norm() == 0.0);
    }
    SECTION("peak ratio matches numerical integration of the 1/7 law") {
        // mean/peak = 2 int_0^1 (1-s)^(1/7) s ds, midpoint rule in t = 1 - s.
        const int n = 2'000'000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = (i + 0.5) / n;
            acc += std::pow(t, 1.0 / 7.0) * (1.0 - t);
        }
        CHECK_THAT(seventh().peak_ratio(), WithinRel(1.0 / (2.0 * acc / n), 1e-6));
    }
    SECTION("selection by Reynolds number") {
        CHECK(VelocityProfile::for_reynolds(2299).kind == ProfileKind::parabolic);
        CHECK(VelocityProfile::for_reynolds(2300).kind == ProfileKind::power_law);
        CHECK(VelocityProfile::for_reynolds(3244.475).kind == ProfileKind::power_law);
    }
}

TEST_CASE("branch flow follows the branch axis with the split share") {
    const Geometry g = junction();
    const FlowField f = FlowField::analytic(g, 0.8, parabolic(), 0.3);
    CHECK_THAT(f.branch_mean_velocity(Branch::a), WithinRel(0.24, 1e-14));
    CHECK_THAT(f.branch_mean_velocity(Branch::b), WithinRel(0.56, 1e-14));
    const Vec3 pa = g.junction_point() + 0.03 * g.branch_direction(Branch::a);
    const Vec3 ua = f.velocity_at(pa);
    CHECK_THAT(ua.norm(), WithinRel(2 * 0.24, 1e-12));
    CHECK_THAT(ua.normalized().dot(g.branch_direction(Branch::a)), WithinRel(1.0, 1e-12));
}

TEST_CASE("velocity outside the lumen is an error") {
    const FlowField f = FlowField::analytic(junction(), 0.5, parabolic(), 0.5);
    CHECK_THROWS_AS(f.velocity_at({0.05, 0.003, 0}), OutOfDomain);
    CHECK_THROWS_AS(velocity_at(f, {0.05, 0, -0.0026}), OutOfDomain);
    CHECK_THROWS_AS(FlowField::analytic(junction(), -1.0, parabolic(), 0.5), InvalidParameter);
    CHECK_THROWS_AS(FlowField::analytic(junction(), 1.0, parabolic(), 1.5), InvalidParameter);
}

TEST_CASE("flux conservation across the junction") {
    const Geometry g = junction();
    const double R = g.radius();
    for (const auto& profile : {parabolic(), seventh()}) {
        for (double split : {0.5, 0.3}) {
            const FlowField f = FlowField::analytic(g, 0.7, profile, split);
            const double q_in = flux(f, {0.01, 0, 0}, Vec3::UnitX(), R);
            const Vec3 da = g.branch_direction(Branch::a), db = g.branch_direction(Branch::b);
            const double q_a = flux(f, g.junction_point() + 0.03 * da, da, R);
            const double q_b = flux(f, g.junction_point() + 0.03 * db, db, R);
            INFO("profile " << static_cast<int>(profile.kind) << " split " << split);
            CHECK(std::abs(q_in - q_a - q_b) / q_in < 1e-3);
            CHECK_THAT(q_a / q_in, WithinRel(split, 1e-9));
            // The Cartesian rule itself is within a percent of pi R^2 u.
            CHECK(testutil::rel_err(q_in, kPi * R * R * 0.7) < 1e-2);
        }
    }
}

TEST_CASE("area average recovers the mean velocity") {
    const Geometry g = junction();
    for (const auto& profile : {parabolic(), seventh()}) {
        const FlowField f = FlowField::analytic(g, 0.75, profile, 0.5);
        CHECK(testutil::rel_err(area_mean(f, {0.02, 0, 0}, Vec3::UnitX(), g.radius()), 0.75) < 1e-3);
        CHECK(testutil::rel_err(area_mean(f, {0.07, 0, 0}, Vec3::UnitX(), g.radius()), 0.75) < 1e-3);
    }
}

TEST_CASE("VFIELD grid import") {
    const auto dir = testutil::tmp_dir("vfield");
    SECTION("uniform 2x2x2 field") {
        std::string text = "# uniform\nVFIELD v1\ndims 2 2 2\norigin 0 0 0\nspacing 1 1 1\n";
        for (int i = 0; i < 8; ++i) text += "0.5 0 0\n";
        const auto grid = load_grid_field(testutil::write_file(dir / "u.vf", text));
        CHECK(sample_grid_field(grid, {0.3, 0.7, 0.1}) == Vec3(0.5, 0, 0));
        CHECK(sample_grid_field(grid, {1, 1, 1}) == Vec3(0.5, 0, 0));
        CHECK_THROWS_AS(sample_grid_field(grid, {1.5, 0, 0}), OutOfDomain);
    }
    SECTION("missing row is reported with its count") {
        std::string text = "VFIELD v1\ndims 2 2 2\norigin 0 0 0\nspacing 1 1 1\n";
        for (int i = 0; i < 7; ++i) text += "0.5 0 0\n";
        try {
            load_grid_field(testutil::write_file(dir / "short.vf", text));
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK_THAT(std::string(e.what()), Catch::Matchers::ContainsSubstring("missing 1"));
        }
    }
    SECTION("malformed inputs") {
        const std::string good_head = "VFIELD v1\ndims 2 2 2\norigin 0 0 0\nspacing 1 1 1\n";
        std::string rows;
        for (int i = 0; i < 8; ++i) rows += "1 2 3\n";
        CHECK_THROWS_AS(load_grid_field(testutil::write_file(dir / "m1.vf", "VFIELD v2\n" + rows)), ParseError);
        CHECK_THROWS_AS(load_grid_field(testutil::write_file(dir / "m2.vf", good_head + rows + "1 2 3\n")), ParseError);
        CHECK_THROWS_AS(load_grid_field(testutil::write_file(dir / "m3.vf", good_head + "nan 0 0\n" + rows.substr(6))), ParseError);
        CHECK_THROWS_AS(load_grid_field(testutil::write_file(dir / "m4.vf", good_head + "1 2\n" + rows.substr(6))), ParseError);
        CHECK_THROWS_AS(load_grid_field(testutil::write_file(dir / "m5.vf", "VFIELD v1\ndims 1 2 2\norigin 0 0 0\nspacing 1 1 1\n" + rows.substr(0, 24))), ParseError);
        CHECK_THROWS_AS(load_grid_field((dir / "absent.vf").string()), ParseError);
    }
    SECTION("linear field is reproduced exactly and round-trips") {
        std::vector<GridVectorField::Node> nodes;
        const std::array<int, 3> dims{4, 3, 2};
        const Vec3 origin(-0.01, -0.003, -0.003), spacing(0.01, 0.003, 0.006);
        for (int k = 0; k < 2; ++k)
            for (int j = 0; j < 3; ++j)
                for (int i = 0; i < 4; ++i) {
                    const double x = origin.x() + i * spacing.x();
                    nodes.push_back({2.0 * x + 0.25, -x, 0.0});
                }
        const GridVectorField grid(dims, origin, spacing, nodes);
        const std::string path = (dir / "lin.vf").string();
        save_grid_field(grid, path);
        const GridVectorField back = load_grid_field(path);
        CHECK(back.dims() == dims);
        CHECK(back.origin() == origin);
        CHECK(back.spacing() == spacing);
        CHECK(back.values() == grid.values());
        for (int n = 0; n < 200; ++n) {
            const Vec3 p(testutil::uniform(-0.01, 0.02), testutil::uniform(-0.003, 0.003),
                         testutil::uniform(-0.003, 0.003));
            const Vec3 u = sample_grid_field(back, p);
            CHECK_THAT(u.x(), WithinAbs(2.0 * p.x() + 0.25, 1e-15));
            CHECK_THAT(u.y(), WithinAbs(-p.x(), 1e-15));
        }
        const auto& node = grid.node(2, 1, 1);
        CHECK(sample_grid_field(back, origin + Vec3(2 * spacing.x(), spacing.y(), spacing.z())) ==
              Vec3(node[0], node[1], node[2]));
    }
}

TEST_CASE("grid-backed flow field samples the grid") {
    const Geometry g = build_geometry(GeometryKind::tube, 0.1, 0.0, 0.005);
    std::vector<GridVectorField::Node> nodes(8, {0.4, 0.0, 0.0});
    const FlowField f = FlowField::from_grid(g, GridVectorField({2, 2, 2}, Vec3(0, -0.003, -0.003),
                                                                Vec3(0.1, 0.006, 0.006), nodes));
    CHECK(f.source() == FlowSource::grid);
    CHECK((f.velocity_at({0.05, 0.001, 0}) - Vec3(0.4, 0, 0)).norm() < 1e-15);
}
