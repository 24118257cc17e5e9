#include <catch_amalgamated.hpp>

#include "capnav/locomotion.hpp"
#include "capnav/stats.hpp"

using namespace capnav;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double kRollingDiameter = 1.69e-3;
}

TEST_CASE("rolling velocity") {
    const RollingModel model;
    CHECK_THAT(model.slip_factor, WithinRel(0.1393782933585829, 1e-12));
    CHECK(rolling_velocity(model, kRollingDiameter, 0.0) == 0.0);
    CHECK_THAT(rolling_velocity(model, kRollingDiameter, 5.0), WithinRel(0.0037, 1e-12));
    CHECK(rolling_velocity(model, kRollingDiameter, 20.0) == 0.0);
    CHECK(rolling_velocity(model, kRollingDiameter, 12.5) == 0.0);
    CHECK(rolling_velocity(model, kRollingDiameter, 12.0) > 0.0);

    // Bounce band: (5, 7] runs at reduced efficiency, so 6 Hz is slower than 5 Hz.
    CHECK_THAT(rolling_velocity(model, kRollingDiameter, 6.0),
               WithinRel(0.6 * 6.0 / 5.0 * 0.0037, 1e-12));
    CHECK(rolling_velocity(model, kRollingDiameter, 6.0) < rolling_velocity(model, kRollingDiameter, 5.0));
    CHECK(rolling_velocity(model, kRollingDiameter, 8.0) > rolling_velocity(model, kRollingDiameter, 7.0));

    double prev = -1.0;
    for (double f = 0.0; f <= 5.0; f += 0.25) {
        const double v = rolling_velocity(model, kRollingDiameter, f);
        CHECK(v > prev);
        prev = v;
    }
    for (double f : {1.0, 3.0, 9.0}) {
        CHECK_THAT(rolling_velocity(model, 2 * kRollingDiameter, f),
                   WithinRel(2 * rolling_velocity(model, kRollingDiameter, f), 1e-15));
    }
    CHECK_THROWS_AS(rolling_velocity(model, kRollingDiameter, -1.0), InvalidParameter);
}

TEST_CASE("rolling model validation") {
    CHECK_NOTHROW(RollingModel{}.validate());
    RollingModel m;
    m.slip_factor = 1.5;
    CHECK_THROWS_AS(m.validate(), InvalidParameter);
    m = RollingModel{};
    m.band_high = 13.0;
    CHECK_THROWS_AS(m.validate(), InvalidParameter);
    m = RollingModel{};
    m.band_low = 8.0;
    CHECK_THROWS_AS(m.validate(), InvalidParameter);
    m = RollingModel{};
    m.band_high = m.step_out_frequency;
    CHECK_NOTHROW(m.validate());
}

TEST_CASE("counterflow profile names") {
    for (auto p : {CounterflowProfile::automatic, CounterflowProfile::parabolic, CounterflowProfile::power_law}) {
        CHECK(parse_counterflow_profile(to_string(p)) == p);
    }
    CHECK_THROWS_AS(parse_counterflow_profile("plug"), InvalidParameter);
}

TEST_CASE("counterflow drag") {
    const CapsuleSpec capsule;
    const FluidProperties water;
    const CounterflowSetup setup;
    CHECK(counterflow_drag(capsule, water, setup, 0.0) == 0.0);
    double prev = 0.0;
    for (double u = 0.005; u < 1.0; u *= 1.3) {
        const double d = counterflow_drag(capsule, water, setup, u);
        CHECK(d > prev);
        prev = d;
    }
    CounterflowSetup narrow;
    narrow.tube_diameter = 1.0e-3;
    CHECK_THROWS_AS(counterflow_drag(capsule, water, narrow, 0.1), InvalidParameter);
}

TEST_CASE("maximum counterflow") {
    const CapsuleSpec capsule;
    const FluidProperties water;
    const CounterflowSetup setup;
    CHECK(max_counterflow(capsule, water, setup, 0.0) == 0.0);
    CHECK_THROWS_AS(max_counterflow(capsule, water, setup, -0.1), InvalidParameter);

    CHECK_THAT(max_counterflow(capsule, water, setup, 0.1), WithinRel(0.12641678536415715, 1e-9));
    CHECK_THAT(max_counterflow(capsule, water, setup, 0.25), WithinRel(0.22576751019337749, 1e-9));
    CHECK_THAT(max_counterflow(capsule, water, setup, 0.5), WithinRel(0.3474394615959919, 1e-9));

    // At the solution the drag balances the magnetic pull.
    const double u = max_counterflow(capsule, water, setup, 0.3);
    CHECK_THAT(counterflow_drag(capsule, water, setup, u), WithinRel(0.3 * 7.2e-5, 1e-9));

    std::vector<double> g, v;
    double prev = 0.0;
    for (int i = 1; i <= 9; ++i) {
        g.push_back(0.05 * (i + 1));
        v.push_back(max_counterflow(capsule, water, setup, g.back()));
        CHECK(v.back() >= prev);
        prev = v.back();
    }
    CHECK(linear_fit(g, v).r_squared >= 0.95);
    CHECK(max_counterflow(capsule, water, setup, 0.5) == max_counterflow(capsule, water, setup, 0.5));

    CounterflowSetup lam = setup;
    lam.profile = CounterflowProfile::parabolic;
    CHECK(max_counterflow(capsule, water, lam, 0.5) > 0.0);
}

TEST_CASE("linear fit") {
    const auto fit = linear_fit({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK_THAT(fit.slope, WithinRel(2.0, 1e-15));
    CHECK_THAT(fit.intercept, WithinAbs(1.0, 1e-15));
    CHECK_THAT(fit.r_squared, WithinRel(1.0, 1e-15));
    CHECK(linear_fit({0, 1, 2}, {4, 4, 4}).r_squared == 1.0);
    CHECK_THROWS_AS(linear_fit({1, 1, 1}, {0, 1, 2}), FitError);
    CHECK_THROWS_AS(linear_fit({1}, {0}), InvalidParameter);
    const auto noisy = linear_fit({0, 1, 2, 3}, {0, 1.2, 1.8, 3.1});
    CHECK(noisy.r_squared < 1.0);
    CHECK(noisy.r_squared > 0.95);
}
