#include "support.hpp"

#include "elasticflow/diagnostics.hpp"
#include "elasticflow/error.hpp"
#include "elasticflow/scenario.hpp"

#include <doctest.h>

using namespace ef;

TEST_CASE("gradient check is tiny at the unit segment") {
    const auto seg = DiscreteCurve::validate(testing::straight(11, 1.0));
    CHECK(fd_gradient_check(to_reduced(seg), seg, {0.01, 0.05}) < 1e-7);
}

TEST_CASE("residuals need five points") {
    FlowConfig cfg;
    cfg.params = {0.01, 0.05};
    cfg.n_steps = 2;
    const auto traj = run_flow(DiscreteCurve::validate(testing::straight(4, 2.0)), cfg);
    CHECK_THROWS_AS(interior_residual(traj, 0, traj.params), Error);
    CHECK_THROWS_AS(boundary_residual(traj, 0, traj.params), Error);
    const auto big = run_flow(DiscreteCurve::validate(testing::straight(6, 2.0)), cfg);
    CHECK_THROWS_AS(residual_report(big, 2), Error);
    CHECK_NOTHROW(residual_report(big, 1));
}

TEST_CASE("self intersections agree with brute force") {
    CHECK(self_intersections(DiscreteCurve::validate(testing::straight(30, 2.0))) == 0);

    const Points zig{{0, 0}, {2, 0}, {2, 1}, {0, -1}};
    const auto c = resample_equal_arclength(zig, 60);
    const auto n = self_intersections(c);
    CHECK(n >= 1);
    CHECK(n == testing::brute_force_crossings(c.points()));
    for (const auto& [a, b] : crossing_edges(c)) CHECK(b >= a + 2);

    std::mt19937_64 rng(51);
    for (int k = 0; k < 200; ++k) {
        const auto r = testing::random_curve(rng, 30, 1.2);
        CHECK(self_intersections(r) == testing::brute_force_crossings(r.points()));
    }

    const auto gamma = make_scenario(default_scenario(ScenarioId::Gamma));
    CHECK(self_intersections(gamma) == 1);
}

TEST_CASE("loop diameter") {
    CHECK_FALSE(loop_diameter(DiscreteCurve::validate(testing::straight(10, 1.0))).has_value());
    auto sc = default_scenario(ScenarioId::Gamma);
    const auto d = loop_diameter(make_scenario(sc));
    REQUIRE(d.has_value());
    // The loop runs from the crossing point round the circle: at least the
    // circle's diameter, at most crossing-to-bottom r (1 + sqrt 2).
    CHECK(*d >= 2 * sc.loop_radius * (1 - 1e-3));
    CHECK(*d <= sc.loop_radius * (1 + std::sqrt(2.0)) * (1 + 1e-3));
}

TEST_CASE("chord deviation") {
    CHECK(chord_deviation(DiscreteCurve::validate(testing::straight(10, 1.0, Vec2(1, 2), 0.4))) < 1e-15);
    CHECK(chord_deviation(DiscreteCurve::validate({{0, 0}, {1, 0}, {1, 1}})) == doctest::Approx(std::sqrt(0.5)));
    const auto sinus = make_scenario(default_scenario(ScenarioId::Sinus));
    CHECK(chord_deviation(sinus) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("built-in checks pass") {
    for (const auto& r : run_checks()) {
        INFO(r.name, ": ", r.detail);
        CHECK(r.passed);
    }
}
