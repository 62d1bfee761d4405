#include "support.hpp"

#include "elasticflow/diagnostics.hpp"
#include "elasticflow/error.hpp"
#include "elasticflow/flow.hpp"
#include "elasticflow/scenario.hpp"

#include <doctest.h>

using namespace ef;

namespace {

FlowConfig config(double eps, double tau, std::optional<std::size_t> steps, std::optional<double> stop) {
    FlowConfig cfg;
    cfg.params = {eps, tau};
    cfg.n_steps = steps;
    cfg.stop_tol = stop;
    return cfg;
}

} // namespace

TEST_CASE("unit segment stops immediately") {
    const auto seg = DiscreteCurve::validate(testing::straight(11, 1.0));
    const auto traj = run_flow(seg, config(0.01, 0.05, 100, 1e-7));
    CHECK(traj.termination == "stop_tol");
    CHECK(traj.steps.size() == 2);
    CHECK(traj.snapshots.size() == 2);
    CHECK(traj.steps.back().max_speed < 1e-7);
}

TEST_CASE("segment of length 2 shrinks to unit length along the scalar oracle") {
    const auto seg = DiscreteCurve::validate(testing::straight(51, 2.0));
    const auto traj = run_flow(seg, config(0.01, 0.05, 5000, 1e-7));
    CHECK(traj.termination == "stop_tol");
    CHECK(std::abs(traj.final_curve().total_length() - 1.0) < 1e-2);
    double L = 2.0;
    for (std::size_t k = 1; k < traj.steps.size(); ++k) {
        CHECK(traj.steps[k].length < traj.steps[k - 1].length + 1e-12);
        L = testing::segment_oracle_step(L, 0.05);
        CHECK(std::abs(traj.steps[k].length - L) < 1e-4);
    }
    SUBCASE("velocity is tangential and the residuals vanish") {
        for (std::size_t n = 0; n + 1 < traj.snapshots.size(); n += 7) {
            const auto v = velocity(traj, n);
            for (double vn : v.normal) CHECK(std::abs(vn) <= 1e-9);
            const auto r = residual_report(traj, n);
            CHECK(r.interior_L2 < 1e-8);
            CHECK(r.coupling_L2 < 1e-8);
        }
        // First step: boundary residual is an O(tau) time-discretization error.
        const auto r0 = boundary_residual(traj, 0, traj.params);
        CHECK(r0.boundary_start.norm() < 0.1);
        CHECK(r0.boundary_end.norm() < 0.1);
    }
}

TEST_CASE("velocity decomposition reconstructs V") {
    std::mt19937_64 rng(41);
    const auto c0 = testing::random_curve(rng, 25, 0.3);
    const auto traj = run_flow(c0, config(0.05, 0.01, 5, std::nullopt));
    for (std::size_t n = 0; n + 1 < traj.snapshots.size(); ++n) {
        const auto v = velocity(traj, n);
        for (std::size_t i = 0; i < v.velocity.size(); ++i) {
            const Vec2 t = v.vertex_tangent[i];
            const Vec2 rebuilt = v.tangential[i] * t + v.normal[i] * rot90(t);
            CHECK((rebuilt - v.velocity[i]).norm() < 1e-12 * (1 + v.velocity[i].norm()));
            CHECK(std::abs(t.norm() - 1.0) < 1e-14);
        }
    }
    CHECK_THROWS_AS(velocity(traj, traj.snapshots.size() - 1), Error);
}

TEST_CASE("stationary step has zero velocity and residuals") {
    const auto seg = DiscreteCurve::validate(testing::straight(9, 1.0));
    const auto traj = run_flow(seg, config(0.01, 0.05, 1, std::nullopt));
    const auto v = velocity(traj, 0);
    for (const auto& vi : v.velocity) CHECK(vi.norm() < 1e-6);
    const auto r = residual_report(traj, 0);
    CHECK(r.interior_L2 < 1e-6);
    CHECK(r.boundary_start.norm() < 1e-5);
    CHECK(r.boundary_end.norm() < 1e-5);
    CHECK(coupling_residual(traj, 0).max < 1e-6);
}

TEST_CASE("a-priori bounds hold along a random-curve flow") {
    std::mt19937_64 rng(42);
    const auto c0 = testing::random_curve(rng, 30, 0.4);
    const auto traj = run_flow(c0, config(0.02, 0.02, 60, std::nullopt));
    const double e0 = traj.initial_energy();
    double dissipated = 0;
    for (std::size_t k = 1; k < traj.steps.size(); ++k) {
        const auto& r = traj.steps[k];
        CHECK(r.energy <= traj.steps[k - 1].energy + 1e-10 * (1 + e0));
        CHECK(r.gap <= r.length * (1 + 1e-12));
        CHECK(r.length <= 2 * (e0 + 1));
        CHECK(r.bending <= e0 + 1);
        dissipated += r.dissipation_rate;
        CHECK(r.cone_ok);
    }
    CHECK(dissipated <= e0 + 1e-8);
    for (const auto& s : traj.snapshots) {
        CHECK_NOTHROW(DiscreteCurve::validate(s.curve.points(), kInternalEdgeTol * 100));
    }
}

TEST_CASE("interpolants") {
    const auto seg = DiscreteCurve::validate(testing::straight(11, 2.0));
    const auto traj = run_flow(seg, config(0.01, 0.1, 4, std::nullopt));
    const double t = 0.25; // between steps 2 and 3
    CHECK(traj.length_constant_at(t) == traj.snapshots[3].curve.total_length());
    const double w = 0.5;
    const double expected = (1 - w) * traj.snapshots[2].curve.total_length() + w * traj.snapshots[3].curve.total_length();
    CHECK(traj.length_affine_at(t) == doctest::Approx(expected));
    const auto pts = traj.affine_at(t);
    CHECK((pts[0] - 0.5 * (traj.snapshots[2].curve[0] + traj.snapshots[3].curve[0])).norm() < 1e-15);
    CHECK(traj.constant_at(0.0) == traj.snapshots[0].curve.points());
    CHECK(traj.length_affine_at(100.0) == traj.final_curve().total_length());
}

TEST_CASE("snapshot thinning keeps first and last") {
    const auto seg = DiscreteCurve::validate(testing::straight(11, 2.0));
    auto cfg = config(0.01, 0.05, 10, std::nullopt);
    cfg.snapshot_every = 4;
    const auto traj = run_flow(seg, cfg);
    std::vector<std::size_t> steps;
    for (const auto& s : traj.snapshots) steps.push_back(s.step);
    CHECK(steps == std::vector<std::size_t>{0, 4, 8, 10});
    CHECK(traj.steps.size() == 11);
    CHECK(traj.snapshot_of_step(8) == std::optional<std::size_t>(2));
    CHECK_FALSE(traj.snapshot_of_step(5).has_value());
}

TEST_CASE("observer can stop the run") {
    const auto seg = DiscreteCurve::validate(testing::straight(11, 2.0));
    std::size_t calls = 0;
    const auto traj = run_flow(seg, config(0.01, 0.05, 100, std::nullopt), [&](const StepRecord& r, const DiscreteCurve&) {
        ++calls;
        return r.step < 3;
    });
    CHECK(calls == 3);
    CHECK(traj.termination == "observer");
    CHECK(traj.final_curve().size() == 11);
}

TEST_CASE("bound violation carries the partial trajectory") {
    // The symmetric gamma at this step size eventually snaps open and breaks
    // the tangent cone condition.
    auto p = *find_preset("gamma");
    p.config.n_steps = 600;
    p.config.stop_tol.reset();
    try {
        run_flow(make_scenario(p.scenario), p.config);
        FAIL("expected a bound violation");
    } catch (const FlowError& e) {
        CHECK(e.code() == ErrorCode::BoundViolation);
        REQUIRE(e.partial());
        CHECK(e.partial()->steps.size() > 100);
        CHECK_FALSE(e.partial()->steps.back().cone_ok);
    }
}

TEST_CASE("config validation") {
    const auto seg = DiscreteCurve::validate(testing::straight(5, 2.0));
    CHECK_THROWS_AS(run_flow(seg, config(0.01, 0.05, std::nullopt, std::nullopt)), Error);
    CHECK_THROWS_AS(run_flow(seg, config(0.01, 0.05, 5, -1.0)), Error);
}
