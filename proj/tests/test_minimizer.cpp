#include "support.hpp"

#include "elasticflow/energy.hpp"
#include "elasticflow/error.hpp"
#include "elasticflow/minimizer.hpp"

#include <doctest.h>

#include <numbers>

using namespace ef;

TEST_CASE("the unit segment is a fixed point") {
    const auto seg = DiscreteCurve::validate(testing::straight(21, 1.0, Vec2(-0.5, 0.2), 0.3));
    const auto [next, rep] = minimize_step(seg, {0.01, 0.05});
    double err = 0;
    for (std::size_t i = 0; i < seg.size(); ++i) err = std::max(err, (next[i] - seg[i]).lpNorm<Eigen::Infinity>());
    CHECK(err < 1e-7);
    CHECK(rep.iterations <= 3);
    CHECK(rep.converged);
}

TEST_CASE("straight segment of length 2 follows the scalar oracle") {
    const EnergyParams p{0.01, 0.05};
    const auto prev = DiscreteCurve::validate(testing::straight(21, 2.0));
    const auto [next, rep] = minimize_step(prev, p);
    const auto rc = to_reduced(next);
    for (double h : rc.headings) CHECK(std::abs(h - rc.headings.front()) < 1e-8);
    CHECK(std::abs(rc.headings.front()) < 1e-8);
    const double L = next.total_length();
    CHECK(L > 1.0);
    CHECK(L < 2.0);
    CHECK(std::abs(L - testing::segment_oracle_step(2.0, p.tau)) < 1e-6);
    CHECK(rep.f_final <= 2.0 - std::log(2.0));
    CHECK(objective(rc, prev, p) <= energy(prev, p).total);
    // Symmetric shrink about the midpoint.
    CHECK(std::abs(next.front().x() + next.back().x() - 2.0) < 1e-8);
}

TEST_CASE("descent and stationarity on random curves") {
    std::mt19937_64 rng(31);
    const EnergyParams p{0.05, 0.02};
    for (int k = 0; k < 30; ++k) {
        const auto prev = testing::random_curve(rng, 6 + k % 20, 0.4);
        const auto [next, rep] = minimize_step(prev, p);
        CHECK(rep.f_final <= rep.f_initial + 1e-14 * (1 + rep.f_initial));
        CHECK(rep.f_initial == doctest::Approx(energy(prev, p).total).epsilon(1e-14));
        CHECK(objective(to_reduced(next), prev, p) == doctest::Approx(rep.f_final).epsilon(1e-12));
        CHECK(energy(next, p).total <= energy(prev, p).total + 1e-10);
        if (rep.converged) {
            CHECK(objective_gradient(to_reduced(next), prev, p).lpNorm<Eigen::Infinity>() <= 1e-9);
        }
    }
}

TEST_CASE("max_iters exhaustion is reported, not thrown") {
    SolverOptions opts;
    opts.max_iters = 2;
    const auto prev = DiscreteCurve::validate(testing::straight(15, 3.0));
    const auto [next, rep] = minimize_step(prev, {0.01, 0.05}, opts);
    CHECK_FALSE(rep.converged);
    CHECK(rep.iterations == 2);
    CHECK(rep.f_final < rep.f_initial);
}

TEST_CASE("solver is deterministic") {
    std::mt19937_64 rng(32);
    const auto prev = testing::random_curve(rng, 30, 0.5);
    const auto a = minimize_step(prev, {0.02, 0.05}).first;
    const auto b = minimize_step(prev, {0.02, 0.05}).first;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("option validation") {
    SolverOptions opts;
    opts.ls_shrink = 1.5;
    const auto prev = DiscreteCurve::validate(testing::straight(5, 1.0));
    CHECK_THROWS_AS(minimize_step(prev, {0.01, 0.05}, opts), Error);
    CHECK_THROWS_AS(minimize_step(prev, {0.0, 0.05}), Error);
    CHECK_THROWS_AS(minimize_step(prev, {0.01, -1.0}), Error);
}

TEST_CASE("cone condition") {
    const auto c = DiscreteCurve::validate(testing::straight(5, 1.0));
    CHECK(assert_cone_condition(c, c));
    const auto flipped = DiscreteCurve::validate(testing::straight(5, 1.0, Vec2::Zero(), std::numbers::pi));
    CHECK_FALSE(assert_cone_condition(flipped, c));
    CHECK_THROWS_AS(assert_cone_condition(c, DiscreteCurve::validate(testing::straight(4, 1.0))), Error);
}
