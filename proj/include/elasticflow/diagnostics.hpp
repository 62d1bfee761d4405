#pragma once

#include "elasticflow/energy.hpp"
#include "elasticflow/flow.hpp"
#include "elasticflow/geometry.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ef {

/// Residuals of the limiting strong-form system evaluated on the step from
/// snapshot n to snapshot n+1 (geometry of the later curve).
struct ResidualReport {
    std::size_t step_index = 0;
    // V_perp - kappa + eps (kappa_ss / L^2 + kappa^3 / 2) over vertices 3..N-2.
    double interior_L2 = 0.0;
    double interior_max = 0.0;
    // Endpoint velocity minus the predicted endpoint law.
    Vec2 boundary_start = Vec2::Zero();
    Vec2 boundary_end = Vec2::Zero();
    // |kappa_2|, |kappa_{N-1}|: proxies for the natural condition kappa = 0 at the ends.
    std::array<double, 2> kappa_boundary{0.0, 0.0};
    double coupling_L2 = 0.0;
};

/// Central-difference check of objective_gradient. Differences are taken in
/// extended precision with step h * max(1, |z_k|). Returns the largest
/// per-component relative error, falling back to absolute error where the
/// analytic component is below 1e-8 in magnitude.
double fd_gradient_check(const ReducedCoords& rc, const DiscreteCurve& prev, const EnergyParams& params,
                         double h = 1e-6);

/// Interior fields only. Throws TooFewPoints for N < 5, IndexOutOfRange.
ResidualReport interior_residual(const Trajectory& traj, std::size_t n, const EnergyParams& params);

/// Boundary fields only. Throws TooFewPoints for N < 5, IndexOutOfRange.
ResidualReport boundary_residual(const Trajectory& traj, std::size_t n, const EnergyParams& params);

/// Interior, boundary and coupling fields together, using traj.params.
ResidualReport residual_report(const Trajectory& traj, std::size_t n);

/// Pairs (a, b), a < b, of non-adjacent edges that cross properly. Touching
/// within an orientation tolerance of 1e-12 l^2 does not count.
std::vector<std::pair<std::size_t, std::size_t>> crossing_edges(const DiscreteCurve& curve);
std::size_t self_intersections(const DiscreteCurve& curve);

/// Max pairwise distance among the vertices strictly between the first
/// crossing pair of edges; nullopt when the curve does not cross itself.
std::optional<double> loop_diameter(const DiscreteCurve& curve);

/// Max distance of a vertex from the segment joining the endpoints.
double chord_deviation(const DiscreteCurve& curve);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Invariant and property suite over the built-in scenarios (used by `check`).
std::vector<CheckResult> run_checks();

} // namespace ef
