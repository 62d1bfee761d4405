#pragma once

#include "elasticflow/energy.hpp"
#include "elasticflow/geometry.hpp"

#include <cstddef>
#include <utility>

namespace ef {

struct SolverOptions {
    double grad_tol = 1e-11; ///< stationarity threshold on the gradient infinity-norm
    std::size_t max_iters = 2000;
    double ls_shrink = 0.5;  ///< backtracking factor
    double ls_c1 = 1e-4;     ///< Armijo constant
    std::size_t memory = 10; ///< quasi-Newton history length
    double gap_floor = 1e-8; ///< candidates with a smaller endpoint gap are rejected
    std::size_t max_halvings = 60;
    /// Use the Gauss-Newton model of StepObjective as the initial inverse
    /// Hessian of the two-loop recursion (plain scaled identity otherwise),
    /// rebuilt every `refresh_every` iterations.
    bool precondition = true;
    std::size_t refresh_every = 50;

    void validate() const;
};

struct StepReport {
    std::size_t iterations = 0;
    double final_grad_norm = 0.0;
    double f_initial = 0.0;
    double f_final = 0.0;
    bool converged = false;
};

/// One implicit step: approximately minimizes E(x) + D(x, prev)/tau over
/// equal-edge curves, starting from prev. Never returns a curve whose
/// objective exceeds f_initial = E(prev) by more than rounding noise,
/// 64 DBL_EPSILON (1 + |f_initial|).
/// Throws LineSearchFailure; max_iters exhaustion is reported via
/// StepReport::converged == false.
std::pair<DiscreteCurve, StepReport> minimize_step(const DiscreteCurve& prev, const EnergyParams& params,
                                                   const SolverOptions& opts = {});

/// True iff every edge tangent of next has a nonnegative inner product with
/// the matching tangent of prev. Throws MismatchedN.
bool assert_cone_condition(const DiscreteCurve& next, const DiscreteCurve& prev);

} // namespace ef
