#pragma once

#include "elasticflow/energy.hpp"
#include "elasticflow/error.hpp"
#include "elasticflow/geometry.hpp"
#include "elasticflow/minimizer.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ef {

struct FlowConfig {
    EnergyParams params;
    std::optional<std::size_t> n_steps; ///< stop after this many steps
    std::optional<double> stop_tol;     ///< stop once max vertex speed drops below
    SolverOptions solver;
    std::size_t snapshot_every = 1;     ///< the first and last state are always kept
    double monotone_tol = 1e-10;        ///< energy slack, relative to 1 + |E_0|

    /// Throws BadParameters; at least one of n_steps / stop_tol must be set.
    void validate() const;
};

/// Per-step scalars. Record 0 describes the initial curve.
struct StepRecord {
    std::size_t step = 0;
    double time = 0.0;
    double energy = 0.0;
    double length = 0.0;
    double gap = 0.0;
    double edge_len = 0.0;
    double bending = 0.0;          ///< (eps l / 2) sum kappa^2
    double dissipation_rate = 0.0; ///< D(x_n, x_{n-1}) / tau
    double max_speed = 0.0;        ///< max_i |x_i^n - x_i^{n-1}| / tau
    bool cone_ok = true;
    StepReport solver;
};

struct Snapshot {
    std::size_t step = 0;
    double time = 0.0;
    DiscreteCurve curve;
};

/// Time-discrete evolution. The piecewise-constant interpolant at time t is
/// the snapshot at step ceil(t/tau); the piecewise-affine one blends the two
/// bracketing snapshots.
struct Trajectory {
    EnergyParams params;
    std::vector<StepRecord> steps;
    std::vector<Snapshot> snapshots;
    std::string termination;

    const DiscreteCurve& initial_curve() const { return snapshots.front().curve; }
    const DiscreteCurve& final_curve() const { return snapshots.back().curve; }
    double initial_energy() const { return steps.front().energy; }

    /// Snapshot index holding the given step, if recorded.
    std::optional<std::size_t> snapshot_of_step(std::size_t step) const;

    Points constant_at(double t) const;
    Points affine_at(double t) const;
    double length_constant_at(double t) const;
    double length_affine_at(double t) const;
};

/// Thrown by run_flow when a runtime bound check fails. Carries the steps
/// computed up to and including the offending one.
class FlowError : public Error {
public:
    FlowError(ErrorCode code, const std::string& what, std::shared_ptr<const Trajectory> partial)
        : Error(code, what), partial_(std::move(partial)) {}

    const std::shared_ptr<const Trajectory>& partial() const noexcept { return partial_; }

private:
    std::shared_ptr<const Trajectory> partial_;
};

/// Called after each step; return false to stop early.
using StepObserver = std::function<bool(const StepRecord&, const DiscreteCurve&)>;

/// Iterates minimize_step from `initial` and asserts per step:
///   E_{n+1} <= E_n and E_{n+1} + D/tau <= E_n (slack monotone_tol (1+|E_0|)),
///   gap_floor <= gap <= (N-1) l <= 2 (E_0 + 1),
///   (eps l / 2) sum kappa^2 <= E_0, sum D/tau <= E_0,
///   tangent cone <t_i, t_prev_i> >= 0.
/// Violations throw FlowError(BoundViolation).
Trajectory run_flow(const DiscreteCurve& initial, const FlowConfig& cfg, const StepObserver& observer = {});

struct VelocityField {
    Points velocity;
    Points vertex_tangent;          ///< unit tangents of the later curve
    std::vector<double> tangential; ///< <V, t>
    std::vector<double> normal;     ///< <V, R t>
};

/// Difference quotient between snapshots n and n+1. Throws IndexOutOfRange.
VelocityField velocity(const Trajectory& traj, std::size_t n);

struct CouplingResidual {
    std::vector<double> per_vertex; ///< interior vertices 2..N-1
    double max = 0.0;
    double l2 = 0.0;
};

/// Discrete coupling identity between snapshots n and n+1:
///   <V, g~_s + g_s>_s - (L~ + L) dL/dt - <V, L~ k~ R(t~) + L k R(t)>
/// with s-chart spacing 1/(N-1). Throws IndexOutOfRange, TooFewPoints.
CouplingResidual coupling_residual(const Trajectory& traj, std::size_t n);

} // namespace ef
