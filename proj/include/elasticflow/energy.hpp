#pragma once

#include "elasticflow/geometry.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace ef {

struct EnergyParams {
    double epsilon = 0.01; ///< bending weight
    double tau = 0.05;     ///< time step

    /// Throws BadParameters unless epsilon > 0 and tau > 0.
    void validate() const;
    /// The a-priori analysis assumes tau < 1; larger steps are allowed but flagged.
    bool tau_above_unit() const { return tau > 1.0; }
};

struct EnergyBreakdown {
    double length_term = 0.0;
    double bending_term = 0.0;
    double coulomb_term = 0.0;
    double total = 0.0;
};

/// E = (N-1) l + (eps l / 2) sum kappa_i^2 - log|x_1 - x_N|.
/// The length term is the polygonal length (N-1) l. Throws DegenerateGap.
EnergyBreakdown energy(const DiscreteCurve& curve, const EnergyParams& params);

/// Symmetrized normal-projection distance plus endpoint displacements:
///   (l_prev/4) sum <x_i - p_i, n_prev_i>^2 + (l/4) sum <x_i - p_i, n_i>^2
///   + |x_1 - p_1|^2 / 2 + |x_N - p_N|^2 / 2,
/// with point i paired with edge i (i = 1..N-1). Throws MismatchedN.
double dissipation(const DiscreteCurve& curve, const DiscreteCurve& prev);

/// Layout of the flat reduced-coordinate vector used by the optimizer:
/// [base_x, base_y, l, h_1, ..., h_{N-1}].
Eigen::VectorXd pack(const ReducedCoords& rc);
ReducedCoords unpack(const Eigen::VectorXd& z);

inline constexpr std::size_t kHeadingOffset = 3;

/// F(., prev) = E + D(., prev) / tau on the reduced chart, with the data of
/// `prev` cached. Infeasible points (gap <= gap_floor, l <= 0, cusp) evaluate
/// to +infinity so that a line search can back off from them.
class StepObjective {
public:
    StepObjective(const DiscreteCurve& prev, const EnergyParams& params, double gap_floor = 0.0);

    std::size_t dim() const { return kHeadingOffset + prev_.size() - 1; }
    const DiscreteCurve& prev() const { return prev_; }
    const EnergyParams& params() const { return params_; }

    /// Objective value in arithmetic T (double, or long double for oracles).
    template <class T>
    T value(std::span<const T> z) const;

    double value(const Eigen::VectorXd& z) const {
        return value<double>(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
    }

    /// Value and exact gradient. Gradient is left untouched when infeasible.
    double value_and_gradient(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const;

    /// Positive semidefinite Gauss-Newton model of the Hessian at z: the
    /// dissipation and endpoint terms as sums of squares, the attractive part
    /// of the Coulomb term, and the convex bending curvature. Used as a
    /// quasi-Newton preconditioner.
    Eigen::MatrixXd model_hessian(const Eigen::VectorXd& z) const;

private:
    DiscreteCurve prev_;
    EnergyParams params_;
    double gap_floor_;
    Points prev_normals_;
    // Scratch for value_and_gradient.
    mutable Points x_;
    mutable Points g_;
};

/// F(from_reduced(rc), prev). Throws DegenerateGap, MismatchedN.
double objective(const ReducedCoords& rc, const DiscreteCurve& prev, const EnergyParams& params);

/// Exact gradient over (base_x, base_y, l, h_1..h_{N-1}). Throws like objective
/// and CuspAngle.
Eigen::VectorXd objective_gradient(const ReducedCoords& rc, const DiscreteCurve& prev, const EnergyParams& params);

template <class T>
T StepObjective::value(std::span<const T> z) const {
    using std::cos;
    using std::log;
    using std::sin;
    using std::sqrt;
    const std::size_t n = prev_.size();
    const T l = z[2];
    if (!(l > T(0))) return std::numeric_limits<T>::infinity();

    // Rebuild points with the same recurrence as reconstruct_points.
    T px = z[0];
    T py = z[1];
    const T lp = T(prev_.edge_len());
    const T inv_tau = T(1) / T(params_.tau);
    T diss_prev = 0, diss_cur = 0, bend = 0;
    T cprev = 0, sprev = 0;
    T first_x = px, first_y = py;
    T end_term = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const T c = cos(z[kHeadingOffset + i]);
        const T s = sin(z[kHeadingOffset + i]);
        const T dx = px - T(prev_[i].x());
        const T dy = py - T(prev_[i].y());
        if (i == 0) end_term += dx * dx + dy * dy;
        const T pn = dx * T(prev_normals_[i].x()) + dy * T(prev_normals_[i].y());
        const T cn = -dx * s + dy * c;
        diss_prev += pn * pn;
        diss_cur += cn * cn;
        if (i > 0) {
            const T denom = T(1) + cprev * c + sprev * s;
            if (!(denom >= T(kCuspTol))) return std::numeric_limits<T>::infinity();
            const T t = (cprev * s - sprev * c) / denom;
            bend += t * t;
        }
        cprev = c;
        sprev = s;
        px += l * c;
        py += l * s;
    }
    {
        const T dx = px - T(prev_.back().x());
        const T dy = py - T(prev_.back().y());
        end_term += dx * dx + dy * dy;
    }
    const T gx = px - first_x;
    const T gy = py - first_y;
    const T gap = sqrt(gx * gx + gy * gy);
    if (!(gap > T(gap_floor_)) || !(gap > T(0))) return std::numeric_limits<T>::infinity();

    const T length_term = T(n - 1) * l;
    const T bending_term = T(2) * T(params_.epsilon) / l * bend;
    const T coulomb_term = -log(gap);
    const T diss = lp / T(4) * diss_prev + l / T(4) * diss_cur + end_term / T(2);
    return length_term + bending_term + coulomb_term + diss * inv_tau;
}

} // namespace ef
