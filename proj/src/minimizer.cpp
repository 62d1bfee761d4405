#include "elasticflow/minimizer.hpp"

#include "elasticflow/error.hpp"

#include <fmt/format.h>

#include <Eigen/Cholesky>

#include <cfloat>
#include <deque>

namespace ef {

void SolverOptions::validate() const {
    if (!(grad_tol > 0.0) || max_iters == 0 || memory == 0 || max_halvings == 0 || refresh_every == 0) {
        throw Error(ErrorCode::BadParameters, "solver tolerances and counts must be positive");
    }
    if (!(ls_shrink > 0.0 && ls_shrink < 1.0)) throw Error(ErrorCode::BadParameters, "ls_shrink must lie in (0,1)");
    if (!(ls_c1 > 0.0 && ls_c1 < 0.5)) throw Error(ErrorCode::BadParameters, "ls_c1 must lie in (0,1/2)");
    if (!(gap_floor >= 0.0)) throw Error(ErrorCode::BadParameters, "gap_floor must be nonnegative");
}

namespace {

struct Pair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho;
};

using Preconditioner = Eigen::LLT<Eigen::MatrixXd>;

// Two-loop recursion: returns -H g, with H0 = model^{-1} when available.
Eigen::VectorXd lbfgs_direction(const std::deque<Pair>& hist, const Eigen::VectorXd& g, const Preconditioner* model) {
    Eigen::VectorXd q = g;
    std::vector<double> a(hist.size());
    for (std::size_t k = hist.size(); k-- > 0;) {
        a[k] = hist[k].rho * hist[k].s.dot(q);
        q -= a[k] * hist[k].y;
    }
    if (model) {
        q = model->solve(q);
    } else if (!hist.empty()) {
        const auto& last = hist.back();
        q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t k = 0; k < hist.size(); ++k) {
        const double b = hist[k].rho * hist[k].y.dot(q);
        q += (a[k] - b) * hist[k].s;
    }
    return -q;
}

} // namespace

std::pair<DiscreteCurve, StepReport> minimize_step(const DiscreteCurve& prev, const EnergyParams& params,
                                                   const SolverOptions& opts) {
    params.validate();
    opts.validate();
    if (!(prev.gap() > opts.gap_floor)) {
        throw Error(ErrorCode::DegenerateGap, fmt::format("previous curve gap {} is not above the floor", prev.gap()));
    }
    const StepObjective obj(prev, params, opts.gap_floor);
    Eigen::VectorXd z = pack(to_reduced(prev));
    Eigen::VectorXd g;
    double f = obj.value_and_gradient(z, g);
    if (!std::isfinite(f)) throw Error(ErrorCode::CuspAngle, "previous curve is not in the objective's domain");

    StepReport rep;
    rep.f_initial = f;
    std::deque<Pair> hist;
    Eigen::VectorXd z_new(z.size());
    Eigen::VectorXd g_new(z.size());

    Preconditioner model;
    bool have_model = false;
    auto rebuild_model = [&] {
        if (!opts.precondition) return;
        model.compute(obj.model_hessian(z));
        have_model = model.info() == Eigen::Success;
        hist.clear();
    };

    std::size_t iter = 0;
    for (; iter < opts.max_iters; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
            rep.converged = true;
            break;
        }
        if (iter % opts.refresh_every == 0) rebuild_model();
        bool accepted = false;
        // Second attempt, if any, restarts from steepest descent.
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            if (attempt == 1) {
                if (hist.empty() && !have_model) break;
                hist.clear();
                have_model = false;
            }
            Eigen::VectorXd p = lbfgs_direction(hist, g, have_model ? &model : nullptr);
            double slope = g.dot(p);
            if (!(slope < 0.0)) {
                hist.clear();
                p = -g;
                slope = -g.squaredNorm();
            }
            double alpha = (hist.empty() && !have_model) ? std::min(1.0, 0.1 / p.lpNorm<Eigen::Infinity>()) : 1.0;
            const double noise = 64.0 * DBL_EPSILON * (1.0 + std::abs(f));
            for (std::size_t k = 0; k < opts.max_halvings; ++k, alpha *= opts.ls_shrink) {
                z_new = z + alpha * p;
                const double f_try = obj.value_and_gradient(z_new, g_new);
                if (!std::isfinite(f_try)) continue;
                const bool armijo = f_try <= f + opts.ls_c1 * alpha * slope && f_try < f;
                // Near stationarity the decrease drops below rounding noise;
                // fall back to the approximate-Wolfe slope test, under which a
                // quadratic model guarantees sufficient decrease.
                const bool approx = std::abs(f_try - f) <= noise &&
                                    g_new.dot(p) <= (1.0 - 2.0 * opts.ls_c1) * (-slope) && g_new.dot(p) >= slope;
                if (armijo || approx) {
                    const Eigen::VectorXd s = z_new - z;
                    const Eigen::VectorXd y = g_new - g;
                    const double sy = s.dot(y);
                    if (sy > 1e-12 * s.norm() * y.norm()) {
                        hist.push_back({s, y, 1.0 / sy});
                        if (hist.size() > opts.memory) hist.pop_front();
                    }
                    z.swap(z_new);
                    g.swap(g_new);
                    f = f_try;
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) {
            throw Error(ErrorCode::LineSearchFailure,
                        fmt::format("no descent after {} halvings at iteration {} (|grad|_inf = {:.3e})",
                                    opts.max_halvings, iter, g.lpNorm<Eigen::Infinity>()));
        }
    }
    if (!rep.converged && g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) rep.converged = true;

    rep.iterations = iter;
    rep.final_grad_norm = g.lpNorm<Eigen::Infinity>();
    if (f > rep.f_initial + 64.0 * DBL_EPSILON * (1.0 + std::abs(rep.f_initial))) {
        rep.f_final = rep.f_initial;
        return {prev, rep};
    }
    rep.f_final = f;
    return {from_reduced(unpack(z)), rep};
}

bool assert_cone_condition(const DiscreteCurve& next, const DiscreteCurve& prev) {
    if (next.size() != prev.size()) {
        throw Error(ErrorCode::MismatchedN, fmt::format("curves have {} and {} points", next.size(), prev.size()));
    }
    for (std::size_t i = 0; i + 1 < next.size(); ++i) {
        if ((next[i + 1] - next[i]).dot(prev[i + 1] - prev[i]) < 0.0) return false;
    }
    return true;
}

} // namespace ef
