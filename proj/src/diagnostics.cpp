#include "elasticflow/diagnostics.hpp"

#include "elasticflow/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace ef {

double fd_gradient_check(const ReducedCoords& rc, const DiscreteCurve& prev, const EnergyParams& params, double h) {
    const Eigen::VectorXd analytic = objective_gradient(rc, prev, params);
    const StepObjective obj(prev, params);
    const Eigen::VectorXd z = pack(rc);
    std::vector<long double> zl(z.data(), z.data() + z.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < zl.size(); ++k) {
        const long double step = static_cast<long double>(h) * std::max(1.0L, std::abs(zl[k]));
        const long double saved = zl[k];
        zl[k] = saved + step;
        const long double fp = obj.value<long double>(zl);
        zl[k] = saved - step;
        const long double fm = obj.value<long double>(zl);
        zl[k] = saved;
        const double fd = static_cast<double>((fp - fm) / (2.0L * step));
        const double an = analytic[static_cast<Eigen::Index>(k)];
        const double diff = std::abs(fd - an);
        const double err = std::abs(an) >= 1e-8 ? diff / std::abs(an) : diff;
        worst = std::max(worst, err);
    }
    return worst;
}

namespace {

const Snapshot& later(const Trajectory& traj, std::size_t n) {
    if (n + 1 >= traj.snapshots.size()) {
        throw Error(ErrorCode::IndexOutOfRange,
                    fmt::format("residuals need snapshots {} and {}, have {}", n, n + 1, traj.snapshots.size()));
    }
    if (traj.snapshots[n + 1].curve.size() < 5) throw Error(ErrorCode::TooFewPoints, "residuals need N >= 5");
    return traj.snapshots[n + 1];
}

// Trapezoid L2 norm of samples with uniform spacing h.
double trapezoid_l2(const std::vector<double>& r, double h) {
    double sum = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double w = (k == 0 || k + 1 == r.size()) ? 0.5 : 1.0;
        sum += w * h * r[k] * r[k];
    }
    return std::sqrt(sum);
}

} // namespace

ResidualReport interior_residual(const Trajectory& traj, std::size_t n, const EnergyParams& params) {
    const DiscreteCurve& cur = later(traj, n).curve;
    const VelocityField vel = velocity(traj, n);
    const std::size_t np = cur.size();
    const auto kappa = discrete_curvature(cur); // kappa[i-1] belongs to vertex i
    const double h = 1.0 / static_cast<double>(np - 1);
    const double len = cur.total_length();
    const double eps = params.epsilon;

    std::vector<double> r;
    r.reserve(np - 4);
    ResidualReport rep;
    rep.step_index = n;
    for (std::size_t i = 2; i + 2 < np; ++i) {
        const double k = kappa[i - 1];
        const double kss = (kappa[i] - 2.0 * k + kappa[i - 2]) / (h * h);
        const double res = vel.normal[i] - k + eps * (kss / (len * len) + 0.5 * k * k * k);
        r.push_back(res);
        rep.interior_max = std::max(rep.interior_max, std::abs(res));
    }
    rep.interior_L2 = trapezoid_l2(r, h);
    return rep;
}

ResidualReport boundary_residual(const Trajectory& traj, std::size_t n, const EnergyParams& params) {
    const DiscreteCurve& cur = later(traj, n).curve;
    const VelocityField vel = velocity(traj, n);
    const std::size_t np = cur.size();
    const auto kappa = discrete_curvature(cur);
    const auto frame = edge_frame(cur);
    const double h = 1.0 / static_cast<double>(np - 1);
    const double len = cur.total_length();
    const double eps = params.epsilon;
    const std::size_t nk = kappa.size();

    // Second-order one-sided derivatives at s = 0 and s = 1 from the three
    // nearest interior vertices (s = h, 2h, 3h and mirrored).
    const double ks0 = (-2.5 * kappa[0] + 4.0 * kappa[1] - 1.5 * kappa[2]) / h;
    const double ks1 = (2.5 * kappa[nk - 1] - 4.0 * kappa[nk - 2] + 1.5 * kappa[nk - 3]) / h;

    const Vec2 chord = cur.back() - cur.front();
    const Vec2 coulomb = chord / chord.squaredNorm();
    const Vec2 predicted0 = -coulomb + frame.tangents.front() - (eps / len) * ks0 * frame.normals.front();
    const Vec2 predicted1 = coulomb - frame.tangents.back() + (eps / len) * ks1 * frame.normals.back();

    ResidualReport rep;
    rep.step_index = n;
    rep.boundary_start = vel.velocity.front() - predicted0;
    rep.boundary_end = vel.velocity.back() - predicted1;
    rep.kappa_boundary = {std::abs(kappa.front()), std::abs(kappa.back())};
    return rep;
}

ResidualReport residual_report(const Trajectory& traj, std::size_t n) {
    ResidualReport rep = interior_residual(traj, n, traj.params);
    const ResidualReport b = boundary_residual(traj, n, traj.params);
    rep.boundary_start = b.boundary_start;
    rep.boundary_end = b.boundary_end;
    rep.kappa_boundary = b.kappa_boundary;
    rep.coupling_L2 = coupling_residual(traj, n).l2;
    return rep;
}

std::vector<std::pair<std::size_t, std::size_t>> crossing_edges(const DiscreteCurve& curve) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const std::size_t m = curve.size() - 1;
    const double tol = 1e-12 * std::max(curve.edge_len() * curve.edge_len(), 1e-300);
    auto orient = [&](const Vec2& a, const Vec2& b, const Vec2& c) {
        const double o = cross(b - a, c - a);
        return std::abs(o) <= tol ? 0 : (o > 0 ? 1 : -1);
    };
    for (std::size_t a = 0; a < m; ++a) {
        const Vec2& p = curve[a];
        const Vec2& q = curve[a + 1];
        for (std::size_t b = a + 2; b < m; ++b) {
            const Vec2& r = curve[b];
            const Vec2& s = curve[b + 1];
            const int o1 = orient(p, q, r);
            const int o2 = orient(p, q, s);
            const int o3 = orient(r, s, p);
            const int o4 = orient(r, s, q);
            if (o1 * o2 < 0 && o3 * o4 < 0) out.emplace_back(a, b);
        }
    }
    return out;
}

std::size_t self_intersections(const DiscreteCurve& curve) { return crossing_edges(curve).size(); }

std::optional<double> loop_diameter(const DiscreteCurve& curve) {
    const auto pairs = crossing_edges(curve);
    if (pairs.empty()) return std::nullopt;
    const auto [a, b] = pairs.front();
    double diam = 0.0;
    for (std::size_t i = a + 1; i <= b; ++i) {
        for (std::size_t j = i + 1; j <= b; ++j) diam = std::max(diam, (curve[i] - curve[j]).norm());
    }
    return diam;
}

double chord_deviation(const DiscreteCurve& curve) {
    const Vec2 a = curve.front();
    const Vec2 d = curve.back() - a;
    const double dd = d.squaredNorm();
    double worst = 0.0;
    for (const auto& p : curve.points()) {
        const double t = dd > 0.0 ? std::clamp((p - a).dot(d) / dd, 0.0, 1.0) : 0.0;
        worst = std::max(worst, (p - (a + t * d)).norm());
    }
    return worst;
}

} // namespace ef
