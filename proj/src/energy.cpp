#include "elasticflow/energy.hpp"

#include "elasticflow/error.hpp"

#include <fmt/format.h>

namespace ef {

void EnergyParams::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw Error(ErrorCode::BadParameters, fmt::format("epsilon must be positive, got {}", epsilon));
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw Error(ErrorCode::BadParameters, fmt::format("tau must be positive, got {}", tau));
    }
}

EnergyBreakdown energy(const DiscreteCurve& curve, const EnergyParams& params) {
    const double gap = curve.gap();
    if (!(gap > 0.0)) throw Error(ErrorCode::DegenerateGap, "energy undefined for coincident endpoints");
    const auto m = measures(curve);
    EnergyBreakdown e;
    e.length_term = m.total_length;
    e.bending_term = 0.5 * params.epsilon * curve.edge_len() * m.bending_sum;
    e.coulomb_term = -std::log(gap);
    e.total = e.length_term + e.bending_term + e.coulomb_term;
    return e;
}

double dissipation(const DiscreteCurve& curve, const DiscreteCurve& prev) {
    if (curve.size() != prev.size()) {
        throw Error(ErrorCode::MismatchedN, fmt::format("curves have {} and {} points", curve.size(), prev.size()));
    }
    const auto cur_frame = edge_frame(curve);
    const auto prev_frame = edge_frame(prev);
    double sum_prev = 0.0;
    double sum_cur = 0.0;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const Vec2 d = curve[i] - prev[i];
        const double a = d.dot(prev_frame.normals[i]);
        const double b = d.dot(cur_frame.normals[i]);
        sum_prev += a * a;
        sum_cur += b * b;
    }
    return 0.25 * prev.edge_len() * sum_prev + 0.25 * curve.edge_len() * sum_cur +
           0.5 * (curve.front() - prev.front()).squaredNorm() + 0.5 * (curve.back() - prev.back()).squaredNorm();
}

Eigen::VectorXd pack(const ReducedCoords& rc) {
    Eigen::VectorXd z(static_cast<Eigen::Index>(kHeadingOffset + rc.headings.size()));
    z[0] = rc.base.x();
    z[1] = rc.base.y();
    z[2] = rc.edge_len;
    for (std::size_t i = 0; i < rc.headings.size(); ++i) z[static_cast<Eigen::Index>(kHeadingOffset + i)] = rc.headings[i];
    return z;
}

ReducedCoords unpack(const Eigen::VectorXd& z) {
    ReducedCoords rc;
    rc.base = Vec2(z[0], z[1]);
    rc.edge_len = z[2];
    rc.headings.assign(z.data() + kHeadingOffset, z.data() + z.size());
    return rc;
}

StepObjective::StepObjective(const DiscreteCurve& prev, const EnergyParams& params, double gap_floor)
    : prev_(prev), params_(params), gap_floor_(gap_floor) {
    if (prev_.size() < 2) throw Error(ErrorCode::TooFewPoints, "objective needs at least 2 points");
    if (!(params_.tau > 0.0)) throw Error(ErrorCode::BadParameters, "tau must be positive");
    prev_normals_ = edge_frame(prev_).normals;
    x_.resize(prev_.size());
    g_.resize(prev_.size());
}

double StepObjective::value_and_gradient(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const {
    const std::size_t n = prev_.size();
    const std::size_t m = n - 1;
    const double l = z[2];
    if (!(l > 0.0)) return std::numeric_limits<double>::infinity();
    const double eps = params_.epsilon;
    const double inv_tau = 1.0 / params_.tau;
    const double lp = prev_.edge_len();

    const double* h = z.data() + kHeadingOffset;
    x_[0] = Vec2(z[0], z[1]);
    for (std::size_t i = 0; i < m; ++i) x_[i + 1] = x_[i] + l * Vec2(std::cos(h[i]), std::sin(h[i]));

    const Vec2 chord = x_[m] - x_[0];
    const double gap2 = chord.squaredNorm();
    const double gap = std::sqrt(gap2);
    if (!(gap > gap_floor_) || !(gap > 0.0)) return std::numeric_limits<double>::infinity();

    grad.setZero(static_cast<Eigen::Index>(kHeadingOffset + m));
    double bend = 0.0;
    double diss_prev = 0.0;
    double diss_cur = 0.0;
    for (std::size_t i = 0; i < n; ++i) g_[i].setZero();

    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 u(std::cos(h[i]), std::sin(h[i]));
        const Vec2 nu = rot90(u);
        const Vec2 d = x_[i] - prev_[i];
        const double pn = d.dot(prev_normals_[i]);
        const double cn = d.dot(nu);
        diss_prev += pn * pn;
        diss_cur += cn * cn;
        g_[i] += inv_tau * (0.5 * lp * pn * prev_normals_[i] + 0.5 * l * cn * nu);
        grad[static_cast<Eigen::Index>(kHeadingOffset + i)] -= 0.5 * l * inv_tau * cn * d.dot(u);
        if (i > 0) {
            const Vec2 up(std::cos(h[i - 1]), std::sin(h[i - 1]));
            const double denom = 1.0 + up.dot(u);
            if (!(denom >= kCuspTol)) return std::numeric_limits<double>::infinity();
            const double t = cross(up, u) / denom;
            bend += t * t;
            const double dt = 2.0 * eps / l * t * (1.0 + t * t);
            grad[static_cast<Eigen::Index>(kHeadingOffset + i)] += dt;
            grad[static_cast<Eigen::Index>(kHeadingOffset + i - 1)] -= dt;
        }
    }
    const Vec2 d0 = x_[0] - prev_.front();
    const Vec2 dn = x_[m] - prev_.back();
    g_[0] += inv_tau * d0 + chord / gap2;
    g_[m] += inv_tau * dn - chord / gap2;

    grad[2] += static_cast<double>(m) - 2.0 * eps / (l * l) * bend + 0.25 * inv_tau * diss_cur;

    // Chain rule through x_i = base + l sum_{j<i} u_j via suffix sums of g.
    Vec2 suffix = g_[m];
    for (std::size_t j = m; j-- > 0;) {
        const Vec2 u(std::cos(h[j]), std::sin(h[j]));
        grad[static_cast<Eigen::Index>(kHeadingOffset + j)] += l * suffix.dot(rot90(u));
        grad[2] += suffix.dot(u);
        suffix += g_[j];
    }
    grad[0] = suffix.x();
    grad[1] = suffix.y();

    const double diss = 0.25 * lp * diss_prev + 0.25 * l * diss_cur + 0.5 * (d0.squaredNorm() + dn.squaredNorm());
    return static_cast<double>(m) * l + 2.0 * eps / l * bend - std::log(gap) + inv_tau * diss;
}

Eigen::MatrixXd StepObjective::model_hessian(const Eigen::VectorXd& z) const {
    const std::size_t n = prev_.size();
    const std::size_t m = n - 1;
    const auto dim = static_cast<Eigen::Index>(kHeadingOffset + m);
    const double l = z[2];
    const double inv_tau = 1.0 / params_.tau;
    const double* h = z.data() + kHeadingOffset;

    // Rows of the Jacobian of the squared residuals, pre-scaled by sqrt(weight).
    // Point i depends on base, on l through sum_{j<i} u_j and on h_j (j<i) through l nu_j.
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * m + 5), dim);
    Eigen::Index r = 0;
    Vec2 usum = Vec2::Zero();
    Points nus(m);
    for (std::size_t j = 0; j < m; ++j) nus[j] = rot90(Vec2(std::cos(h[j]), std::sin(h[j])));

    auto point_row = [&](std::size_t i, const Vec2& dir, const Vec2& usum_i, double w) {
        rows(r, 0) = w * dir.x();
        rows(r, 1) = w * dir.y();
        rows(r, 2) = w * usum_i.dot(dir);
        for (std::size_t j = 0; j < i; ++j) rows(r, static_cast<Eigen::Index>(kHeadingOffset + j)) = w * l * nus[j].dot(dir);
        ++r;
    };
    const double wp = std::sqrt(0.5 * prev_.edge_len() * inv_tau);
    const double wc = std::sqrt(0.5 * l * inv_tau);
    for (std::size_t i = 0; i < m; ++i) {
        point_row(i, prev_normals_[i], usum, wp);
        point_row(i, nus[i], usum, wc);
        usum += Vec2(std::cos(h[i]), std::sin(h[i]));
    }
    const double we = std::sqrt(inv_tau);
    point_row(0, Vec2::UnitX(), Vec2::Zero(), we);
    point_row(0, Vec2::UnitY(), Vec2::Zero(), we);
    point_row(m, Vec2::UnitX(), usum, we);
    point_row(m, Vec2::UnitY(), usum, we);

    // Coulomb term along the chord: d^2(-log|c|) has eigenvalue +1/|c|^2 there.
    Vec2 chord = Vec2::Zero();
    for (std::size_t j = 0; j < m; ++j) chord += l * Vec2(std::cos(h[j]), std::sin(h[j]));
    const double gap = chord.norm();
    if (gap > 0.0) {
        const Vec2 dir = chord / gap;
        const double w = 1.0 / gap;
        rows(r, 2) = w * usum.dot(dir);
        for (std::size_t j = 0; j < m; ++j) rows(r, static_cast<Eigen::Index>(kHeadingOffset + j)) = w * l * nus[j].dot(dir);
        ++r;
    }

    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
    hess.selfadjointView<Eigen::Lower>().rankUpdate(rows.topRows(r).transpose());

    // Bending: (2 eps / l) sum f(h_k - h_{k-1}), f = tan^2(./2), f'' = (1+t^2)(1+3t^2)/2.
    const double eps = params_.epsilon;
    double fsum = 0.0;
    for (std::size_t k = 1; k < m; ++k) {
        const double t = std::tan(0.5 * (h[k] - h[k - 1]));
        fsum += t * t;
        const double c = 2.0 * eps / l * 0.5 * (1.0 + t * t) * (1.0 + 3.0 * t * t);
        const auto a = static_cast<Eigen::Index>(kHeadingOffset + k - 1);
        hess(a, a) += c;
        hess(a + 1, a + 1) += c;
        hess(a + 1, a) -= c;
    }
    hess(2, 2) += 4.0 * eps * fsum / (l * l * l);
    hess = hess.selfadjointView<Eigen::Lower>();
    const double ridge = 1e-12 * std::max(hess.diagonal().maxCoeff(), 1e-300);
    hess.diagonal().array() += ridge;
    return hess;
}

namespace {

void check_same_size(const ReducedCoords& rc, const DiscreteCurve& prev) {
    if (rc.point_count() != prev.size()) {
        throw Error(ErrorCode::MismatchedN, fmt::format("candidate has {} points, previous curve {}", rc.point_count(),
                                                        prev.size()));
    }
}

} // namespace

double objective(const ReducedCoords& rc, const DiscreteCurve& prev, const EnergyParams& params) {
    check_same_size(rc, prev);
    const DiscreteCurve cur = from_reduced(rc);
    return energy(cur, params).total + dissipation(cur, prev) / params.tau;
}

Eigen::VectorXd objective_gradient(const ReducedCoords& rc, const DiscreteCurve& prev, const EnergyParams& params) {
    check_same_size(rc, prev);
    const DiscreteCurve cur = from_reduced(rc);
    if (!(cur.gap() > 0.0)) throw Error(ErrorCode::DegenerateGap, "gradient undefined for coincident endpoints");
    if (!(rc.edge_len > 0.0)) throw Error(ErrorCode::ZeroEdgeLength, "gradient undefined for zero edge length");
    const StepObjective obj(prev, params);
    Eigen::VectorXd grad;
    const double f = obj.value_and_gradient(pack(rc), grad);
    if (!std::isfinite(f)) throw Error(ErrorCode::CuspAngle, "gradient undefined at a cusp");
    return grad;
}

} // namespace ef
