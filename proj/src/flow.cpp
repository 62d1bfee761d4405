#include "elasticflow/flow.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace ef {

void FlowConfig::validate() const {
    params.validate();
    solver.validate();
    if (!n_steps && !stop_tol) throw Error(ErrorCode::BadParameters, "set n_steps, stop_tol or both");
    if (stop_tol && !(*stop_tol > 0.0)) throw Error(ErrorCode::BadParameters, "stop_tol must be positive");
    if (snapshot_every == 0) throw Error(ErrorCode::BadParameters, "snapshot_every must be positive");
    if (!(monotone_tol >= 0.0)) throw Error(ErrorCode::BadParameters, "monotone_tol must be nonnegative");
}

std::optional<std::size_t> Trajectory::snapshot_of_step(std::size_t step) const {
    const auto it = std::lower_bound(snapshots.begin(), snapshots.end(), step,
                                     [](const Snapshot& s, std::size_t k) { return s.step < k; });
    if (it == snapshots.end() || it->step != step) return std::nullopt;
    return static_cast<std::size_t>(it - snapshots.begin());
}

namespace {

// Index of the first snapshot with time >= t (clamped).
std::size_t upper_snapshot(const Trajectory& traj, double t) {
    const auto it = std::lower_bound(traj.snapshots.begin(), traj.snapshots.end(), t,
                                     [](const Snapshot& s, double tt) { return s.time < tt; });
    if (it == traj.snapshots.end()) return traj.snapshots.size() - 1;
    return static_cast<std::size_t>(it - traj.snapshots.begin());
}

double affine_weight(const Snapshot& a, const Snapshot& b, double t) {
    if (b.time <= a.time) return 1.0;
    return std::clamp((t - a.time) / (b.time - a.time), 0.0, 1.0);
}

} // namespace

Points Trajectory::constant_at(double t) const { return snapshots[upper_snapshot(*this, t)].curve.points(); }

double Trajectory::length_constant_at(double t) const {
    return snapshots[upper_snapshot(*this, t)].curve.total_length();
}

Points Trajectory::affine_at(double t) const {
    const std::size_t hi = upper_snapshot(*this, t);
    if (hi == 0) return snapshots.front().curve.points();
    const auto& a = snapshots[hi - 1];
    const auto& b = snapshots[hi];
    const double w = affine_weight(a, b, t);
    Points out(a.curve.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * a.curve[i] + w * b.curve[i];
    return out;
}

double Trajectory::length_affine_at(double t) const {
    const std::size_t hi = upper_snapshot(*this, t);
    if (hi == 0) return snapshots.front().curve.total_length();
    const auto& a = snapshots[hi - 1];
    const auto& b = snapshots[hi];
    const double w = affine_weight(a, b, t);
    return (1.0 - w) * a.curve.total_length() + w * b.curve.total_length();
}

namespace {

StepRecord describe(const DiscreteCurve& c, const EnergyParams& params) {
    StepRecord r;
    const auto e = energy(c, params);
    r.energy = e.total;
    r.length = c.total_length();
    r.gap = c.gap();
    r.edge_len = c.edge_len();
    r.bending = e.bending_term;
    return r;
}

} // namespace

Trajectory run_flow(const DiscreteCurve& initial, const FlowConfig& cfg, const StepObserver& observer) {
    cfg.validate();
    if (!initial.admissible()) throw Error(ErrorCode::DegenerateGap, "initial curve has coincident endpoints");

    auto traj = std::make_shared<Trajectory>();
    traj->params = cfg.params;
    StepRecord first = describe(initial, cfg.params);
    traj->steps.push_back(first);
    traj->snapshots.push_back({0, 0.0, initial});

    const double e0 = first.energy;
    const double slack = cfg.monotone_tol * (1.0 + std::abs(e0));
    const double tau = cfg.params.tau;
    const double n_minus_1 = static_cast<double>(initial.size() - 1);
    double dissipated = 0.0;

    DiscreteCurve cur = initial;
    std::size_t step = 0;
    auto fail = [&](const std::string& what) {
        throw FlowError(ErrorCode::BoundViolation,
                        fmt::format("step {} (t = {}): {}; E_0 = {:.17g}", step, traj->steps.back().time, what, e0),
                        traj);
    };

    for (;;) {
        if (cfg.n_steps && step >= *cfg.n_steps) {
            traj->termination = "n_steps";
            break;
        }
        auto [next, report] = minimize_step(cur, cfg.params, cfg.solver);
        ++step;

        StepRecord rec = describe(next, cfg.params);
        rec.step = step;
        rec.time = static_cast<double>(step) * tau;
        rec.solver = report;
        rec.dissipation_rate = dissipation(next, cur) / tau;
        rec.cone_ok = assert_cone_condition(next, cur);
        double vmax = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) vmax = std::max(vmax, (next[i] - cur[i]).norm());
        rec.max_speed = vmax / tau;
        dissipated += rec.dissipation_rate;

        const double e_prev = traj->steps.back().energy;
        traj->steps.push_back(rec);

        const bool stop = cfg.stop_tol && rec.max_speed < *cfg.stop_tol;
        const bool keep = (step % cfg.snapshot_every == 0) || stop ||
                          (cfg.n_steps && step == *cfg.n_steps);
        if (keep) traj->snapshots.push_back({step, rec.time, next});

        if (rec.energy > e_prev + slack) fail(fmt::format("energy increased from {:.17g} to {:.17g}", e_prev, rec.energy));
        if (rec.energy + rec.dissipation_rate > e_prev + slack) {
            fail(fmt::format("comparison bound E + D/tau = {:.17g} exceeds previous energy {:.17g}",
                             rec.energy + rec.dissipation_rate, e_prev));
        }
        if (rec.gap < cfg.solver.gap_floor) fail(fmt::format("gap {:.3e} below floor", rec.gap));
        if (rec.gap > rec.length * (1.0 + 1e-12)) fail(fmt::format("gap {} exceeds length {}", rec.gap, rec.length));
        if (n_minus_1 * rec.edge_len > 2.0 * (e0 + 1.0)) {
            fail(fmt::format("length {} exceeds 2 (E_0 + 1)", rec.length));
        }
        if (rec.bending > e0 + slack) fail(fmt::format("bending energy {} exceeds E_0", rec.bending));
        if (dissipated > e0 + 1e-8) fail(fmt::format("accumulated dissipation {} exceeds E_0", dissipated));
        if (!rec.cone_ok) fail("tangent cone condition violated (tau too large for this configuration)");

        cur = std::move(next);
        if (observer && !observer(rec, cur)) {
            if (!keep) traj->snapshots.push_back({step, rec.time, cur});
            traj->termination = "observer";
            break;
        }
        if (stop) {
            traj->termination = "stop_tol";
            break;
        }
    }
    return std::move(*traj);
}

VelocityField velocity(const Trajectory& traj, std::size_t n) {
    if (n + 1 >= traj.snapshots.size()) {
        throw Error(ErrorCode::IndexOutOfRange,
                    fmt::format("velocity needs snapshots {} and {}, have {}", n, n + 1, traj.snapshots.size()));
    }
    const auto& a = traj.snapshots[n];
    const auto& b = traj.snapshots[n + 1];
    const double dt = b.time - a.time;
    VelocityField v;
    v.vertex_tangent = vertex_tangents(b.curve);
    const std::size_t np = b.curve.size();
    v.velocity.resize(np);
    v.tangential.resize(np);
    v.normal.resize(np);
    for (std::size_t i = 0; i < np; ++i) {
        v.velocity[i] = (b.curve[i] - a.curve[i]) / dt;
        v.tangential[i] = v.velocity[i].dot(v.vertex_tangent[i]);
        v.normal[i] = v.velocity[i].dot(rot90(v.vertex_tangent[i]));
    }
    return v;
}

CouplingResidual coupling_residual(const Trajectory& traj, std::size_t n) {
    const VelocityField vel = velocity(traj, n);
    const DiscreteCurve& prev = traj.snapshots[n].curve;
    const DiscreteCurve& cur = traj.snapshots[n + 1].curve;
    const std::size_t np = cur.size();
    if (np < 3) throw Error(ErrorCode::TooFewPoints, "coupling residual needs at least 3 points");
    const double dt = traj.snapshots[n + 1].time - traj.snapshots[n].time;
    const double h = 1.0 / static_cast<double>(np - 1);
    const double lp = prev.total_length();
    const double lc = cur.total_length();

    // <V, g~_s + g_s> on edges, V averaged to the edge midpoint.
    std::vector<double> q(np - 1);
    for (std::size_t e = 0; e + 1 < np; ++e) {
        const Vec2 mu = ((cur[e + 1] - cur[e]) + (prev[e + 1] - prev[e])) / h;
        q[e] = (0.5 * (vel.velocity[e] + vel.velocity[e + 1])).dot(mu);
    }
    const auto kc = discrete_curvature(cur);
    const auto kp = discrete_curvature(prev);
    const auto tp = vertex_tangents(prev);
    const double length_rate = (lc * lc - lp * lp) / dt;

    CouplingResidual out;
    out.per_vertex.resize(np - 2);
    for (std::size_t i = 1; i + 1 < np; ++i) {
        const double dq = (q[i] - q[i - 1]) / h;
        const Vec2 bend = lp * lp * kp[i - 1] * rot90(tp[i]) + lc * lc * kc[i - 1] * rot90(vel.vertex_tangent[i]);
        out.per_vertex[i - 1] = dq - length_rate - vel.velocity[i].dot(bend);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < out.per_vertex.size(); ++k) {
        const double r = out.per_vertex[k];
        out.max = std::max(out.max, std::abs(r));
        const double w = (k == 0 || k + 1 == out.per_vertex.size()) ? 0.5 : 1.0;
        sum += w * h * r * r;
    }
    out.l2 = std::sqrt(sum);
    return out;
}

} // namespace ef
