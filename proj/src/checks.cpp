#include "elasticflow/diagnostics.hpp"
#include "elasticflow/energy.hpp"
#include "elasticflow/scenario.hpp"

#include <Eigen/Geometry>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace ef {

namespace {

// Random equal-edge curve with moderate turning and a well-separated chord.
DiscreteCurve random_curve(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        ReducedCoords rc;
        rc.base = Vec2(u(rng), u(rng));
        rc.edge_len = 0.05 + 0.1 * (u(rng) + 1.0);
        double h = 3.0 * u(rng);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            rc.headings.push_back(h);
            h += 0.6 * u(rng);
        }
        DiscreteCurve c = from_reduced(rc);
        if (c.gap() > 0.2 * c.total_length()) return c;
    }
}

DiscreteCurve perturbed(std::mt19937_64& rng, const DiscreteCurve& c) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ReducedCoords rc = to_reduced(c);
    rc.base += 0.02 * Vec2(u(rng), u(rng));
    rc.edge_len *= 1.0 + 0.05 * u(rng);
    for (auto& h : rc.headings) h += 0.05 * u(rng);
    return from_reduced(rc);
}

CheckResult check_scenarios() {
    for (const auto& p : presets()) {
        const DiscreteCurve c = make_scenario(p.scenario);
        if (!c.admissible()) return {"scenarios admissible", false, fmt::format("{} has coincident endpoints", p.name)};
    }
    return {"scenarios admissible", true, fmt::format("{} presets", presets().size())};
}

CheckResult check_gradient(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(5, 40);
    double worst = 0.0;
    for (int k = 0; k < 25; ++k) {
        const DiscreteCurve prev = random_curve(rng, pick(rng));
        const DiscreteCurve cur = perturbed(rng, prev);
        worst = std::max(worst, fd_gradient_check(to_reduced(cur), prev, {0.05, 0.1}));
    }
    return {"gradient matches finite differences", worst < 1e-6, fmt::format("max rel err {:.2e}", worst)};
}

CheckResult check_dissipation(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(3, 30);
    double worst = 0.0;
    double most_negative = 0.0;
    for (int k = 0; k < 200; ++k) {
        const DiscreteCurve a = random_curve(rng, pick(rng));
        const DiscreteCurve b = perturbed(rng, a);
        const double dab = dissipation(a, b);
        const double dba = dissipation(b, a);
        worst = std::max(worst, std::abs(dab - dba) / std::max(1e-300, std::abs(dab)));
        most_negative = std::min(most_negative, std::min(dab, dba));
    }
    const bool ok = worst < 1e-12 && most_negative >= 0.0;
    return {"dissipation symmetric and nonnegative", ok,
            fmt::format("max asymmetry {:.2e}, min {:.2e}", worst, most_negative)};
}

CheckResult check_energy_invariance(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(3, 30);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const EnergyParams params{0.05, 0.1};
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const DiscreteCurve c = random_curve(rng, pick(rng));
        const double e = energy(c, params).total;
        const double a = 3.0 * u(rng);
        const Eigen::Rotation2Dd rot(a);
        const Vec2 shift(u(rng), u(rng));
        Points moved;
        for (const auto& p : c.points()) moved.push_back(rot * p + shift);
        const double e_moved = energy(DiscreteCurve::from_trusted(moved, c.edge_len()), params).total;
        const double e_rev = energy(c.reversed(), params).total;
        worst = std::max({worst, std::abs(e_moved - e), std::abs(e_rev - e)});
    }
    return {"energy invariant under rigid motion and reversal", worst < 1e-9,
            fmt::format("max deviation {:.2e}", worst)};
}

CheckResult check_preset_flow(const Preset& p) {
    const std::string name = fmt::format("preset {} flow bounds", p.name);
    try {
        const Trajectory traj = run_flow(make_scenario(p.scenario), p.config);
        const StepRecord& last = traj.steps.back();
        return {name, true,
                fmt::format("{} steps, E {:.6f} -> {:.6f}, length {:.6f}, {} crossings", last.step,
                            traj.initial_energy(), last.energy, last.length,
                            self_intersections(traj.final_curve()))};
    } catch (const Error& e) {
        return {name, false, e.what()};
    }
}

} // namespace

std::vector<CheckResult> run_checks() {
    std::mt19937_64 rng(20240611);
    std::vector<CheckResult> out;
    out.push_back(check_scenarios());
    out.push_back(check_gradient(rng));
    out.push_back(check_dissipation(rng));
    out.push_back(check_energy_invariance(rng));
    for (const auto& p : presets()) out.push_back(check_preset_flow(p));
    return out;
}

} // namespace ef
