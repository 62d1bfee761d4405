#pragma once

#include "elasticflow/geometry.hpp"

#include <cmath>
#include <random>

namespace testing {

using ef::DiscreteCurve;
using ef::Points;
using ef::ReducedCoords;
using ef::Vec2;

// Equal-edge curve from random headings; reject when the chord is short.
inline DiscreteCurve random_curve(std::mt19937_64& rng, std::size_t n, double max_turn = 0.6) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        ReducedCoords rc;
        rc.base = Vec2(2.0 * u(rng), 2.0 * u(rng));
        rc.edge_len = 0.1 + 0.05 * (u(rng) + 1.0);
        double h = 3.0 * u(rng);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            rc.headings.push_back(h);
            h += max_turn * u(rng);
        }
        DiscreteCurve c = ef::from_reduced(rc);
        if (c.gap() > 0.25 * c.total_length()) return c;
    }
}

// Small perturbation in every reduced coordinate.
inline DiscreteCurve nudge(std::mt19937_64& rng, const DiscreteCurve& c, double scale = 0.03) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ReducedCoords rc = ef::to_reduced(c);
    rc.base += scale * Vec2(u(rng), u(rng));
    rc.edge_len *= 1.0 + scale * u(rng);
    for (auto& h : rc.headings) h += scale * u(rng);
    return ef::from_reduced(rc);
}

// Segment intersection by parametric solve, independent of the library's
// orientation predicate. Proper crossings only.
inline bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const Vec2 r = b - a, s = d - c;
    const double den = r.x() * s.y() - r.y() * s.x();
    if (std::abs(den) < 1e-14) return false;
    const Vec2 q = c - a;
    const double t = (q.x() * s.y() - q.y() * s.x()) / den;
    const double u = (q.x() * r.y() - q.y() * r.x()) / den;
    const double eps = 1e-12;
    return t > eps && t < 1 - eps && u > eps && u < 1 - eps;
}

inline std::size_t brute_force_crossings(const Points& p) {
    std::size_t count = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        for (std::size_t j = i + 2; j + 1 < p.size(); ++j) {
            if (segments_cross(p[i], p[i + 1], p[j], p[j + 1])) ++count;
        }
    }
    return count;
}

// One implicit step of the straight-segment problem in the length variable:
// argmin_L  L - log L + (L - L_prev)^2 / (4 tau), found as the root of the
// derivative 1 - 1/L + (L - L_prev)/(2 tau) by bisection (strictly increasing).
inline double segment_oracle_step(double l_prev_total, double tau) {
    auto d = [&](double L) { return 1.0 - 1.0 / L + (L - l_prev_total) / (2.0 * tau); };
    double lo = 1e-9, hi = std::max(2.0, 2.0 * l_prev_total);
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (d(mid) > 0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

inline Points straight(std::size_t n, double length, Vec2 origin = Vec2::Zero(), double angle = 0.0) {
    Points p(n);
    const Vec2 dir(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; ++i) p[i] = origin + (length * static_cast<double>(i) / static_cast<double>(n - 1)) * dir;
    return p;
}

} // namespace testing
