#include "elasticflow/geometry.hpp"

#include "elasticflow/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ef {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::UnequalEdges: return "UnequalEdges";
    case ErrorCode::DegenerateGap: return "DegenerateGap";
    case ErrorCode::ZeroEdgeLength: return "ZeroEdgeLength";
    case ErrorCode::CuspAngle: return "CuspAngle";
    case ErrorCode::ZeroLengthInput: return "ZeroLengthInput";
    case ErrorCode::MismatchedN: return "MismatchedN";
    case ErrorCode::LineSearchFailure: return "LineSearchFailure";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::BoundViolation: return "BoundViolation";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::BadParameters: return "BadParameters";
    case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

DiscreteCurve DiscreteCurve::validate(Points points, double rel_tol) {
    if (points.size() < 2) {
        throw Error(ErrorCode::TooFewPoints, fmt::format("need at least 2 points, got {}", points.size()));
    }
    for (const auto& p : points) {
        if (!p.allFinite()) throw Error(ErrorCode::BadParameters, "non-finite coordinate");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const double e = (points[i + 1] - points[i]).norm();
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        sum += e;
    }
    const double mean = sum / static_cast<double>(points.size() - 1);
    if (hi - lo > rel_tol * mean) {
        throw Error(ErrorCode::UnequalEdges,
                    fmt::format("edge lengths range over [{}, {}], relative spread {:.3e}", lo, hi,
                                mean > 0 ? (hi - lo) / mean : INFINITY));
    }
    DiscreteCurve curve(std::move(points), mean);
    if (!(curve.gap() > 0.0)) {
        throw Error(ErrorCode::DegenerateGap, "first and last point coincide");
    }
    return curve;
}

DiscreteCurve DiscreteCurve::from_trusted(Points points, double edge_len) {
    if (points.size() < 2) {
        throw Error(ErrorCode::TooFewPoints, fmt::format("need at least 2 points, got {}", points.size()));
    }
    if (!(edge_len >= 0.0)) throw Error(ErrorCode::BadParameters, "negative edge length");
    return DiscreteCurve(std::move(points), edge_len);
}

DiscreteCurve DiscreteCurve::reversed() const {
    Points rev(points_.rbegin(), points_.rend());
    return DiscreteCurve(std::move(rev), edge_len_);
}

ReducedCoords to_reduced(const DiscreteCurve& curve) {
    if (!(curve.edge_len() > 0.0)) throw Error(ErrorCode::ZeroEdgeLength, "cannot take headings of a point curve");
    ReducedCoords rc;
    rc.base = curve.front();
    rc.edge_len = curve.edge_len();
    rc.headings.resize(curve.size() - 1);
    double prev = 0.0;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const Vec2 d = curve[i + 1] - curve[i];
        double h = std::atan2(d.y(), d.x());
        if (i > 0) {
            // Unwrap so consecutive headings differ by at most pi.
            h += 2.0 * std::numbers::pi * std::round((prev - h) / (2.0 * std::numbers::pi));
        }
        rc.headings[i] = h;
        prev = h;
    }
    return rc;
}

void reconstruct_points(const ReducedCoords& rc, std::span<Vec2> out) {
    out[0] = rc.base;
    for (std::size_t i = 0; i < rc.headings.size(); ++i) {
        out[i + 1] = out[i] + rc.edge_len * Vec2(std::cos(rc.headings[i]), std::sin(rc.headings[i]));
    }
}

DiscreteCurve from_reduced(const ReducedCoords& rc) {
    Points pts(rc.point_count());
    reconstruct_points(rc, pts);
    return DiscreteCurve::from_trusted(std::move(pts), rc.edge_len);
}

EdgeFrame edge_frame(const DiscreteCurve& curve) {
    EdgeFrame frame;
    const std::size_t m = curve.size() - 1;
    frame.tangents.resize(m);
    frame.normals.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        frame.tangents[i] = (curve[i + 1] - curve[i]).normalized();
        frame.normals[i] = rot90(frame.tangents[i]);
    }
    return frame;
}

Points vertex_tangents(const DiscreteCurve& curve) {
    const auto frame = edge_frame(curve);
    const std::size_t n = curve.size();
    Points t(n);
    t[0] = frame.tangents.front();
    t[n - 1] = frame.tangents.back();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const Vec2 s = frame.tangents[i - 1] + frame.tangents[i];
        const double len = s.norm();
        if (len < kCuspTol) throw Error(ErrorCode::CuspAngle, fmt::format("anti-parallel edges at vertex {}", i + 1));
        t[i] = s / len;
    }
    return t;
}

std::vector<double> turning_angles(const DiscreteCurve& curve) {
    if (curve.size() < 3) throw Error(ErrorCode::TooFewPoints, "turning angles need at least 3 points");
    const auto frame = edge_frame(curve);
    std::vector<double> alpha(curve.size() - 2);
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
        const Vec2& a = frame.tangents[i - 1];
        const Vec2& b = frame.tangents[i];
        alpha[i - 1] = std::atan2(std::abs(cross(a, b)), a.dot(b));
    }
    return alpha;
}

std::vector<double> discrete_curvature(const DiscreteCurve& curve) {
    if (curve.size() < 3) throw Error(ErrorCode::TooFewPoints, "curvature needs at least 3 points");
    const auto frame = edge_frame(curve);
    const double l = curve.edge_len();
    std::vector<double> kappa(curve.size() - 2);
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
        const Vec2& a = frame.tangents[i - 1];
        const Vec2& b = frame.tangents[i];
        const double denom = 1.0 + a.dot(b);
        if (denom < kCuspTol) throw Error(ErrorCode::CuspAngle, fmt::format("anti-parallel edges at vertex {}", i + 1));
        kappa[i - 1] = (2.0 / l) * cross(a, b) / denom;
    }
    return kappa;
}

CurveMeasures measures(const DiscreteCurve& curve) {
    CurveMeasures m;
    m.total_length = curve.total_length();
    m.gap = curve.gap();
    if (curve.size() >= 3) {
        for (double k : discrete_curvature(curve)) m.bending_sum += k * k;
    }
    return m;
}

namespace {

// Arclength walker over a fixed polyline.
class PolylineWalk {
public:
    explicit PolylineWalk(std::span<const Vec2> pts) : pts_(pts) {}

    struct Cursor {
        std::size_t seg = 0;
        double t = 0.0;
    };

    Vec2 at(const Cursor& c) const { return pts_[c.seg] + c.t * (pts_[c.seg + 1] - pts_[c.seg]); }

    // First point after `from` at Euclidean distance `chord` from `center`;
    // false when the walk runs off the end first.
    bool advance(Cursor& from, const Vec2& center, double chord) const {
        for (std::size_t seg = from.seg; seg + 1 < pts_.size(); ++seg) {
            const Vec2 a = pts_[seg];
            const Vec2 d = pts_[seg + 1] - a;
            const double dd = d.squaredNorm();
            if (dd == 0.0) continue;
            const Vec2 w = a - center;
            // |w + t d|^2 = chord^2; the walk starts inside the circle, so
            // the exit is the larger root.
            const double b = w.dot(d);
            const double c = w.squaredNorm() - chord * chord;
            const double disc = b * b - dd * c;
            if (disc < 0.0) continue;
            const double t = (-b + std::sqrt(disc)) / dd;
            const double t0 = (seg == from.seg) ? from.t : 0.0;
            if (t >= t0 && t <= 1.0) {
                from = {seg, t};
                return true;
            }
        }
        return false;
    }

private:
    std::span<const Vec2> pts_;
};

} // namespace

DiscreteCurve resample_equal_arclength(std::span<const Vec2> polyline, std::size_t n) {
    if (n < 2) throw Error(ErrorCode::TooFewPoints, "resample needs n >= 2");
    if (polyline.size() < 2) throw Error(ErrorCode::TooFewPoints, "input polyline needs at least 2 points");
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) total += (polyline[i + 1] - polyline[i]).norm();
    if (!(total > 0.0)) throw Error(ErrorCode::ZeroLengthInput, "input polyline has zero length");

    const Vec2 first = polyline.front();
    const Vec2 last = polyline.back();
    if (n == 2) {
        return DiscreteCurve::from_trusted({first, last}, (last - first).norm());
    }

    // Shoot with a common chord length c: walk n-1 chords from the start and
    // measure how far along the input the walk ends. Chord <= arclength, so
    // c = total/(n-1) reaches or overshoots the end; bisect on c.
    const PolylineWalk walk(polyline);
    const std::size_t steps = n - 1;
    auto shoot = [&](double chord, Points* out) -> double {
        PolylineWalk::Cursor cur;
        Vec2 p = first;
        if (out) out->push_back(p);
        for (std::size_t k = 0; k < steps; ++k) {
            if (!walk.advance(cur, p, chord)) return 1.0; // ran off the end: overshoot
            p = walk.at(cur);
            if (out) out->push_back(p);
        }
        // Residual distance to the endpoint, signed negative when short.
        if (cur.seg + 2 == polyline.size() && cur.t >= 1.0) return 0.0;
        return -(p - last).norm();
    };

    double lo = 0.0;
    double hi = total / static_cast<double>(steps);
    for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (shoot(mid, nullptr) < 0.0) lo = mid;
        else hi = mid;
    }
    Points pts;
    pts.reserve(n);
    shoot(lo, &pts);
    if (pts.size() != n) {
        // lo never undershoots by construction, but guard against a
        // degenerate walk.
        throw Error(ErrorCode::ZeroLengthInput, "resampling walk failed");
    }
    pts.back() = last;
    double emin = INFINITY, emax = 0.0, esum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double e = (pts[i + 1] - pts[i]).norm();
        emin = std::min(emin, e);
        emax = std::max(emax, e);
        esum += e;
    }
    const double mean = esum / static_cast<double>(steps);
    if (emax - emin > 1e-10 * mean) {
        throw Error(ErrorCode::UnequalEdges,
                    fmt::format("resampling left relative edge spread {:.3e}", (emax - emin) / mean));
    }
    return DiscreteCurve::from_trusted(std::move(pts), mean);
}

} // namespace ef
