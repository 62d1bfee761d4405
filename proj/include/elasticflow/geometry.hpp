#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace ef {

using Vec2 = Eigen::Vector2d;
using Points = std::vector<Vec2>;

/// Counterclockwise rotation by a quarter turn.
inline Vec2 rot90(const Vec2& v) { return {-v.y(), v.x()}; }

/// Scalar cross product in the plane, v1*w2 - v2*w1.
inline double cross(const Vec2& v, const Vec2& w) { return v.x() * w.y() - v.y() * w.x(); }

inline constexpr double kExternalEdgeTol = 1e-9;
inline constexpr double kInternalEdgeTol = 1e-12;
inline constexpr double kCuspTol = 1e-12;

/// An ordered planar polyline whose consecutive vertices are all the same
/// distance `edge_len` apart. Immutable once built.
class DiscreteCurve {
public:
    /// Checks edge equality (relative spread <= rel_tol) and endpoint separation.
    /// Throws TooFewPoints, UnequalEdges or DegenerateGap.
    static DiscreteCurve validate(Points points, double rel_tol = kExternalEdgeTol);

    /// Trusted construction for curves built by the library itself; only
    /// checks the point count and that the edge length is nonnegative.
    static DiscreteCurve from_trusted(Points points, double edge_len);

    std::size_t size() const { return points_.size(); }
    const Points& points() const { return points_; }
    const Vec2& operator[](std::size_t i) const { return points_[i]; }
    const Vec2& front() const { return points_.front(); }
    const Vec2& back() const { return points_.back(); }

    double edge_len() const { return edge_len_; }
    double total_length() const { return static_cast<double>(points_.size() - 1) * edge_len_; }
    double gap() const { return (points_.back() - points_.front()).norm(); }
    bool admissible() const { return gap() > 0.0; }

    /// Same curve traversed backwards.
    DiscreteCurve reversed() const;

private:
    DiscreteCurve(Points points, double edge_len) : points_(std::move(points)), edge_len_(edge_len) {}

    Points points_;
    double edge_len_ = 0.0;
};

/// Constraint-free chart of equal-edge curves: base point, edge length and
/// unwrapped edge headings. Point i+1 = point i + l (cos h_i, sin h_i).
struct ReducedCoords {
    Vec2 base = Vec2::Zero();
    double edge_len = 0.0;
    std::vector<double> headings;

    std::size_t point_count() const { return headings.size() + 1; }
};

struct EdgeFrame {
    Points tangents;
    Points normals;
};

struct CurveMeasures {
    double total_length = 0.0;
    double gap = 0.0;
    double bending_sum = 0.0;
};

/// Throws ZeroEdgeLength when l == 0.
ReducedCoords to_reduced(const DiscreteCurve& curve);
DiscreteCurve from_reduced(const ReducedCoords& rc);

/// Positions only, without building a curve object. Writes rc.point_count() points.
void reconstruct_points(const ReducedCoords& rc, std::span<Vec2> out);

EdgeFrame edge_frame(const DiscreteCurve& curve);

/// Unit vertex tangents: normalized sum of adjacent edge tangents in the
/// interior, the first/last edge tangent at the ends.
Points vertex_tangents(const DiscreteCurve& curve);

/// Unsigned turning angles in [0, pi] at interior vertices 2..N-1.
std::vector<double> turning_angles(const DiscreteCurve& curve);

/// Signed curvature (2/l) (t_{i-1} x t_i) / (1 + <t_{i-1}, t_i>) at interior
/// vertices 2..N-1. Throws CuspAngle for anti-parallel consecutive edges.
std::vector<double> discrete_curvature(const DiscreteCurve& curve);

/// Resamples an arbitrary polyline into n points with equal chord lengths
/// that start and end at the input endpoints.
DiscreteCurve resample_equal_arclength(std::span<const Vec2> polyline, std::size_t n);

CurveMeasures measures(const DiscreteCurve& curve);

} // namespace ef
