#pragma once

#include "ifelab/geometry.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ifelab {

struct QuadPoint {
  Point x;
  double w;
};

/// Rule on a reference region: the interval [0,1] or the triangle
/// (0,0),(1,0),(0,1).
struct QuadratureRule {
  std::vector<QuadPoint> points;
  int exact_degree = 0;
};

/// Gauss-Legendre nodes and weights on [0,1] (cached, n <= 32).
const QuadratureRule& gauss_interval(int npts);
/// Collapsed Gauss rule on the unit triangle, exact to the given degree
/// (cached, degree <= 20).
const QuadratureRule& triangle_rule(int degree);

inline constexpr int kVolumeDegree = 6;
inline constexpr int kEdgePoints = 5;

/// Physical points of a rule mapped to a segment / triangle / convex polygon.
/// Appends to `out`.
void segment_points(const Point& a, const Point& b, int npts, std::vector<QuadPoint>& out);
void triangle_points(const Point& a, const Point& b, const Point& c, int degree,
                     std::vector<QuadPoint>& out);
/// Fan triangulation from the vertex centroid. Returns false (and appends
/// nothing) for a degenerate polygon of area below 1e-15.
bool polygon_points(std::span<const Point> poly, int degree, std::vector<QuadPoint>& out);

double integrate_segment(const ScalarField& f, const Point& a, const Point& b, int npts = kEdgePoints);

/// Returns 0 and sets *degenerate (if given) when the polygon has area below 1e-15.
double integrate_polygon(const ScalarField& f, std::span<const Point> poly,
                         int degree = kVolumeDegree, bool* degenerate = nullptr);

/// Integral over segment a->b of an integrand that switches at `split`.
/// `side_of_a` tells which side the sub-segment touching a lies on; without
/// a split it is the side of the whole edge.
double integrate_cut_edge(const ScalarField& f_plus, const ScalarField& f_minus, const Point& a,
                          const Point& b, const std::optional<Point>& split, Side side_of_a,
                          int npts = kEdgePoints);

}  // namespace ifelab
