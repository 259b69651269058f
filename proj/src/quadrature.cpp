#include "ifelab/quadrature.hpp"

#include <spdlog/spdlog.h>

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace ifelab {

namespace {

constexpr int kMaxGauss = 32;
constexpr int kMaxTriDegree = 20;
constexpr double kDegenerateArea = 1e-15;

// Newton on P_n from the Chebyshev-like initial guess.
QuadratureRule make_gauss(int n) {
  QuadratureRule r;
  r.exact_degree = 2 * n - 1;
  r.points.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1,1] -> [0,1], ascending
    r.points[n - 1 - i] = {Point(0.5 * (x + 1.0), 0.0), 0.5 * w};
  }
  return r;
}

QuadratureRule make_triangle(int degree) {
  // (u,v) in [0,1]^2 -> (u, v(1-u)); Jacobian 1-u raises the u-degree by one.
  const int n = (degree + 2 + 1) / 2;
  const auto& g = gauss_interval(n);
  QuadratureRule r;
  r.exact_degree = degree;
  for (const auto& pu : g.points) {
    const double u = pu.x.x();
    for (const auto& pv : g.points) {
      const double v = pv.x.x();
      r.points.push_back({Point(u, v * (1.0 - u)), pu.w * pv.w * (1.0 - u)});
    }
  }
  return r;
}

}  // namespace

const QuadratureRule& gauss_interval(int npts) {
  if (npts < 1 || npts > kMaxGauss) throw std::invalid_argument("gauss_interval: unsupported npts");
  static std::array<QuadratureRule, kMaxGauss + 1> cache;
  static std::array<std::once_flag, kMaxGauss + 1> flags;
  std::call_once(flags[npts], [&] { cache[npts] = make_gauss(npts); });
  return cache[npts];
}

const QuadratureRule& triangle_rule(int degree) {
  if (degree < 0 || degree > kMaxTriDegree) throw std::invalid_argument("triangle_rule: unsupported degree");
  static std::array<QuadratureRule, kMaxTriDegree + 1> cache;
  static std::array<std::once_flag, kMaxTriDegree + 1> flags;
  std::call_once(flags[degree], [&] { cache[degree] = make_triangle(degree); });
  return cache[degree];
}

void segment_points(const Point& a, const Point& b, int npts, std::vector<QuadPoint>& out) {
  const double len = (b - a).norm();
  for (const auto& q : gauss_interval(npts).points) out.push_back({a + q.x.x() * (b - a), q.w * len});
}

void triangle_points(const Point& a, const Point& b, const Point& c, int degree,
                     std::vector<QuadPoint>& out) {
  const Point ab = b - a, ac = c - a;
  const double jac = std::abs(ab.x() * ac.y() - ab.y() * ac.x());
  for (const auto& q : triangle_rule(degree).points)
    out.push_back({a + q.x.x() * ab + q.x.y() * ac, q.w * jac});
}

bool polygon_points(std::span<const Point> poly, int degree, std::vector<QuadPoint>& out) {
  if (poly.size() < 3 || std::abs(polygon_area(poly)) < kDegenerateArea) return false;
  if (poly.size() == 3) {
    triangle_points(poly[0], poly[1], poly[2], degree, out);
    return true;
  }
  const Point c = vertex_centroid(poly);
  for (std::size_t k = 0; k < poly.size(); ++k)
    triangle_points(c, poly[k], poly[(k + 1) % poly.size()], degree, out);
  return true;
}

double integrate_segment(const ScalarField& f, const Point& a, const Point& b, int npts) {
  if (npts < 1) throw std::invalid_argument("integrate_segment: npts must be >= 1");
  std::vector<QuadPoint> pts;
  segment_points(a, b, npts, pts);
  double s = 0.0;
  for (const auto& q : pts) s += q.w * f(q.x);
  return s;
}

double integrate_polygon(const ScalarField& f, std::span<const Point> poly, int degree,
                         bool* degenerate) {
  std::vector<QuadPoint> pts;
  const bool ok = polygon_points(poly, degree, pts);
  if (degenerate) *degenerate = !ok;
  if (!ok) {
    spdlog::warn("integrate_polygon: degenerate polygon with {} vertices skipped", poly.size());
    return 0.0;
  }
  double s = 0.0;
  for (const auto& q : pts) s += q.w * f(q.x);
  return s;
}

double integrate_cut_edge(const ScalarField& f_plus, const ScalarField& f_minus, const Point& a,
                          const Point& b, const std::optional<Point>& split, Side side_of_a,
                          int npts) {
  const auto& fa = side_of_a == Side::Plus ? f_plus : f_minus;
  if (!split) return integrate_segment(fa, a, b, npts);
  const auto& fb = side_of_a == Side::Plus ? f_minus : f_plus;
  return integrate_segment(fa, a, *split, npts) + integrate_segment(fb, *split, b, npts);
}

}  // namespace ifelab
