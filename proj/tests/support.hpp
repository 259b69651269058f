#pragma once

#include "ifelab/geometry.hpp"

#include <cmath>
#include <random>

namespace testing_support {

using ifelab::LevelSet;
using ifelab::Point;

inline LevelSet circle(double r, Point c = Point::Zero()) {
  return {[r, c](const Point& x) { return (x - c).squaredNorm() - r * r; },
          [c](const Point& x) -> Point { return 2.0 * (x - c); }};
}

// phi = n.(x - p)
inline LevelSet line(Point n, Point p) {
  return {[n, p](const Point& x) { return n.dot(x - p); }, [n](const Point&) -> Point { return n; }};
}

// Shoelace, independent of the library
inline double shoelace(const std::vector<Point>& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point& u = p[i];
    const Point& v = p[(i + 1) % p.size()];
    a += u.x() * v.y() - v.x() * u.y();
  }
  return 0.5 * std::abs(a);
}

// Composite midpoint rule on a segment
template <class F>
double midpoint_segment(F f, const Point& a, const Point& b, int panels) {
  double s = 0.0;
  for (int k = 0; k < panels; ++k) s += f(a + (k + 0.5) / panels * (b - a));
  return s * (b - a).norm() / panels;
}

struct RandomTriangles {
  std::mt19937_64 rng;
  explicit RandomTriangles(unsigned seed) : rng(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  // counterclockwise triangle with area bounded away from zero
  std::array<Point, 3> next(double box = 1.0) {
    for (;;) {
      std::array<Point, 3> v;
      for (auto& p : v) p = Point(uniform(-box, box), uniform(-box, box));
      const double cr = (v[1] - v[0]).x() * (v[2] - v[0]).y() - (v[1] - v[0]).y() * (v[2] - v[0]).x();
      if (std::abs(cr) < 0.05 * box * box) continue;
      if (cr < 0) std::swap(v[1], v[2]);
      return v;
    }
  }

  // Line through points on two distinct edges of a polygon, random orientation.
  template <class Poly>
  LevelSet chord(const Poly& v) {
    const int nv = static_cast<int>(v.size());
    const int k1 = static_cast<int>(uniform(0, nv)) % nv;
    const int k2 = (k1 + 1 + static_cast<int>(uniform(0, nv - 1)) % (nv - 1)) % nv;
    const Point D = v[k1] + uniform(0.02, 0.98) * (v[(k1 + 1) % nv] - v[k1]);
    const Point E = v[k2] + uniform(0.02, 0.98) * (v[(k2 + 1) % nv] - v[k2]);
    Point n(-(E - D).y(), (E - D).x());
    n.normalize();
    if (uniform(0, 1) < 0.5) n = -n;
    return line(n, D);
  }

  // Obtuse triangle: largest angle in [95, 175] degrees.
  std::array<Point, 3> obtuse() {
    const double deg = 3.14159265358979323846 / 180.0;
    const double a = uniform(95.0, 175.0) * deg;
    const double b = (3.14159265358979323846 - a) * uniform(0.1, 0.9);
    const double c = 3.14159265358979323846 - a - b;
    const Point p1(1, 0);
    const Point p2 = std::sin(b) / std::sin(c) * Point(std::cos(a), std::sin(a));
    const double s = uniform(0.01, 1.0);
    const Point o(uniform(-1, 1), uniform(-1, 1));
    return {o, o + s * p1, o + s * p2};
  }
};

// Simpson rule on a segment; exact for cubics.
template <class F>
double simpson(F f, const Point& a, const Point& b) {
  return (b - a).norm() / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

}  // namespace testing_support
