#pragma once

#include "ifelab/geometry.hpp"

#include <Eigen/Core>

namespace ifelab {

/// Crouzeix-Raviart on triangles, rotated Q1 on rectangles.
enum class ElementKind { CR, RQ1 };

inline int dofs_per_element(ElementKind k) { return k == ElementKind::CR ? 3 : 4; }

/// Scaled local coordinates xi = (x - origin) / scale. Monomials are
/// 1, xi1, xi2 and (RQ1 only) xi1^2 - (kappa xi2)^2.
struct LocalFrame {
  ElementKind kind = ElementKind::CR;
  Point origin = Point::Zero();
  double scale = 1.0;
  double kappa = 1.0;

  int size() const { return dofs_per_element(kind); }

  Eigen::Vector4d monomials(const Point& x) const {
    const Point xi = (x - origin) / scale;
    const double q = kind == ElementKind::RQ1 ? xi.x() * xi.x() - kappa * kappa * xi.y() * xi.y() : 0.0;
    return {1.0, xi.x(), xi.y(), q};
  }

  /// Physical gradients of the monomials: rows x1 and x2.
  Eigen::Matrix<double, 2, 4> monomial_grads(const Point& x) const {
    const Point xi = (x - origin) / scale;
    Eigen::Matrix<double, 2, 4> g;
    g << 0.0, 1.0, 0.0, 2.0 * xi.x(), 0.0, 0.0, 1.0, -2.0 * kappa * kappa * xi.y();
    if (kind == ElementKind::CR) g.col(3).setZero();
    return g / scale;
  }
};

struct LocalPoly {
  LocalFrame frame;
  Eigen::Vector4d c = Eigen::Vector4d::Zero();

  double value(const Point& x) const { return frame.monomials(x).dot(c); }
  Point grad(const Point& x) const { return frame.monomial_grads(x) * c; }

  /// a + b x1 + c x2 [+ d (x1^2 - (kappa x2)^2)] in unscaled coordinates.
  static LocalPoly physical(ElementKind kind, double a, double b, double c, double d = 0.0,
                            double kappa = 1.0) {
    LocalPoly p;
    p.frame.kind = kind;
    p.frame.kappa = kappa;
    p.c = {a, b, c, kind == ElementKind::RQ1 ? d : 0.0};
    return p;
  }
};

/// Half the second x1-derivative; zero for CR polynomials.
inline double d_functional(const LocalPoly& p) {
  if (p.frame.kind == ElementKind::CR) return 0.0;
  return p.c[3] / (p.frame.scale * p.frame.scale);
}

}  // namespace ifelab
