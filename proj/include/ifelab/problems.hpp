#pragma once

#include "ifelab/geometry.hpp"
#include "ifelab/mesh.hpp"

#include <string>
#include <vector>

namespace ifelab {

/// A catalog problem failed its self-consistency checks.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Expected behaviour of the tangential derivative of u on the interface.
enum class Tangential { Any, Zero, NonZero };

/// One interface problem -div(beta grad u) = f with jumps g_D, g_N on the
/// zero set of the level set and Dirichlet data on the box boundary.
struct ProblemSpec {
  std::string name;
  Box domain{-1.0, -1.0, 1.0, 1.0};
  LevelSet levelset;
  ScalarField beta_plus, beta_minus;
  ScalarField f_plus, f_minus;
  ScalarField u_plus, u_minus;
  VectorField grad_u_plus, grad_u_minus;
  ScalarField g_D, g_N;  // on the interface, normal pointing into Omega+
  ScalarField g_boundary;
  bool homogeneous_jumps = true;
  Tangential tangential = Tangential::Any;

  Side side(const Point& x) const { return levelset(x) > 0.0 ? Side::Plus : Side::Minus; }
  double u(const Point& x) const { return side(x) == Side::Plus ? u_plus(x) : u_minus(x); }
  Point grad_u(const Point& x) const { return side(x) == Side::Plus ? grad_u_plus(x) : grad_u_minus(x); }
  double f(const Point& x) const { return side(x) == Side::Plus ? f_plus(x) : f_minus(x); }
  const ScalarField& u_piece(Side s) const { return s == Side::Plus ? u_plus : u_minus; }
  const VectorField& grad_piece(Side s) const { return s == Side::Plus ? grad_u_plus : grad_u_minus; }
  const ScalarField& beta_piece(Side s) const { return s == Side::Plus ? beta_plus : beta_minus; }
  const ScalarField& f_piece(Side s) const { return s == Side::Plus ? f_plus : f_minus; }
};

/// Circle r = 0.5, u = j(r) v(r) sin(theta) with a compact bump j; constant
/// coefficients.
ProblemSpec example1(double beta_plus, double beta_minus);
/// Non-convex interface with variable coefficients, u = phi / beta.
ProblemSpec example2();
/// Straight interface x1 = x2 with a piecewise linear solution.
ProblemSpec example3();
/// Circle r = 0.5 with nonzero value and flux jumps.
ProblemSpec example4();

/// Catalog lookup by name (ex1..ex4); beta values only used by ex1.
ProblemSpec make_problem(const std::string& name, double beta_plus = 10.0, double beta_minus = 1000.0);

struct ValidationCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool ok = true;
};

struct ValidationReport {
  std::string problem;
  std::vector<ValidationCheck> checks;

  bool ok() const;
  std::string summary() const;
};

/// Interface sample points: crossings of the zero set with an offset
/// background grid, thinned to at most `count` points.
std::vector<Point> sample_interface(const ProblemSpec& p, int count = 64);

/// Runs every consistency check and reports the residuals; never throws.
ValidationReport check_problem(const ProblemSpec& p);
/// check_problem, throwing ValidationError naming the first failed check.
ValidationReport validate(const ProblemSpec& p);

}  // namespace ifelab
