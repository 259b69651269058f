#include "ifelab/problems.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace ifelab;

namespace {

std::vector<Point> circle_points(double r, int n) {
  std::vector<Point> out;
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * (k + 0.3) / n;
    out.emplace_back(r * std::cos(t), r * std::sin(t));
  }
  return out;
}

// -div(beta grad u) by central differences of the flux on one piece
double fd_source(const ScalarField& beta, const ScalarField& u, const Point& x, double h = 1e-3) {
  auto flux = [&](const Point& y, int d) {
    Point e = Point::Zero();
    e[d] = h / 2;
    return beta(y) * (u(y + e) - u(y - e)) / h;
  };
  double div = 0.0;
  for (int d = 0; d < 2; ++d) {
    Point e = Point::Zero();
    e[d] = h / 2;
    div += (flux(x + e, d) - flux(x - e, d)) / h;
  }
  return -div;
}

void expect_source_matches(const ProblemSpec& p, const std::vector<Point>& pts) {
  for (const Point& x : pts) {
    const Side s = p.side(x);
    // Richardson extrapolation of the O(h^2) difference
    const double ref = (4.0 * fd_source(p.beta_piece(s), p.u_piece(s), x, 2.5e-4) -
                        fd_source(p.beta_piece(s), p.u_piece(s), x, 5e-4)) / 3.0;
    const double f = p.f_piece(s)(x);
    EXPECT_NEAR(f, ref, 1e-4 * std::max(1.0, std::abs(f))) << p.name << " ref " << ref << " at " << x.transpose();
  }
}

std::vector<Point> grid_points() {
  std::vector<Point> pts;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) pts.emplace_back(-0.9 + 0.2237 * i, -0.93 + 0.2241 * j);
  return pts;
}

}  // namespace

TEST(Example1, ContinuousWithTangentialDerivative) {
  const auto p = example1(10, 1000);
  double tmax = 0.0;
  for (const Point& x : circle_points(0.5, 64)) {
    EXPECT_NEAR(p.u_plus(x), p.u_minus(x), 1e-12);
    const Point n = x.normalized();
    EXPECT_NEAR(10 * p.grad_u_plus(x).dot(n), 1000 * p.grad_u_minus(x).dot(n), 1e-9);
    const Point t(-n.y(), n.x());
    tmax = std::max(tmax, std::abs(p.grad_u_plus(x).dot(t)));
  }
  EXPECT_GT(tmax, 0.1);
}

TEST(Example1, VanishesOutsideSupport) {
  const auto p = example1(10, 1000);
  for (double r : {0.95, 1.0, 1.2})
    for (const Point& x : circle_points(r, 16)) EXPECT_EQ(p.u(x), 0.0);
}

TEST(Example2, ZeroOnInterfaceWithContinuousFlux) {
  const auto p = example2();
  const auto pts = sample_interface(p, 64);
  ASSERT_GE(pts.size(), 8u);
  for (const Point& x : pts) {
    EXPECT_NEAR(p.u_plus(x), 0.0, 1e-8);
    EXPECT_NEAR(p.u_minus(x), 0.0, 1e-8);
    const Point n = p.levelset.normal(x);
    const Point t(-n.y(), n.x());
    EXPECT_NEAR(p.beta_plus(x) * p.grad_u_plus(x).dot(n), p.beta_minus(x) * p.grad_u_minus(x).dot(n), 1e-8);
    EXPECT_NEAR(p.grad_u_plus(x).dot(t), 0.0, 1e-8);
  }
}

TEST(Example3, PiecewiseLinearWithUnitFlux) {
  const auto p = example3();
  for (double s : {-0.8, -0.1, 0.4, 0.9}) {
    const Point x(s, s);
    EXPECT_NEAR(p.u_plus(x), p.u_minus(x), 1e-15);
    const Point n = Point(1, -1).normalized();
    EXPECT_NEAR(2.0 * p.grad_u_plus(x).dot(n), 1.0, 1e-15);
    EXPECT_NEAR(1.0 * p.grad_u_minus(x).dot(n), 1.0, 1e-15);
  }
  for (const Point& x : grid_points()) EXPECT_EQ(p.f(x), 0.0);
}

TEST(Example4, NonzeroJumps) {
  const auto p = example4();
  EXPECT_FALSE(p.homogeneous_jumps);
  // log(1/4) - sin(1/2)
  EXPECT_NEAR(p.g_D(Point(0.5, 0)), -1.865719899724094, 1e-12);
  double gn = 0.0;
  for (const Point& x : circle_points(0.5, 32)) gn = std::max(gn, std::abs(p.g_N(x)));
  EXPECT_GT(gn, 0.1);
}

TEST(Catalog, SourcesMatchDifferencedFlux) {
  expect_source_matches(example1(10, 1000), grid_points());
  expect_source_matches(example1(1000, 10), grid_points());
  expect_source_matches(example2(), grid_points());
  expect_source_matches(example3(), grid_points());
  expect_source_matches(example4(), grid_points());
}

TEST(Catalog, AllValidate) {
  for (const char* name : {"ex1", "ex2", "ex3", "ex4"}) {
    const auto rep = check_problem(make_problem(name));
    EXPECT_TRUE(rep.ok()) << rep.summary();
  }
}

TEST(Catalog, UnknownName) { EXPECT_THROW(make_problem("ex9"), std::invalid_argument); }

TEST(Catalog, CorruptedSourceFails) {
  auto p = example4();
  auto f = p.f_plus;
  p.f_plus = [f](const Point& x) { return 1.01 * f(x); };
  const auto rep = check_problem(p);
  EXPECT_FALSE(rep.ok());
  EXPECT_THROW(validate(p), ValidationError);
}

TEST(Catalog, CorruptedJumpFails) {
  auto p = example1(10, 1000);
  auto u = p.u_plus;
  p.u_plus = [u](const Point& x) { return u(x) + 1e-3; };
  EXPECT_FALSE(check_problem(p).ok());
}
