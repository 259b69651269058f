#include "ifelab/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace ifelab {

namespace {

constexpr double kR0 = 0.5;
constexpr double kEta = 0.45;

constexpr double kTolGradPhi = 1e-6;
constexpr double kTolGradU = 1e-6;
constexpr double kTolJump = 1e-8;
constexpr double kTolSource = 1e-5;
constexpr double kTolTangentialZero = 1e-8;
constexpr double kMinTangentialNonZero = 0.1;
constexpr double kFdStep = 1e-3;

LevelSet circle(double r0) {
  return {[r0](const Point& x) { return x.squaredNorm() - r0 * r0; },
          [](const Point& x) -> Point { return 2.0 * x; }};
}

// p(r) = j(r) v(r) and its first two r-derivatives.
struct Radial {
  double p = 0.0, dp = 0.0, ddp = 0.0;
};

Radial example1_radial(double r, double beta) {
  Radial out;
  const double s = (r - kR0) / kEta;
  if (std::abs(s) >= 1.0) return out;
  const double q = 1.0 - s * s;
  const double j = std::exp(-1.0 / q);
  if (j == 0.0) return out;
  const double h = -2.0 * s / (kEta * q * q);
  const double dh = -2.0 / (kEta * kEta * q * q) - 8.0 * s * s / (kEta * kEta * q * q * q);
  const double dj = j * h;
  const double ddj = j * (h * h + dh);
  const double v = 1.0 + (r * r - kR0 * kR0) / beta;
  const double dv = 2.0 * r / beta;
  const double ddv = 2.0 / beta;
  out.p = j * v;
  out.dp = dj * v + j * dv;
  out.ddp = ddj * v + 2.0 * dj * dv + j * ddv;
  return out;
}

void example1_side(double beta, ScalarField& u, VectorField& gu, ScalarField& f) {
  u = [beta](const Point& x) {
    const double r = x.norm();
    if (r == 0.0) return 0.0;
    return example1_radial(r, beta).p * x.y() / r;
  };
  gu = [beta](const Point& x) -> Point {
    const double r = x.norm();
    if (r == 0.0) return Point::Zero();
    const auto R = example1_radial(r, beta);
    const double g = R.p / r;
    const double dg = (R.dp * r - R.p) / (r * r);
    return dg * x.y() / r * x + Point(0.0, g);
  };
  f = [beta](const Point& x) {
    const double r = x.norm();
    if (r == 0.0) return 0.0;
    const auto R = example1_radial(r, beta);
    return -beta * (R.ddp + R.dp / r - R.p / (r * r)) * x.y() / r;
  };
}

// Jump data from the pieces; the normal is the exact level-set normal.
void derive_jumps(ProblemSpec& p) {
  auto up = p.u_plus, um = p.u_minus;
  auto gp = p.grad_u_plus, gm = p.grad_u_minus;
  auto bp = p.beta_plus, bm = p.beta_minus;
  auto ls = p.levelset;
  p.g_D = [up, um](const Point& x) { return up(x) - um(x); };
  p.g_N = [gp, gm, bp, bm, ls](const Point& x) {
    const Point n = ls.normal(x);
    return bp(x) * gp(x).dot(n) - bm(x) * gm(x).dot(n);
  };
}

ScalarField dispatch(const LevelSet& ls, ScalarField plus, ScalarField minus) {
  return [ls, plus = std::move(plus), minus = std::move(minus)](const Point& x) {
    return ls(x) > 0.0 ? plus(x) : minus(x);
  };
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return m;
}

}  // namespace

ProblemSpec example1(double beta_plus, double beta_minus) {
  if (!(beta_plus > 0.0) || !(beta_minus > 0.0))
    throw std::invalid_argument("example1: coefficients must be positive");
  ProblemSpec p;
  p.name = "ex1";
  p.levelset = circle(kR0);
  p.beta_plus = [beta_plus](const Point&) { return beta_plus; };
  p.beta_minus = [beta_minus](const Point&) { return beta_minus; };
  example1_side(beta_plus, p.u_plus, p.grad_u_plus, p.f_plus);
  example1_side(beta_minus, p.u_minus, p.grad_u_minus, p.f_minus);
  p.g_D = [](const Point&) { return 0.0; };
  p.g_N = [](const Point&) { return 0.0; };
  p.g_boundary = dispatch(p.levelset, p.u_plus, p.u_minus);
  p.tangential = Tangential::NonZero;
  validate(p);
  return p;
}

ProblemSpec example2() {
  ProblemSpec p;
  p.name = "ex2";
  auto phi = [](const Point& x) {
    const double rho = x.squaredNorm();
    const double w = 3.0 * rho - x.x();
    return w * w - rho + 0.02;
  };
  auto grad_phi = [](const Point& x) -> Point {
    const double w = 3.0 * x.squaredNorm() - x.x();
    const Point gw(6.0 * x.x() - 1.0, 6.0 * x.y());
    return 2.0 * w * gw - 2.0 * x;
  };
  auto lap_phi = [](const Point& x) {
    const double w = 3.0 * x.squaredNorm() - x.x();
    const Point gw(6.0 * x.x() - 1.0, 6.0 * x.y());
    return 2.0 * gw.squaredNorm() + 24.0 * w - 4.0;
  };
  p.levelset = {phi, grad_phi};

  struct Coef {
    ScalarField b;
    VectorField g;
    ScalarField lap;
  };
  const Coef plus{[](const Point& x) { return 300.0 * (2.0 + std::sin(6.0 * (x.x() + x.y()))); },
                  [](const Point& x) -> Point { return Point::Constant(1800.0 * std::cos(6.0 * (x.x() + x.y()))); },
                  [](const Point& x) { return -21600.0 * std::sin(6.0 * (x.x() + x.y())); }};
  const Coef minus{[](const Point& x) { return 2.0 + std::cos(6.0 * (x.x() + x.y())); },
                   [](const Point& x) -> Point { return Point::Constant(-6.0 * std::sin(6.0 * (x.x() + x.y()))); },
                   [](const Point& x) { return -72.0 * std::cos(6.0 * (x.x() + x.y())); }};

  auto make = [&](const Coef& c, ScalarField& u, VectorField& gu, ScalarField& f) {
    u = [phi, c](const Point& x) { return phi(x) / c.b(x); };
    gu = [phi, grad_phi, c](const Point& x) -> Point {
      const double b = c.b(x);
      return grad_phi(x) / b - phi(x) * c.g(x) / (b * b);
    };
    f = [phi, grad_phi, lap_phi, c](const Point& x) {
      const double b = c.b(x);
      const Point gb = c.g(x);
      const double ph = phi(x);
      return -lap_phi(x) + grad_phi(x).dot(gb) / b + ph * c.lap(x) / b - ph * gb.squaredNorm() / (b * b);
    };
  };
  p.beta_plus = plus.b;
  p.beta_minus = minus.b;
  make(plus, p.u_plus, p.grad_u_plus, p.f_plus);
  make(minus, p.u_minus, p.grad_u_minus, p.f_minus);
  p.g_D = [](const Point&) { return 0.0; };
  p.g_N = [](const Point&) { return 0.0; };
  p.g_boundary = dispatch(p.levelset, p.u_plus, p.u_minus);
  p.tangential = Tangential::Zero;
  validate(p);
  return p;
}

ProblemSpec example3() {
  ProblemSpec p;
  p.name = "ex3";
  const double r2 = std::sqrt(2.0);
  p.levelset = {[r2](const Point& x) { return (x.x() - x.y()) / r2; },
                [r2](const Point&) -> Point { return Point(1.0, -1.0) / r2; }};
  auto side = [r2](double beta, ScalarField& u, VectorField& gu, ScalarField& f) {
    u = [r2, beta](const Point& x) { return (x.x() + x.y()) / r2 + (x.x() - x.y()) / (r2 * beta); };
    gu = [r2, beta](const Point&) -> Point { return Point(1.0, 1.0) / r2 + Point(1.0, -1.0) / (r2 * beta); };
    f = [](const Point&) { return 0.0; };
  };
  p.beta_plus = [](const Point&) { return 2.0; };
  p.beta_minus = [](const Point&) { return 1.0; };
  side(2.0, p.u_plus, p.grad_u_plus, p.f_plus);
  side(1.0, p.u_minus, p.grad_u_minus, p.f_minus);
  p.g_D = [](const Point&) { return 0.0; };
  p.g_N = [](const Point&) { return 0.0; };
  p.g_boundary = dispatch(p.levelset, p.u_plus, p.u_minus);
  p.tangential = Tangential::NonZero;
  validate(p);
  return p;
}

ProblemSpec example4() {
  ProblemSpec p;
  p.name = "ex4";
  p.levelset = circle(0.5);
  p.beta_plus = [](const Point& x) { return std::sin(x.x() + x.y()) + 2.0; };
  p.beta_minus = [](const Point& x) { return std::cos(x.x() + x.y()) + 2.0; };
  p.u_plus = [](const Point& x) { return std::log(x.squaredNorm()); };
  p.grad_u_plus = [](const Point& x) -> Point { return 2.0 * x / x.squaredNorm(); };
  p.f_plus = [](const Point& x) { return -std::cos(x.x() + x.y()) * 2.0 * (x.x() + x.y()) / x.squaredNorm(); };
  p.u_minus = [](const Point& x) { return std::sin(x.x() + x.y()); };
  p.grad_u_minus = [](const Point& x) -> Point { return Point::Constant(std::cos(x.x() + x.y())); };
  p.f_minus = [](const Point& x) {
    const double s = x.x() + x.y();
    return 2.0 * std::sin(s) * std::cos(s) + 2.0 * (std::cos(s) + 2.0) * std::sin(s);
  };
  derive_jumps(p);
  p.homogeneous_jumps = false;
  p.g_boundary = dispatch(p.levelset, p.u_plus, p.u_minus);
  p.tangential = Tangential::NonZero;
  validate(p);
  return p;
}

ProblemSpec make_problem(const std::string& name, double beta_plus, double beta_minus) {
  if (name == "ex1") return example1(beta_plus, beta_minus);
  if (name == "ex2") return example2();
  if (name == "ex3") return example3();
  if (name == "ex4") return example4();
  throw std::invalid_argument("unknown example '" + name + "' (expected ex1..ex4)");
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.ok; });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-22s %-4s value %.3e  tol %.1e\n", c.name.c_str(), c.ok ? "ok" : "FAIL",
                  c.value, c.tolerance);
    os << problem << "  " << buf;
  }
  return os.str();
}

std::vector<Point> sample_interface(const ProblemSpec& p, int count) {
  // Odd resolution with irrational-looking offsets so straight interfaces
  // through grid vertices still give interior crossings.
  constexpr int kGrid = 101;
  const Box& b = p.domain;
  const double dx = (b.x1 - b.x0) / kGrid, dy = (b.y1 - b.y0) / kGrid;
  std::vector<Point> all;
  auto scan = [&](const Point& a, const Point& c) {
    const auto cut = edge_cut(a, c, p.levelset);
    if (cut && !cut->snapped()) all.push_back(cut->point);
  };
  for (int j = 0; j < kGrid; ++j) {
    const double y = b.y0 + (j + 0.5731) * dy;
    for (int i = 0; i + 1 < kGrid; ++i) scan({b.x0 + (i + 0.3119) * dx, y}, {b.x0 + (i + 1.3119) * dx, y});
  }
  for (int i = 0; i < kGrid; ++i) {
    const double x = b.x0 + (i + 0.3119) * dx;
    for (int j = 0; j + 1 < kGrid; ++j) scan({x, b.y0 + (j + 0.5731) * dy}, {x, b.y0 + (j + 1.5731) * dy});
  }
  if (static_cast<int>(all.size()) <= count) return all;
  std::vector<Point> out;
  for (int k = 0; k < count; ++k) out.push_back(all[(k * all.size()) / count]);
  return out;
}

ValidationReport check_problem(const ProblemSpec& p) {
  ValidationReport rep;
  rep.problem = p.name;
  auto add = [&](std::string name, double value, double tol, bool ok) {
    rep.checks.push_back({std::move(name), value, tol, ok});
  };

  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> ux(p.domain.x0, p.domain.x1), uy(p.domain.y0, p.domain.y1);

  // coefficient bounds
  double bmin = 1e300, bmax = 0.0;
  for (int k = 0; k < 400; ++k) {
    const Point x(ux(rng), uy(rng));
    for (const auto* b : {&p.beta_plus, &p.beta_minus}) {
      const double v = (*b)(x);
      bmin = std::min(bmin, v);
      bmax = std::max(bmax, v);
    }
  }
  add("beta_positive", bmin, 0.0, bmin > 0.0 && std::isfinite(bmax));

  // level-set gradient against central differences
  {
    double worst = 0.0;
    const double h = 1e-6;
    for (int k = 0; k < 100; ++k) {
      const Point x(ux(rng), uy(rng));
      const Point g = p.levelset.grad(x);
      const Point fd((p.levelset(x + Point(h, 0)) - p.levelset(x - Point(h, 0))) / (2 * h),
                     (p.levelset(x + Point(0, h)) - p.levelset(x - Point(0, h))) / (2 * h));
      worst = std::max(worst, (g - fd).norm() / std::max(1.0, g.norm()));
    }
    add("levelset_gradient", worst, kTolGradPhi, worst <= kTolGradPhi);
  }

  // interface conditions
  const auto pts = sample_interface(p);
  {
    std::vector<double> dv, dn, tang;
    for (const auto& x : pts) {
      const Point n = p.levelset.normal(x);
      const Point t = rotate90(n);
      const Point gp = p.grad_u_plus(x), gm = p.grad_u_minus(x);
      const double jv = p.u_plus(x) - p.u_minus(x);
      const double fp = p.beta_plus(x) * gp.dot(n), fm = p.beta_minus(x) * gm.dot(n);
      dv.push_back((jv - p.g_D(x)) / std::max(1.0, std::abs(jv)));
      dn.push_back((fp - fm - p.g_N(x)) / std::max({1.0, std::abs(fp), std::abs(fm)}));
      tang.push_back(std::max(std::abs(gp.dot(t)), std::abs(gm.dot(t))));
    }
    add("interface_samples", static_cast<double>(pts.size()), 8.0, pts.size() >= 8);
    add("jump_value", max_abs(dv), kTolJump, max_abs(dv) <= kTolJump);
    add("jump_flux", max_abs(dn), kTolJump, max_abs(dn) <= kTolJump);
    const double tmax = max_abs(tang);
    if (p.tangential == Tangential::Zero) add("tangential_zero", tmax, kTolTangentialZero, tmax <= kTolTangentialZero);
    if (p.tangential == Tangential::NonZero)
      add("tangential_nonzero", tmax, kMinTangentialNonZero, tmax > kMinTangentialNonZero);
  }

  // gradient and source consistency at interior points away from the interface
  {
    const double h = kFdStep;
    std::vector<double> gerr, serr;
    double fsup = 0.0;
    int found[2] = {0, 0};
    for (int tries = 0; tries < 200000 && (found[0] < 100 || found[1] < 100); ++tries) {
      const Point x(ux(rng), uy(rng));
      const Side s = p.side(x);
      if (found[side_index(s)] >= 100) continue;
      bool clean = true;
      for (int a = -2; a <= 2 && clean; ++a)
        for (int c = -2; c <= 2 && clean; ++c) {
          const Point y = x + Point(a * h, c * h);
          const double phi = p.levelset(y);
          clean = (s == Side::Plus ? phi > 0.0 : phi < 0.0) && y.x() > p.domain.x0 && y.x() < p.domain.x1 &&
                  y.y() > p.domain.y0 && y.y() < p.domain.y1;
        }
      if (!clean) continue;
      ++found[side_index(s)];
      const auto& u = p.u_piece(s);
      const auto& gu = p.grad_piece(s);
      const auto& beta = p.beta_piece(s);
      auto flux = [&](const Point& y) -> Point { return beta(y) * gu(y); };

      const double hg = 1e-5;
      const Point g = gu(x);
      const Point fdg((u(x + Point(hg, 0)) - u(x - Point(hg, 0))) / (2 * hg),
                      (u(x + Point(0, hg)) - u(x - Point(0, hg))) / (2 * hg));
      gerr.push_back((g - fdg).norm() / std::max(1.0, g.norm()));

      const Point ex(h, 0), ey(0, h);
      const double div =
          (-flux(x + 2 * ex).x() + 8 * flux(x + ex).x() - 8 * flux(x - ex).x() + flux(x - 2 * ex).x() -
           flux(x + 2 * ey).y() + 8 * flux(x + ey).y() - 8 * flux(x - ey).y() + flux(x - 2 * ey).y()) /
          (12 * h);
      const double f = p.f_piece(s)(x);
      fsup = std::max(fsup, std::abs(f));
      serr.push_back(-div - f);
    }
    const double gworst = max_abs(gerr);
    const double sworst = max_abs(serr) / std::max(1.0, fsup);
    add("gradient_consistency", gworst, kTolGradU, gworst <= kTolGradU);
    add("source_points", std::min(found[0], found[1]), 1.0, found[0] > 0 && found[1] > 0);
    add("source_consistency", sworst, kTolSource, sworst <= kTolSource);
  }
  return rep;
}

ValidationReport validate(const ProblemSpec& p) {
  auto rep = check_problem(p);
  for (const auto& c : rep.checks)
    if (!c.ok)
      throw ValidationError(p.name + ": " + c.name + " check failed (value " + std::to_string(c.value) +
                            ", tolerance " + std::to_string(c.tolerance) + ")");
  return rep;
}

}  // namespace ifelab
