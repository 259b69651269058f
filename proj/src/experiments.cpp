#include "ifelab/experiments.hpp"

#include "ifelab/quadrature.hpp"

#include <Eigen/Geometry>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace ifelab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fmt_rate(const std::optional<double>& r) {
  if (!r) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *r);
  return buf;
}

}  // namespace

ErrorNorms error_norms(const IfeSpace& space, const ProblemSpec& prob, const Eigen::VectorXd& u,
                       const JumpCorrection* corr, ExactSide exact) {
  const auto& mesh = space.mesh();
  if (exact == ExactSide::Auto) exact = prob.homogeneous_jumps ? ExactSide::TrueSign : ExactSide::DiscreteSide;
  const bool by_sign = exact == ExactSide::TrueSign;
  double l2 = 0.0, h1 = 0.0;
  std::vector<QuadPoint> pts;
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const bool has_corr = corr && space.cut(t);
    const ElementBasis b = space.element(t, has_corr ? corr : nullptr);
    const auto dofs = mesh.element_edges(t);
    Eigen::Matrix<double, 5, 1> w = Eigen::Matrix<double, 5, 1>::Zero();
    for (int i = 0; i < b.n; ++i) w[i] = u[dofs[i]];
    if (b.nf > b.n) w[b.n] = 1.0;
    std::array<Eigen::Vector4d, 2> poly;
    for (int s = 0; s < 2; ++s) poly[s] = b.coef[s].transpose() * w;

    auto accumulate = [&](std::span<const Point> region, Side s) {
      pts.clear();
      if (!polygon_points(region, kVolumeDegree, pts)) return;
      const Eigen::Vector4d& c = poly[side_index(s)];
      for (const auto& q : pts) {
        const double uh = b.frame.monomials(q.x).dot(c);
        const Point guh = b.frame.monomial_grads(q.x) * c;
        const double e = (by_sign ? prob.u(q.x) : prob.u_piece(s)(q.x)) - uh;
        const Point ge = (by_sign ? prob.grad_u(q.x) : prob.grad_piece(s)(q.x)) - guh;
        l2 += q.w * e * e;
        h1 += q.w * space.beta(s, q.x) * ge.squaredNorm();
      }
    };
    if (b.cut) {
      accumulate(b.cut->poly_plus, Side::Plus);
      accumulate(b.cut->poly_minus, Side::Minus);
    } else {
      const auto v = mesh.vertices(t);
      accumulate(v.span(), b.region == Region::Minus ? Side::Minus : Side::Plus);
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

void ConvergenceTable::fill_rates() {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k == 0) {
      rows[k].l2_rate.reset();
      rows[k].h1_rate.reset();
      continue;
    }
    rows[k].l2_rate = std::log2(rows[k - 1].l2 / rows[k].l2);
    rows[k].h1_rate = std::log2(rows[k - 1].h1 / rows[k].h1);
  }
}

std::vector<int> power_levels(int nmin, int nmax) {
  auto is_pow2 = [](int v) { return v > 0 && (v & (v - 1)) == 0; };
  if (!is_pow2(nmin) || !is_pow2(nmax) || nmin > nmax)
    throw std::invalid_argument("levels must be powers of two with nmin <= nmax");
  if (nmax > 512) throw std::invalid_argument("nmax above 512 is not supported");
  std::vector<int> out;
  for (int n = nmin; n <= nmax; n *= 2) out.push_back(n);
  return out;
}

UnfittedMesh build_mesh(const Box& box, int N, ElementKind kind, Diagonal diagonal) {
  return kind == ElementKind::CR ? build_uniform_tri(N, box, diagonal) : build_uniform_rect(N, box);
}

SolveOutcome solve_problem(const IfeSpace& space, const ProblemSpec& prob, const MethodOptions& opts,
                           double rtol) {
  std::optional<JumpCorrection> corr;
  if (!prob.homogeneous_jumps) corr.emplace(space, prob.g_D, prob.g_N);
  const JumpCorrection* cp = corr ? &*corr : nullptr;
  const auto sys = assemble(space, prob, opts, cp);
  const auto sol = solve_spd(sys.matrix, sys.rhs, rtol);
  SolveOutcome out;
  out.u = sys.expand(sol.x);
  out.cg_iters = sol.iterations;
  out.residual = sol.residual;
  out.err = error_norms(space, prob, out.u, cp);
  return out;
}

ConvergenceTable run_convergence(const ProblemSpec& prob, const ConvergenceOptions& opts) {
  ConvergenceTable table;
  table.example = prob.name;
  table.method = opts.interpolation_only ? "interpolation" : method_name(opts.method.method);
  table.element = opts.kind == ElementKind::CR ? "cr" : "rq1";
  const Point probe(0.0, 0.0);
  table.beta_plus = prob.beta_plus(probe);
  table.beta_minus = prob.beta_minus(probe);
  for (int N : opts.levels) {
    const auto t0 = Clock::now();
    ConvergenceRow row;
    row.N = N;
    try {
      const auto mesh = build_mesh(prob.domain, N, opts.kind, opts.diagonal);
      const IfeSpace space(mesh, prob.levelset, prob.beta_plus, prob.beta_minus);
      row.h = mesh.h();
      row.dofs = mesh.num_dofs();
      if (opts.interpolation_only) {
        const auto I = interpolate_ife(mesh, space.geometry(), prob.levelset, prob.u_plus, prob.u_minus);
        std::optional<JumpCorrection> corr;
        if (!prob.homogeneous_jumps) corr.emplace(space, prob.g_D, prob.g_N);
        const auto e = error_norms(space, prob, I, corr ? &*corr : nullptr);
        row.l2 = e.l2;
        row.h1 = e.h1;
      } else {
        const auto out = solve_problem(space, prob, opts.method, opts.rtol);
        row.l2 = out.err.l2;
        row.h1 = out.err.h1;
        row.cg_iters = out.cg_iters;
      }
    } catch (const Error& e) {
      throw SolverError(prob.name + ", N=" + std::to_string(N) + ": " + e.what());
    }
    row.seconds = seconds_since(t0);
    spdlog::info("{} {} {} N={} L2={:.3e} H1={:.3e} iters={} {:.2f}s", table.example, table.method,
                 table.element, N, row.l2, row.h1, row.cg_iters, row.seconds);
    table.rows.push_back(row);
  }
  table.fill_rates();
  return table;
}

std::string emit(const ConvergenceTable& table, Format format) {
  if (table.rows.empty()) throw std::invalid_argument("emit: empty table");
  std::ostringstream os;
  if (format == Format::Csv) {
    os << "N,h,dofs,L2_err,L2_rate,H1_err,H1_rate,cg_iters,seconds\n";
    for (const auto& r : table.rows) {
      os << r.N << ',' << fmt_sci(r.h) << ',' << r.dofs << ',' << fmt_sci(r.l2) << ',' << fmt_rate(r.l2_rate)
         << ',' << fmt_sci(r.h1) << ',' << fmt_rate(r.h1_rate) << ',' << r.cg_iters << ',' << fmt_sci(r.seconds)
         << '\n';
    }
    return os.str();
  }
  char buf[256];
  os << "# " << table.example << "  method=" << table.method << "  element=" << table.element
     << "  beta=(" << table.beta_plus << ", " << table.beta_minus << ")\n";
  std::snprintf(buf, sizeof buf, "%6s %10s %8s | %10s %6s | %10s %6s | %8s %9s\n", "N", "h", "dofs", "L2 error",
                "rate", "H1 error", "rate", "cg_iters", "seconds");
  os << buf;
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%6d %10s %8d | %10s %6s | %10s %6s | %8d %9.2f\n", r.N, fmt_sci(r.h).c_str(),
                  r.dofs, fmt_sci(r.l2).c_str(), fmt_rate(r.l2_rate).c_str(), fmt_sci(r.h1).c_str(),
                  fmt_rate(r.h1_rate).c_str(), r.cg_iters, r.seconds);
    os << buf;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// basis stress test

namespace {

std::string describe(std::span<const Point> v, const CutElement& cut, double bp, double bm) {
  std::ostringstream os;
  os.precision(17);
  os << "vertices";
  for (const auto& p : v) os << " (" << p.x() << ", " << p.y() << ")";
  os << "; D (" << cut.D.x() << ", " << cut.D.y() << "); E (" << cut.E.x() << ", " << cut.E.y() << ")";
  os << "; beta+ " << bp << "; beta- " << bm;
  return os.str();
}

// Edge parameter: mostly uniform, sometimes very close to an endpoint.
double random_edge_parameter(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < 0.2) {
    const double t = std::pow(10.0, -1.0 - 6.0 * u(rng));
    return u(rng) < 0.5 ? t : 1.0 - t;
  }
  return 0.001 + 0.998 * u(rng);
}

struct CaseResult {
  double delta = 0.0, cont = 0.0, flux = 0.0;
};

CaseResult check_basis(const LocalIFEBasis& B, std::span<const Point> v, const CutElement& cut) {
  CaseResult r;
  const int n = B.n;
  const int nv = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i) {
    const LocalPoly pp = B.piece(i, Side::Plus), pm = B.piece(i, Side::Minus);
    const ScalarField fp = [&](const Point& x) { return pp.value(x); };
    const ScalarField fm = [&](const Point& x) { return pm.value(x); };
    for (int k = 0; k < nv; ++k) {
      const Point& a = v[k];
      const Point& b = v[(k + 1) % nv];
      const auto split = cut.split_of_edge(k);
      const Side sa = segment_sides(cut, a, b, split.has_value())[0];
      const double mean = integrate_cut_edge(fp, fm, a, b, split, sa) / (b - a).norm();
      r.delta = std::max(r.delta, std::abs(mean - (i == k ? 1.0 : 0.0)));
    }
    for (const Point* x : {&cut.D, &cut.E}) r.cont = std::max(r.cont, std::abs(pp.value(*x) - pm.value(*x)));
    const double jump = B.beta_c_plus * pp.grad(cut.x_p).dot(cut.n_h) - B.beta_c_minus * pm.grad(cut.x_p).dot(cut.n_h);
    r.flux = std::max(r.flux, std::abs(jump) * cut.h_T / std::max(B.beta_c_plus, B.beta_c_minus));
  }
  return r;
}

}  // namespace

bool StressReport::ok(double delta_tol, double sm_tol) const {
  return worst_delta <= delta_tol && worst_continuity <= delta_tol && worst_flux <= delta_tol &&
         worst_sm_vs_direct <= sm_tol && min_gamma_delta >= 0.0 && max_gamma_delta <= 1.0 &&
         min_bound_margin >= -1e-12 && rect_worst_delta <= delta_tol;
}

std::string StressReport::summary() const {
  std::ostringstream os;
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "cases %d (+%d rectangles)  delta %.3e  continuity %.3e  flux %.3e  sm-vs-direct %.3e\n"
                "gamma'delta in [%.6f, %.6f]  |gamma'delta - k1k2| %.3e  bound margin %.3e  rect delta %.3e  %.2fs\n",
                cases, rect_cases, worst_delta, worst_continuity, worst_flux, worst_sm_vs_direct, min_gamma_delta,
                max_gamma_delta, worst_gamma_delta_vs_k1k2, min_bound_margin, rect_worst_delta, seconds);
  os << buf;
  if (!worst_case.empty()) os << "worst case: " << worst_case << "\n";
  return os.str();
}

StressReport basis_stress_test(const StressOptions& opts) {
  if (opts.count < 1) throw std::invalid_argument("basis_stress_test: count must be >= 1");
  const auto t0 = Clock::now();
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double deg = std::numbers::pi / 180.0;
  StressReport rep;
  rep.min_gamma_delta = 1.0;
  rep.max_gamma_delta = 0.0;

  auto random_ratio = [&] {
    const double lo = std::log10(opts.ratio_min), hi = std::log10(opts.ratio_max);
    return std::pow(10.0, lo + (hi - lo) * u(rng));
  };
  auto random_cut = [&](std::span<const Point> v) -> std::optional<CutElement> {
    const int nv = static_cast<int>(v.size());
    const int k1 = static_cast<int>(u(rng) * nv) % nv;
    int k2 = static_cast<int>(u(rng) * (nv - 1)) % (nv - 1);
    if (k2 >= k1) ++k2;
    const Point D = v[k1] + random_edge_parameter(rng) * (v[(k1 + 1) % nv] - v[k1]);
    const Point E = v[k2] + random_edge_parameter(rng) * (v[(k2 + 1) % nv] - v[k2]);
    Point n = rotate90(E - D).normalized();
    if (u(rng) < 0.5) n = -n;
    const LevelSet ls{[n, D](const Point& x) { return n.dot(x - D); }, [n](const Point&) -> Point { return n; }};
    if (classify_element(v, ls) != Region::Interface) return std::nullopt;
    return build_cut(v, ls);
  };

  while (rep.cases < opts.count) {
    // triangle with prescribed angles, random size, orientation and position
    const double amax = (60.0 + (opts.max_angle_deg - 60.0) * u(rng)) * deg;
    const double rest = std::numbers::pi - amax;
    const double b = rest * (0.05 + 0.9 * u(rng));
    const double c = rest - b;
    const double scale = std::pow(10.0, -2.0 + 2.0 * u(rng));
    // vertex 0 carries amax; side lengths by the sine rule
    const Point P0(0.0, 0.0);
    const Point P1 = scale * Point(1.0, 0.0);
    const double l02 = scale * std::sin(b) / std::sin(c);
    const Point P2 = l02 * Point(std::cos(amax), std::sin(amax));
    const double th = 2.0 * std::numbers::pi * u(rng);
    const Eigen::Rotation2Dd R(th);
    const Point shift(4.0 * u(rng) - 2.0, 4.0 * u(rng) - 2.0);
    std::array<Point, 3> v{R * P0 + shift, R * P1 + shift, R * P2 + shift};
    const int roll = static_cast<int>(u(rng) * 3) % 3;
    std::rotate(v.begin(), v.begin() + roll, v.end());

    const auto cut = random_cut(v);
    if (!cut) continue;
    const double ratio = random_ratio();
    const double bp = std::pow(10.0, 2.0 * u(rng) - 1.0);
    const double bm = bp / ratio;

    ShermanMorrisonInfo info;
    const auto sm = ife_local_basis_cr_sm(v, *cut, bp, bm, &info);
    const auto dir = ife_local_basis_direct(v, *cut, bp, bm, ElementKind::CR);
    ++rep.cases;

    for (const auto* B : {&sm, &dir}) {
      const auto r = check_basis(*B, v, *cut);
      if (r.delta > rep.worst_delta) {
        rep.worst_delta = r.delta;
        rep.worst_case = describe(v, *cut, bp, bm);
      }
      rep.worst_continuity = std::max(rep.worst_continuity, r.cont);
      rep.worst_flux = std::max(rep.worst_flux, r.flux);
    }
    const double cmax = std::max({1.0, dir.plus.cwiseAbs().maxCoeff(), dir.minus.cwiseAbs().maxCoeff()});
    const double diff = std::max((sm.plus - dir.plus).cwiseAbs().maxCoeff(), (sm.minus - dir.minus).cwiseAbs().maxCoeff());
    rep.worst_sm_vs_direct = std::max(rep.worst_sm_vs_direct, diff / cmax);
    rep.min_gamma_delta = std::min(rep.min_gamma_delta, info.gamma_delta);
    rep.max_gamma_delta = std::max(rep.max_gamma_delta, info.gamma_delta);
    rep.worst_gamma_delta_vs_k1k2 = std::max(rep.worst_gamma_delta_vs_k1k2, std::abs(info.gamma_delta - info.k1 * info.k2));
    rep.min_bound_margin = std::min(rep.min_bound_margin, info.denominator - info.lower_bound);
  }

  while (rep.rect_cases < opts.count) {
    const double w = std::pow(10.0, -2.0 + 2.0 * u(rng));
    const double kappa = 0.5 + 1.5 * u(rng);
    const double hgt = w / kappa;
    const Point o(4.0 * u(rng) - 2.0, 4.0 * u(rng) - 2.0);
    const std::array<Point, 4> v{o, o + Point(w, 0), o + Point(w, hgt), o + Point(0, hgt)};
    const auto cut = random_cut(v);
    if (!cut) continue;
    const double ratio = random_ratio();
    const double bp = std::pow(10.0, 2.0 * u(rng) - 1.0);
    const auto B = ife_local_basis_direct(v, *cut, bp, bp / ratio, ElementKind::RQ1, kappa);
    ++rep.rect_cases;
    const auto r = check_basis(B, v, *cut);
    rep.rect_worst_delta = std::max(rep.rect_worst_delta, r.delta);
    rep.worst_continuity = std::max(rep.worst_continuity, r.cont);
    rep.worst_flux = std::max(rep.worst_flux, r.flux);
  }
  rep.seconds = seconds_since(t0);
  return rep;
}

}  // namespace ifelab
