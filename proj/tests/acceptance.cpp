// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails. Each line carries the measured values.

#include "ifelab/experiments.hpp"
#include "oracles.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

using namespace ifelab;
using namespace testing_support;

namespace {

struct Verdict {
  bool ok = true;
  std::ostringstream note;
  void require(bool cond, const std::string& what) {
    if (!cond) ok = false;
    note << (cond ? "" : "!") << what << "  ";
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

ConvergenceTable table(const ProblemSpec& p, Method m, std::vector<int> levels,
                       ElementKind kind = ElementKind::CR, bool interp = false) {
  ConvergenceOptions o;
  o.method.method = m;
  o.levels = std::move(levels);
  o.kind = kind;
  o.interpolation_only = interp;
  return run_convergence(p, o);
}

const ConvergenceRow& last(const ConvergenceTable& t) { return t.rows.back(); }

// Final rates and N=256 magnitudes of the circle example, both methods.
void table_criterion(Verdict& v, double bp, double bm, double l2_ref, double h1_ref) {
  const auto p = example1(bp, bm);
  const auto levels = power_levels(8, 256);
  const auto nw = table(p, Method::New, levels);
  const auto pl = table(p, Method::Plain, levels);
  const auto& a = last(nw);
  const auto& b = last(pl);
  v.require(in(*a.l2_rate, 1.85, 2.15), fmt("New L2 rate %.3f", *a.l2_rate));
  v.require(in(*a.h1_rate, 0.9, 1.1), fmt("New H1 rate %.3f", *a.h1_rate));
  v.require(in(a.l2 / l2_ref, 0.5, 2.0), fmt("New L2 %.3e (ref %.3e)", a.l2, l2_ref));
  v.require(in(a.h1 / h1_ref, 0.5, 2.0), fmt("New H1 %.3e (ref %.3e)", a.h1, h1_ref));
  v.require(in(*b.l2_rate, 0.95, 1.25), fmt("Plain L2 rate %.3f", *b.l2_rate));
  v.require(in(*b.h1_rate, 0.45, 0.7), fmt("Plain H1 rate %.3f", *b.h1_rate));
}

void c1(Verdict& v) { table_criterion(v, 10, 1000, 4.836e-05, 4.461e-01); }
void c2(Verdict& v) { table_criterion(v, 1000, 10, 4.841e-05, 9.738e-01); }

void c3(Verdict& v) {
  const auto p = example3();
  const auto nw = table(p, Method::New, {8, 16, 32});
  for (const auto& r : nw.rows)
    v.require(r.l2 <= 1e-10 && r.h1 <= 1e-10, fmt("New N=%.0f L2 %.1e H1 %.1e", r.N, r.l2, r.h1));
  const auto& b = last(table(p, Method::Plain, {8, 16, 32}));
  v.require(in(*b.l2_rate, 1.35, 1.6), fmt("Plain L2 rate %.3f", *b.l2_rate));
  v.require(in(*b.h1_rate, 0.4, 0.55), fmt("Plain H1 rate %.3f", *b.h1_rate));
}

void c4(Verdict& v) {
  const auto p = example4();
  const auto levels = power_levels(8, 256);
  const auto& a = last(table(p, Method::New, levels));
  v.require(in(*a.l2_rate, 1.85, 2.15), fmt("New L2 rate %.3f", *a.l2_rate));
  v.require(in(*a.h1_rate, 0.9, 1.1), fmt("New H1 rate %.3f", *a.h1_rate));
  v.require(in(a.l2 / 6.714e-05, 0.5, 2.0), fmt("New L2 %.3e", a.l2));
  v.require(in(a.h1 / 3.483e-02, 0.5, 2.0), fmt("New H1 %.3e", a.h1));
  const auto& b = last(table(p, Method::Plain, levels));
  v.require(in(*b.h1_rate, 0.4, 0.65), fmt("Plain H1 rate %.3f", *b.h1_rate));
}

void c5(Verdict& v) {
  const auto p = example2();
  for (Method m : {Method::Plain, Method::New, Method::PPIFEM}) {
    const auto& r = last(table(p, m, power_levels(8, 128)));
    v.require(*r.l2_rate >= 1.85 && *r.h1_rate >= 0.9,
              std::string(method_name(m)) + fmt(" L2 rate %.3f H1 rate %.3f", *r.l2_rate, *r.h1_rate));
  }
}

void c6(Verdict& v) {
  StressOptions o;
  o.seed = 2024;
  o.count = 1000;
  const auto r = basis_stress_test(o);
  v.require(r.worst_delta <= 1e-10, fmt("delta %.2e", r.worst_delta));
  v.require(r.rect_worst_delta <= 1e-10, fmt("rect delta %.2e", r.rect_worst_delta));
  v.require(r.worst_sm_vs_direct <= 1e-11, fmt("SM vs direct %.2e", r.worst_sm_vs_direct));
  v.require(r.min_gamma_delta >= 0.0 && r.max_gamma_delta <= 1.0,
            fmt("gamma'delta in [%.4f, %.4f]", r.min_gamma_delta, r.max_gamma_delta));
  v.require(r.min_bound_margin >= -1e-12, fmt("bound margin %.2e", r.min_bound_margin));
  v.require(r.seconds <= 30.0, fmt("%.1fs", r.seconds));
}

void c7(Verdict& v) {
  const auto p = example1(10, 1000);
  const auto mesh = build_uniform_tri(16, p.domain);
  const IfeSpace space(mesh, p.levelset, p.beta_plus, p.beta_minus);
  for (Method m : {Method::Plain, Method::New, Method::PPIFEM}) {
    MethodOptions o;
    o.method = m;
    const auto c = check_coercivity(space, o, 100, 77);
    v.require(c.asymmetry <= 1e-12, std::string(method_name(m)) + fmt(" asym %.1e", c.asymmetry));
    if (m == Method::New) v.require(c.worst_margin >= -1e-10, fmt("New coercivity margin %.3f", c.worst_margin));
  }
}

void c8(Verdict& v) {
  const auto p = example1(10, 1000);
  double prev = 1e300;
  for (int N : {8, 16, 32, 64}) {
    const auto mesh = build_uniform_tri(N, p.domain);
    const IfeSpace space(mesh, p.levelset, p.beta_plus, p.beta_minus);
    const auto c = check_lifting(space);
    if (N <= 32) v.require(c.residual <= 1e-10, fmt("N=%.0f residual %.1e", N, c.residual));
    v.require(c.sup_ratio <= prev, fmt("N=%.0f ratio %.3f", N, c.sup_ratio));
    prev = c.sup_ratio;
  }
}

void c9(Verdict& v) {
  const auto p = example1(10, 1000);
  for (ElementKind k : {ElementKind::CR, ElementKind::RQ1}) {
    const auto& r = last(table(p, Method::New, power_levels(8, 128), k, true));
    v.require(in(*r.l2_rate, 1.85, 2.15) && in(*r.h1_rate, 0.9, 1.1),
              std::string(k == ElementKind::CR ? "CR" : "RQ1") + fmt(" L2 rate %.3f H1 rate %.3f", *r.l2_rate, *r.h1_rate));
  }
}

void c10(Verdict& v) {
  for (const char* name : {"ex1", "ex2", "ex3", "ex4"}) {
    ProblemSpec p;
    try {
      p = make_problem(name);
    } catch (const ValidationError& e) {
      v.require(false, std::string(name) + " " + e.what());
      continue;
    }
    v.require(check_problem(p).ok(), name);
  }
  auto bad = example4();
  auto f = bad.f_minus;
  bad.f_minus = [f](const Point& x) { return 1.01 * f(x); };
  v.require(!check_problem(bad).ok(), "corrupted source rejected");
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
      {"ex1 circle, beta 10/1000", c1},    {"ex1 circle, beta 1000/10", c2},
      {"ex3 straight line", c3},           {"ex4 nonhomogeneous jumps", c4},
      {"variable coefficients (ex2)", c5}, {"unisolvence suite", c6},
      {"coercivity and symmetry", c7},     {"lifting operator", c8},
      {"interpolation rates", c9},         {"problem self-validation", c10}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.ok;
    std::printf("%s %2zu %-30s %s(%.1fs)\n", v.ok ? "PASS" : "FAIL", i + 1, criteria[i].first,
                v.note.str().c_str(), s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
