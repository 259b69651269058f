// ife-lab: convergence runs, basis checks and problem validation.

#include "ifelab/experiments.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace ifelab;

namespace {

enum Exit { kOk = 0, kValidation = 2, kSolver = 3, kRates = 4 };

struct RunArgs {
  std::string example = "ex1";
  std::string method = "new";
  std::string element = "cr";
  std::optional<double> beta_plus, beta_minus;
  int nmin = 8, nmax = 256;
  double rtol = 1e-12;
  std::optional<double> eta;
  std::string format = "csv";
  std::string out;
  bool assert_rates = false;
  double l2_rate_min = 1.85, h1_rate_min = 0.9;
};

int cmd_run(const RunArgs& a) {
  ProblemSpec prob;
  try {
    if (a.example != "ex1" && (a.beta_plus || a.beta_minus))
      spdlog::warn("--beta-plus/--beta-minus only apply to ex1; ignored");
    prob = make_problem(a.example, a.beta_plus.value_or(10.0), a.beta_minus.value_or(1000.0));
  } catch (const ValidationError& e) {
    std::cerr << "validation failed: " << e.what() << "\n";
    return kValidation;
  }

  ConvergenceOptions opts;
  opts.method.method = parse_method(a.method);
  opts.method.eta = a.eta;
  opts.kind = a.element == "rq1" ? ElementKind::RQ1 : ElementKind::CR;
  opts.levels = power_levels(a.nmin, a.nmax);
  opts.rtol = a.rtol;

  ConvergenceTable table;
  try {
    table = run_convergence(prob, opts);
  } catch (const Error& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kSolver;
  }

  const std::string data = emit(table, a.format == "text" ? Format::Text : Format::Csv);
  if (a.out.empty()) {
    std::cout << data;
  } else {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) {
      std::cerr << "cannot open " << a.out << "\n";
      return kSolver;
    }
    f << data;
  }

  if (a.assert_rates) {
    const auto& last = table.rows.back();
    if (!last.l2_rate || !last.h1_rate) {
      std::cerr << "rate assertion needs at least two levels\n";
      return kRates;
    }
    const bool ok = *last.l2_rate >= a.l2_rate_min && *last.h1_rate >= a.h1_rate_min;
    std::fprintf(stderr, "final rates L2 %.3f (min %.3f)  H1 %.3f (min %.3f)  %s\n", *last.l2_rate, a.l2_rate_min,
                 *last.h1_rate, a.h1_rate_min, ok ? "ok" : "FAIL");
    if (!ok) return kRates;
  }
  return kOk;
}

int cmd_basis_check(const StressOptions& o) {
  StressReport rep;
  try {
    rep = basis_stress_test(o);
  } catch (const Error& e) {
    std::cerr << "basis check failed: " << e.what() << "\n";
    return kSolver;
  }
  std::cout << rep.summary();
  if (!rep.ok()) {
    std::cerr << "basis check: residual above threshold\n";
    return kSolver;
  }
  return kOk;
}

int cmd_validate(const std::string& name) {
  ProblemSpec p;
  try {
    p = make_problem(name);
  } catch (const ValidationError& e) {
    std::cerr << "validation failed: " << e.what() << "\n";
    return kValidation;
  }
  const auto rep = check_problem(p);
  std::cout << rep.summary();
  return rep.ok() ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("ife-lab"));
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"Nonconforming immersed finite element experiments"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Convergence table for one example and method");
  run->add_option("--example", ra.example)->check(CLI::IsMember({"ex1", "ex2", "ex3", "ex4"}));
  run->add_option("--method", ra.method)->check(CLI::IsMember({"plain", "new", "ppifem"}));
  run->add_option("--element", ra.element)->check(CLI::IsMember({"cr", "rq1"}));
  run->add_option("--beta-plus", ra.beta_plus, "ex1 only")->check(CLI::PositiveNumber);
  run->add_option("--beta-minus", ra.beta_minus, "ex1 only")->check(CLI::PositiveNumber);
  run->add_option("--nmin", ra.nmin)->capture_default_str();
  run->add_option("--nmax", ra.nmax)->capture_default_str();
  run->add_option("--rtol", ra.rtol, "CG relative tolerance")->capture_default_str();
  run->add_option("--eta", ra.eta, "Penalty parameter (ppifem); default 10 max(beta)")->check(CLI::PositiveNumber);
  run->add_option("--format", ra.format)->check(CLI::IsMember({"csv", "text"}));
  run->add_option("--out", ra.out, "Write the table here instead of stdout");
  run->add_flag("--assert-rates", ra.assert_rates, "Exit 4 if final rates fall below the minima");
  run->add_option("--l2-rate-min", ra.l2_rate_min)->capture_default_str();
  run->add_option("--h1-rate-min", ra.h1_rate_min)->capture_default_str();

  StressOptions so;
  auto* bc = app.add_subcommand("basis-check", "Random unisolvence stress test");
  bc->add_option("--seed", so.seed)->capture_default_str();
  bc->add_option("--count", so.count)->check(CLI::PositiveNumber)->capture_default_str();
  bc->add_option("--ratio-max", so.ratio_max, "beta ratios span [1/r, r]")->check(CLI::Range(1.0, 1e12))
      ->capture_default_str();
  bc->add_option("--max-angle", so.max_angle_deg)->check(CLI::Range(60.0, 179.9))->capture_default_str();

  std::string vname;
  auto* val = app.add_subcommand("validate", "Jump and source consistency checks of a catalog problem");
  val->add_option("--example", vname)->required()->check(CLI::IsMember({"ex1", "ex2", "ex3", "ex4"}));

  // usage errors count as validation failures; --help still exits 0
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  if (verbose) spdlog::set_level(spdlog::level::info);

  try {
    if (*run) return cmd_run(ra);
    if (*bc) {
      so.ratio_min = 1.0 / so.ratio_max;
      return cmd_basis_check(so);
    }
    if (*val) return cmd_validate(vname);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
