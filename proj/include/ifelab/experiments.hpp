#pragma once

#include "ifelab/assembly.hpp"
#include "ifelab/ife_space.hpp"
#include "ifelab/problems.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ifelab {

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;  // broken, weighted by sqrt(beta_h)
};

/// Which piece of the exact solution is compared at a quadrature node.
/// TrueSign follows the level set; DiscreteSide follows Gamma_h (DE), using
/// the smooth extension of each exact piece across the sliver between them.
/// Auto picks DiscreteSide when the value jump is nonzero, since the O(1)
/// jump on the sliver would otherwise cap the L2 rate at 1.
enum class ExactSide { Auto, TrueSign, DiscreteSide };

/// Errors of u_h (+ correction) against the exact solution; u_h and beta_h
/// follow the DE side.
ErrorNorms error_norms(const IfeSpace& space, const ProblemSpec& prob, const Eigen::VectorXd& u,
                       const JumpCorrection* corr = nullptr, ExactSide exact = ExactSide::Auto);

struct ConvergenceRow {
  int N = 0;
  double h = 0.0;
  int dofs = 0;
  double l2 = 0.0;
  std::optional<double> l2_rate;
  double h1 = 0.0;
  std::optional<double> h1_rate;
  int cg_iters = 0;
  double seconds = 0.0;
};

struct ConvergenceTable {
  std::string example;
  std::string method;
  std::string element;
  double beta_plus = 0.0, beta_minus = 0.0;
  std::vector<ConvergenceRow> rows;

  /// rate_k = log2(err_{k-1} / err_k); the first row has none.
  void fill_rates();
};

struct ConvergenceOptions {
  MethodOptions method;
  ElementKind kind = ElementKind::CR;
  std::vector<int> levels{8, 16, 32, 64, 128, 256};
  double rtol = 1e-12;
  Diagonal diagonal = Diagonal::Anti;
  /// Report the interpolation error instead of solving.
  bool interpolation_only = false;
};

/// Powers of two from nmin to nmax.
std::vector<int> power_levels(int nmin, int nmax);

UnfittedMesh build_mesh(const Box& box, int N, ElementKind kind, Diagonal diagonal = Diagonal::Anti);

struct SolveOutcome {
  Eigen::VectorXd u;
  ErrorNorms err;
  int cg_iters = 0;
  double residual = 0.0;
};

/// Assemble, solve and measure on one mesh.
SolveOutcome solve_problem(const IfeSpace& space, const ProblemSpec& prob, const MethodOptions& opts,
                           double rtol = 1e-12);

ConvergenceTable run_convergence(const ProblemSpec& prob, const ConvergenceOptions& opts);

enum class Format { Csv, Text };
std::string emit(const ConvergenceTable& table, Format format);

struct StressOptions {
  std::uint64_t seed = 1;
  int count = 1000;
  double ratio_min = 1e-3;
  double ratio_max = 1e3;
  double max_angle_deg = 175.0;
};

struct StressReport {
  int cases = 0;
  double worst_delta = 0.0;            // |N_j(phi_i) - delta_ij|, both constructions
  double worst_continuity = 0.0;       // |phi+(X) - phi-(X)|, X = D, E
  double worst_flux = 0.0;             // scaled flux mismatch at x_p
  double worst_sm_vs_direct = 0.0;     // coefficient difference
  double worst_gamma_delta_vs_k1k2 = 0.0;
  double min_gamma_delta = 1.0, max_gamma_delta = 0.0;
  double min_bound_margin = 1e300;     // denominator - min(1, rho)
  int rect_cases = 0;
  double rect_worst_delta = 0.0;
  double seconds = 0.0;
  std::string worst_case;              // geometry of the worst delta case

  bool ok(double delta_tol = 1e-10, double sm_tol = 1e-11) const;
  std::string summary() const;
};

/// Random triangles (largest angle up to max_angle_deg) and rectangles with
/// random chord cuts and coefficient ratios.
StressReport basis_stress_test(const StressOptions& opts);

}  // namespace ifelab
