#pragma once

#include "ifelab/ife_space.hpp"
#include "ifelab/problems.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <optional>
#include <vector>

namespace ifelab {

/// Assembly or solve failed (lifting Gram matrix, CG breakdown, ...).
class SolverError : public Error {
public:
  using Error::Error;
};

enum class Method { Plain, New, PPIFEM };

const char* method_name(Method m);
Method parse_method(const std::string& s);

/// Bilinear-form pieces, combinable for diagnostics.
enum Terms : unsigned {
  kVolume = 1u,         // sum_T int beta_h grad u . grad v
  kConsistency = 2u,    // -sum_e int {beta grad u . n}[v] + {beta grad v . n}[u]
  kLifting = 4u,        // 4 sum_e int beta r_e([u]) . r_e([v])
  kPenalty = 8u,        // sum_e eta_e / |e| int [u][v]
};

struct MethodOptions {
  Method method = Method::New;
  /// eta_e = eta_factor * max(beta+(x_e), beta-(x_e)) unless `eta` is set.
  double eta_factor = 10.0;
  std::optional<double> eta;
  /// Overrides the term set implied by `method` when nonzero.
  unsigned terms = 0;

  unsigned active_terms() const;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Lifting data of one interface edge. The W_e basis consists of the
/// gradients of the first n-1 basis functions of each neighbour; the
/// union functions are the basis (and correction) functions of t1 then t2.
struct LiftingBlock {
  int edge = -1;
  std::array<int, 2> elems{-1, -1};
  int n_w = 0;                    // W_e functions per element
  Eigen::MatrixXd M;              // weighted Gram matrix (block diagonal)
  Eigen::MatrixXd M0;             // unweighted Gram matrix
  Eigen::MatrixXd B;              // B(k, i) = int_e {beta w_k . n_e} [psi_i]
  Eigen::MatrixXd P;              // P(i, j) = int_e [psi_i][psi_j]
  Eigen::MatrixXd consistency;    // local matrix of the consistency term
  std::vector<int> dofs;          // global dof of each union function, -1 = correction slot
  std::array<int, 2> nf{0, 0};    // functions contributed by t1 / t2
};

LiftingBlock build_lifting_block(const IfeSpace& space, int edge, const JumpCorrection* corr = nullptr);

/// Coefficients of r_e in the W_e basis for union coefficient vector u.
Eigen::VectorXd lifting_solve(const LiftingBlock& block, const Eigen::VectorXd& u);

/// Value of sum_k c_k w_k at x inside element block.elems[a], on side s.
Point lifted_field(const IfeSpace& space, const LiftingBlock& block, const Eigen::VectorXd& c, int a,
                   Side s, const Point& x);

/// Weighted element stiffness matrix (nf x nf).
Eigen::MatrixXd element_stiffness(const IfeSpace& space, const ElementBasis& b, int elem);

struct AssembledSystem {
  SparseMatrix matrix;                // free dofs only
  Eigen::VectorXd rhs;                // free dofs only
  SparseMatrix full;                  // all dofs
  Eigen::VectorXd load;               // all dofs: int f v minus correction terms
  std::vector<int> free_dofs;
  std::vector<int> dof_to_free;       // -1 for constrained dofs
  Eigen::VectorXd constrained_values; // all dofs, zero at free ones

  /// Full dof vector from a free-dof solution.
  Eigen::VectorXd expand(const Eigen::VectorXd& x_free) const;
};

/// Full matrix of the chosen terms over all dofs (no constraints).
SparseMatrix assemble_matrix(const IfeSpace& space, const MethodOptions& opts);

/// Load vector int f phi_i minus A(u^J, phi_i) when a correction is given.
Eigen::VectorXd assemble_rhs(const IfeSpace& space, const ProblemSpec& prob, const MethodOptions& opts,
                             const JumpCorrection* corr = nullptr);

/// Edge means of the boundary data on boundary edges.
Eigen::VectorXd boundary_values(const IfeSpace& space, const ProblemSpec& prob);

AssembledSystem assemble(const IfeSpace& space, const ProblemSpec& prob, const MethodOptions& opts,
                         const JumpCorrection* corr = nullptr);

struct SolveResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual = 0.0;  // recomputed ||b - A x|| / ||b||
};

/// Jacobi-preconditioned conjugate gradients. maxit <= 0 selects
/// 200 sqrt(n) + 10000.
SolveResult solve_spd(const SparseMatrix& A, const Eigen::VectorXd& b, double rtol = 1e-12, int maxit = 0);

}  // namespace ifelab
