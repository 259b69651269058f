#include "ifelab/assembly.hpp"

#include "ifelab/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <spdlog/spdlog.h>

#include <cmath>
#include <string>

namespace ifelab {

namespace {

constexpr double kMaxGramCondition = 1e12;

struct SidedPoint {
  Point x;
  double w;
  Side s;
};

void element_points(const IfeSpace& space, const ElementBasis& b, int elem, std::vector<SidedPoint>& out) {
  out.clear();
  std::vector<QuadPoint> tmp;
  auto push = [&](std::span<const Point> poly, Side s) {
    tmp.clear();
    if (!polygon_points(poly, kVolumeDegree, tmp)) {
      spdlog::debug("element {}: degenerate sub-polygon skipped", elem);
      return;
    }
    for (const auto& q : tmp) out.push_back({q.x, q.w, s});
  };
  if (b.cut) {
    push(b.cut->poly_plus, Side::Plus);
    push(b.cut->poly_minus, Side::Minus);
  } else {
    const auto v = space.mesh().vertices(elem);
    push(v.span(), b.region == Region::Minus ? Side::Minus : Side::Plus);
  }
}

Eigen::MatrixXd element_gram(const IfeSpace& space, const ElementBasis& b, int elem, bool weighted) {
  std::vector<SidedPoint> pts;
  element_points(space, b, elem, pts);
  const int nf = b.nf;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nf, nf);
  for (const auto& q : pts) {
    const Eigen::Matrix<double, 5, 2> G = b.grads(q.s, q.x);
    const double w = weighted ? q.w * space.beta(q.s, q.x) : q.w;
    K.noalias() += w * G.topRows(nf) * G.topRows(nf).transpose();
  }
  return K;
}

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& M, int edge) {
  if (M.rows() == 0) return M;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  const double rc = ldlt.rcond();
  if (ldlt.info() != Eigen::Success || !(rc > 1.0 / kMaxGramCondition) || !ldlt.isPositive())
    throw SolverError("lifting Gram matrix of edge " + std::to_string(edge) + " is singular or ill-conditioned");
  return ldlt.solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
}

double edge_eta(const IfeSpace& space, const MethodOptions& opts, const Point& xe) {
  if (opts.eta) return *opts.eta;
  return opts.eta_factor * std::max(space.beta(Side::Plus, xe), space.beta(Side::Minus, xe));
}

// Local matrix of all edge terms over the union functions of the block.
Eigen::MatrixXd edge_matrix(const IfeSpace& space, const LiftingBlock& blk, const MethodOptions& opts,
                            unsigned terms) {
  const int nu = static_cast<int>(blk.dofs.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nu, nu);
  if (terms & kConsistency) K += blk.consistency;
  if (terms & kLifting) K += 4.0 * blk.B.transpose() * checked_inverse(blk.M, blk.edge) * blk.B;
  if (terms & kPenalty) {
    const auto& ed = space.mesh().edges[blk.edge];
    const Point xe = space.geometry().edge_cuts[blk.edge]->point;
    K += edge_eta(space, opts, xe) / ed.length * blk.P;
  }
  return K;
}

struct Assembly {
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd load;
};

void assemble_impl(const IfeSpace& space, const ProblemSpec* prob, const MethodOptions& opts,
                   const JumpCorrection* corr, bool want_matrix, Assembly& out) {
  const auto& mesh = space.mesh();
  const unsigned terms = opts.active_terms();
  const int ndof = mesh.num_dofs();
  out.load = Eigen::VectorXd::Zero(ndof);
  if (want_matrix) out.triplets.reserve(static_cast<std::size_t>(mesh.num_elements()) * 16);

  std::vector<SidedPoint> pts;
  std::vector<QuadPoint> qs;
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const bool has_corr = corr && space.cut(t);
    const ElementBasis b = space.element(t, has_corr ? corr : nullptr);
    const int n = b.n;
    const auto dofs = mesh.element_edges(t);
    element_points(space, b, t, pts);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(b.nf, b.nf);
    Eigen::VectorXd F = Eigen::VectorXd::Zero(n);
    for (const auto& q : pts) {
      const Eigen::Matrix<double, 5, 2> G = b.grads(q.s, q.x);
      if (terms & kVolume) K.noalias() += q.w * space.beta(q.s, q.x) * G.topRows(b.nf) * G.topRows(b.nf).transpose();
      if (prob) F += q.w * prob->f(q.x) * b.values(q.s, q.x).head(n);
    }
    // Flux jump source: integrating by parts against a nonzero [beta du/dn]
    // leaves -int_{DE} g_N v, which the shifted trial space does not absorb.
    if (has_corr && prob) {
      qs.clear();
      segment_points(b.cut->D, b.cut->E, kEdgePoints, qs);
      for (const auto& q : qs) F -= q.w * prob->g_N(q.x) * b.values(Side::Plus, q.x).head(n);
    }
    for (int i = 0; i < n; ++i) {
      out.load[dofs[i]] += F[i];
      if (b.nf > n) out.load[dofs[i]] -= K(i, n);
      if (want_matrix)
        for (int j = 0; j < n; ++j) out.triplets.emplace_back(dofs[i], dofs[j], K(i, j));
    }
  }

  const unsigned edge_terms = terms & (kConsistency | kLifting | kPenalty);
  if (!edge_terms) return;
  for (int e : space.geometry().interface_edges) {
    const LiftingBlock blk = build_lifting_block(space, e, corr);
    const Eigen::MatrixXd K = edge_matrix(space, blk, opts, edge_terms);
    const int nu = static_cast<int>(blk.dofs.size());
    for (int i = 0; i < nu; ++i) {
      if (blk.dofs[i] < 0) continue;
      for (int j = 0; j < nu; ++j) {
        if (blk.dofs[j] < 0)
          out.load[blk.dofs[i]] -= K(i, j);
        else if (want_matrix)
          out.triplets.emplace_back(blk.dofs[i], blk.dofs[j], K(i, j));
      }
    }
  }
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::Plain: return "plain";
    case Method::New: return "new";
    case Method::PPIFEM: return "ppifem";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "plain") return Method::Plain;
  if (s == "new") return Method::New;
  if (s == "ppifem") return Method::PPIFEM;
  throw std::invalid_argument("unknown method '" + s + "' (expected plain, new or ppifem)");
}

unsigned MethodOptions::active_terms() const {
  if (terms) return terms;
  switch (method) {
    case Method::Plain: return kVolume;
    case Method::New: return kVolume | kConsistency | kLifting;
    case Method::PPIFEM: return kVolume | kConsistency | kPenalty;
  }
  return kVolume;
}

Eigen::MatrixXd element_stiffness(const IfeSpace& space, const ElementBasis& b, int elem) {
  return element_gram(space, b, elem, true);
}

LiftingBlock build_lifting_block(const IfeSpace& space, int edge, const JumpCorrection* corr) {
  const auto& mesh = space.mesh();
  const auto& geo = space.geometry();
  if (!geo.is_interface_edge(edge)) throw std::invalid_argument("build_lifting_block: not an interface edge");
  const auto& ed = mesh.edges[edge];
  const bool boundary = ed.boundary();
  const int na = boundary ? 1 : 2;
  const double omega = boundary ? 1.0 : 0.5;
  const int n = space.n_local();

  LiftingBlock blk;
  blk.edge = edge;
  blk.elems = {ed.t1, ed.t2};
  blk.n_w = n - 1;

  std::array<ElementBasis, 2> basis;
  std::array<int, 2> offset{0, 0};
  for (int a = 0; a < na; ++a) {
    const int t = blk.elems[a];
    basis[a] = space.element(t, corr);
    if (!basis[a].cut) throw GeometryError("interface edge " + std::to_string(edge) + " next to an uncut element");
    blk.nf[a] = basis[a].nf;
    offset[a] = static_cast<int>(blk.dofs.size());
    const auto dofs = mesh.element_edges(t);
    for (int i = 0; i < basis[a].nf; ++i) blk.dofs.push_back(i < n ? dofs[i] : -1);
  }
  const int nu = static_cast<int>(blk.dofs.size());
  const int nw = na * blk.n_w;
  blk.M = Eigen::MatrixXd::Zero(nw, nw);
  blk.M0 = Eigen::MatrixXd::Zero(nw, nw);
  blk.B = Eigen::MatrixXd::Zero(nw, nu);
  blk.P = Eigen::MatrixXd::Zero(nu, nu);
  blk.consistency = Eigen::MatrixXd::Zero(nu, nu);

  for (int a = 0; a < na; ++a) {
    const auto K = element_gram(space, basis[a], blk.elems[a], true);
    const auto K0 = element_gram(space, basis[a], blk.elems[a], false);
    blk.M.block(a * blk.n_w, a * blk.n_w, blk.n_w, blk.n_w) = K.topLeftCorner(blk.n_w, blk.n_w);
    blk.M0.block(a * blk.n_w, a * blk.n_w, blk.n_w, blk.n_w) = K0.topLeftCorner(blk.n_w, blk.n_w);
  }

  const Point p0 = mesh.nodes[ed.nodes[0]];
  const Point p1 = mesh.nodes[ed.nodes[1]];
  const Point split = geo.edge_cuts[edge]->point;
  const Point& ne = ed.normal;
  std::array<std::array<Side, 2>, 2> sides;
  for (int a = 0; a < na; ++a) sides[a] = segment_sides(*basis[a].cut, p0, p1, true);

  std::vector<QuadPoint> qp;
  Eigen::VectorXd J(nu), Fn(nu);
  for (int piece = 0; piece < 2; ++piece) {
    qp.clear();
    if (piece == 0)
      segment_points(p0, split, kEdgePoints, qp);
    else
      segment_points(split, p1, kEdgePoints, qp);
    for (const auto& q : qp) {
      std::array<Eigen::Matrix<double, 5, 2>, 2> G;
      std::array<double, 2> beta{};
      for (int a = 0; a < na; ++a) {
        const Side s = sides[a][piece];
        const auto v = basis[a].values(s, q.x);
        G[a] = basis[a].grads(s, q.x);
        beta[a] = space.beta(s, q.x);
        const double sign = a == 0 ? 1.0 : -1.0;
        for (int i = 0; i < basis[a].nf; ++i) {
          J[offset[a] + i] = sign * v[i];
          Fn[offset[a] + i] = omega * beta[a] * G[a].row(i).dot(ne);
        }
      }
      blk.consistency.noalias() -= q.w * (Fn * J.transpose() + J * Fn.transpose());
      blk.P.noalias() += q.w * J * J.transpose();
      for (int a = 0; a < na; ++a)
        for (int k = 0; k < blk.n_w; ++k)
          blk.B.row(a * blk.n_w + k) += (q.w * omega * beta[a] * G[a].row(k).dot(ne)) * J.transpose();
    }
  }
  return blk;
}

Eigen::VectorXd lifting_solve(const LiftingBlock& block, const Eigen::VectorXd& u) {
  return checked_inverse(block.M, block.edge) * (block.B * u);
}

Point lifted_field(const IfeSpace& space, const LiftingBlock& block, const Eigen::VectorXd& c, int a,
                   Side s, const Point& x) {
  const ElementBasis b = space.element(block.elems[a]);
  const Eigen::Matrix<double, 5, 2> G = b.grads(s, x);
  Point r = Point::Zero();
  for (int k = 0; k < block.n_w; ++k) r += c[a * block.n_w + k] * G.row(k).transpose();
  return r;
}

SparseMatrix assemble_matrix(const IfeSpace& space, const MethodOptions& opts) {
  Assembly a;
  assemble_impl(space, nullptr, opts, nullptr, true, a);
  const int n = space.mesh().num_dofs();
  SparseMatrix A(n, n);
  A.setFromTriplets(a.triplets.begin(), a.triplets.end());
  return A;
}

Eigen::VectorXd assemble_rhs(const IfeSpace& space, const ProblemSpec& prob, const MethodOptions& opts,
                             const JumpCorrection* corr) {
  Assembly a;
  assemble_impl(space, &prob, opts, corr, false, a);
  return a.load;
}

Eigen::VectorXd boundary_values(const IfeSpace& space, const ProblemSpec& prob) {
  const auto& mesh = space.mesh();
  const auto& geo = space.geometry();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(mesh.num_dofs());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edges[e];
    if (!ed.boundary()) continue;
    const Point& a = mesh.nodes[ed.nodes[0]];
    const Point& b = mesh.nodes[ed.nodes[1]];
    std::optional<Point> split;
    if (geo.is_interface_edge(e)) split = geo.edge_cuts[e]->point;
    g[e] = integrate_cut_edge(prob.g_boundary, prob.g_boundary, a, b, split, Side::Plus) / ed.length;
  }
  return g;
}

Eigen::VectorXd AssembledSystem::expand(const Eigen::VectorXd& x_free) const {
  Eigen::VectorXd x = constrained_values;
  for (std::size_t k = 0; k < free_dofs.size(); ++k) x[free_dofs[k]] = x_free[static_cast<Eigen::Index>(k)];
  return x;
}

AssembledSystem assemble(const IfeSpace& space, const ProblemSpec& prob, const MethodOptions& opts,
                         const JumpCorrection* corr) {
  const auto& mesh = space.mesh();
  Assembly a;
  assemble_impl(space, &prob, opts, corr, true, a);
  const int n = mesh.num_dofs();
  AssembledSystem sys;
  sys.full.resize(n, n);
  sys.full.setFromTriplets(a.triplets.begin(), a.triplets.end());
  sys.load = std::move(a.load);
  sys.constrained_values = boundary_values(space, prob);

  sys.dof_to_free.assign(n, -1);
  for (int e = 0; e < n; ++e) {
    if (mesh.edges[e].boundary()) continue;
    sys.dof_to_free[e] = static_cast<int>(sys.free_dofs.size());
    sys.free_dofs.push_back(e);
  }
  const int nf = static_cast<int>(sys.free_dofs.size());
  sys.rhs.resize(nf);
  for (int k = 0; k < nf; ++k) sys.rhs[k] = sys.load[sys.free_dofs[k]];

  std::vector<Eigen::Triplet<double>> tf;
  tf.reserve(sys.full.nonZeros());
  for (int col = 0; col < sys.full.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(sys.full, col); it; ++it) {
      const int fr = sys.dof_to_free[it.row()];
      if (fr < 0) continue;
      const int fc = sys.dof_to_free[col];
      if (fc >= 0)
        tf.emplace_back(fr, fc, it.value());
      else
        sys.rhs[fr] -= it.value() * sys.constrained_values[col];
    }
  }
  sys.matrix.resize(nf, nf);
  sys.matrix.setFromTriplets(tf.begin(), tf.end());
  return sys;
}

SolveResult solve_spd(const SparseMatrix& A, const Eigen::VectorXd& b, double rtol, int maxit) {
  if (!(rtol > 0.0 && rtol < 1.0)) throw std::invalid_argument("solve_spd: rtol must lie in (0, 1)");
  const Eigen::Index n = b.size();
  if (maxit <= 0) maxit = static_cast<int>(200.0 * std::sqrt(static_cast<double>(n))) + 10000;
  SolveResult res;
  res.x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return res;

  Eigen::VectorXd dinv = A.diagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(dinv[i] > 0.0)) throw SolverError("matrix not SPD: nonpositive diagonal entry at row " + std::to_string(i));
    dinv[i] = 1.0 / dinv[i];
  }
  Eigen::VectorXd r = b, z = dinv.cwiseProduct(r), p = z, Ap(n);
  double rz = r.dot(z);
  int it = 0;
  double rel = 1.0;
  while (it < maxit) {
    Ap.noalias() = A * p;
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) throw SolverError("matrix not SPD: p'Ap = " + std::to_string(pAp) + " at iteration " + std::to_string(it));
    const double alpha = rz / pAp;
    res.x.noalias() += alpha * p;
    r.noalias() -= alpha * Ap;
    ++it;
    rel = r.norm() / bnorm;
    if (rel <= rtol) break;
    z = dinv.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  res.iterations = it;
  res.residual = (b - A * res.x).norm() / bnorm;
  if (rel > rtol)
    throw SolverError("CG did not converge in " + std::to_string(maxit) + " iterations (residual " +
                      std::to_string(rel) + ")");
  return res;
}

}  // namespace ifelab
