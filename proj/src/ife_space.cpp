#include "ifelab/ife_space.hpp"

#include "ifelab/quadrature.hpp"

#include <Eigen/LU>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace ifelab {

namespace {

constexpr double kWarnRcond = 1e-12;
constexpr double kMinDenominator = 1e-14;

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

// Mean of the frame monomials over segment a->b times the weight fraction.
void accumulate_segment(const LocalFrame& frame, const Point& a, const Point& b, double inv_len,
                        Eigen::Vector4d& row) {
  const double len = (b - a).norm();
  for (const auto& q : gauss_interval(kEdgePoints).points)
    row += q.w * len * inv_len * frame.monomials(a + q.x.x() * (b - a));
}

bool point_on_edge(const CutElement& cut, int which, int k, int nv) {
  if (cut.cut_edges[which] >= 0) return cut.cut_edges[which] == k;
  const int v = cut.cut_vertices[which];
  return v == k || v == (k + 1) % nv;
}

Eigen::MatrixXd solve_dense(const Eigen::MatrixXd& A, const Eigen::MatrixXd& rhs, double* rcond_out,
                            const char* what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rc = lu.rcond();
  if (rcond_out) *rcond_out = rc;
  if (!(rc > 0.0) || !std::isfinite(rc)) throw UnisolvenceError(std::string(what) + ": singular local system");
  if (rc < kWarnRcond) spdlog::warn("{}: local system condition estimate {:.3e} exceeds 1e12", what, 1.0 / rc);
  return lu.solve(rhs);
}

// Rows of the interface conditions (continuity, [d], flux) of the dense
// system; returns the number of rows written.
int interface_rows(const LocalFrame& frame, const CutElement& cut, double bp, double bm,
                   Eigen::MatrixXd& A) {
  const int m = frame.size();
  int r = 0;
  for (const Point* p : {&cut.D, &cut.E}) {
    const Eigen::Vector4d mono = frame.monomials(*p);
    A.block(r, 0, 1, m) = mono.head(m).transpose();
    A.block(r, m, 1, m) = -mono.head(m).transpose();
    ++r;
  }
  if (frame.kind == ElementKind::RQ1) {
    A(r, 3) = 1.0;
    A(r, m + 3) = -1.0;
    ++r;
  }
  // scaled by h / max(beta) so the row is O(1)
  const double s = frame.scale / std::max(bp, bm);
  const Eigen::Vector4d gn = (frame.monomial_grads(cut.x_p).transpose() * cut.n_h) * s;
  A.block(r, 0, 1, m) = bp * gn.head(m).transpose();
  A.block(r, m, 1, m) = -bm * gn.head(m).transpose();
  ++r;
  return r;
}

Eigen::MatrixXd dense_system(std::span<const Point> vertices, const CutElement& cut,
                             const LocalFrame& frame, double bp, double bm, int& first_edge_row) {
  const int m = frame.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  first_edge_row = interface_rows(frame, cut, bp, bm, A);
  for (int k = 0; k < m; ++k) {
    Eigen::Vector4d rp, rm;
    edge_mean_rows(frame, vertices, cut, k, rp, rm);
    A.block(first_edge_row + k, 0, 1, m) = rp.head(m).transpose();
    A.block(first_edge_row + k, m, 1, m) = rm.head(m).transpose();
  }
  return A;
}

}  // namespace

LocalFrame element_frame(std::span<const Point> vertices, ElementKind kind, double kappa) {
  LocalFrame f;
  f.kind = kind;
  f.origin = vertex_centroid(vertices);
  f.scale = diameter(vertices);
  f.kappa = kind == ElementKind::RQ1 ? kappa : 1.0;
  return f;
}

Eigen::Matrix4d standard_coefficients(std::span<const Point> vertices, const LocalFrame& frame) {
  Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
  const int nv = static_cast<int>(vertices.size());
  if (frame.kind == ElementKind::CR) {
    if (nv != 3) throw std::invalid_argument("standard_coefficients: CR needs a triangle");
    std::array<Point, 3> p;
    for (int k = 0; k < 3; ++k) p[k] = (vertices[k] - frame.origin) / frame.scale;
    const double two_a = cross(p[1] - p[0], p[2] - p[0]);
    if (std::abs(two_a) < 1e-14) throw UnisolvenceError("standard_coefficients: degenerate triangle");
    for (int k = 0; k < 3; ++k) {
      // mu_j of the vertex opposite edge k, lambda_k = 1 - 2 mu_j
      const int j = (k + 2) % 3;
      const Point& b = p[(j + 1) % 3];
      const Point& c = p[(j + 2) % 3];
      const double a0 = cross(b, c) / two_a;
      const double a1 = (b.y() - c.y()) / two_a;
      const double a2 = (c.x() - b.x()) / two_a;
      C.row(k) << 1.0 - 2.0 * a0, -2.0 * a1, -2.0 * a2, 0.0;
    }
    return C;
  }
  if (nv != 4) throw std::invalid_argument("standard_coefficients: RQ1 needs a rectangle");
  Eigen::Matrix4d E = Eigen::Matrix4d::Zero();
  for (int k = 0; k < 4; ++k) {
    const Point& a = vertices[k];
    const Point& b = vertices[(k + 1) % 4];
    Eigen::Vector4d row = Eigen::Vector4d::Zero();
    accumulate_segment(frame, a, b, 1.0 / (b - a).norm(), row);
    E.row(k) = row.transpose();
  }
  Eigen::PartialPivLU<Eigen::Matrix4d> lu(E);
  if (!(lu.rcond() > 1e-14)) throw UnisolvenceError("standard_coefficients: singular DOF matrix");
  // E C^T = I
  C = lu.inverse().transpose();
  return C;
}

std::vector<LocalPoly> standard_local_basis(std::span<const Point> vertices, ElementKind kind,
                                            double kappa) {
  const LocalFrame f = element_frame(vertices, kind, kappa);
  const Eigen::Matrix4d C = standard_coefficients(vertices, f);
  std::vector<LocalPoly> out;
  for (int i = 0; i < f.size(); ++i) out.push_back({f, C.row(i).transpose()});
  return out;
}

void edge_mean_rows(const LocalFrame& frame, std::span<const Point> vertices, const CutElement& cut,
                    int k, Eigen::Vector4d& row_plus, Eigen::Vector4d& row_minus) {
  const int nv = static_cast<int>(vertices.size());
  const Point& a = vertices[k];
  const Point& b = vertices[(k + 1) % nv];
  const double inv_len = 1.0 / (b - a).norm();
  const auto split = cut.split_of_edge(k);
  const auto sides = segment_sides(cut, a, b, split.has_value());
  row_plus.setZero();
  row_minus.setZero();
  auto& r0 = sides[0] == Side::Plus ? row_plus : row_minus;
  auto& r1 = sides[1] == Side::Plus ? row_plus : row_minus;
  if (!split) {
    accumulate_segment(frame, a, b, inv_len, r0);
  } else {
    accumulate_segment(frame, a, *split, inv_len, r0);
    accumulate_segment(frame, *split, b, inv_len, r1);
  }
}

double edge_mean(const PiecewisePoly& f, std::span<const Point> vertices, const CutElement& cut,
                 int k) {
  Eigen::Vector4d rp, rm;
  edge_mean_rows(f.plus.frame, vertices, cut, k, rp, rm);
  return rp.dot(f.plus.c) + rm.dot(f.minus.c);
}

LocalIFEBasis ife_local_basis_direct(std::span<const Point> vertices, const CutElement& cut,
                                     double beta_c_plus, double beta_c_minus, ElementKind kind,
                                     double kappa, double* rcond) {
  if (!(beta_c_plus > 0.0) || !(beta_c_minus > 0.0))
    throw std::invalid_argument("ife_local_basis_direct: coefficients must be positive");
  LocalIFEBasis B;
  B.frame = element_frame(vertices, kind, kappa);
  B.n = B.frame.size();
  B.cut = &cut;
  B.beta_c_plus = beta_c_plus;
  B.beta_c_minus = beta_c_minus;
  const int m = B.n;
  int e0 = 0;
  const Eigen::MatrixXd A = dense_system(vertices, cut, B.frame, beta_c_plus, beta_c_minus, e0);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(2 * m, m);
  for (int i = 0; i < m; ++i) rhs(e0 + i, i) = 1.0;
  const Eigen::MatrixXd X = solve_dense(A, rhs, rcond, "ife_local_basis_direct");
  for (int i = 0; i < m; ++i) {
    B.plus.row(i).head(m) = X.col(i).head(m).transpose();
    B.minus.row(i).head(m) = X.col(i).tail(m).transpose();
  }
  return B;
}

LocalIFEBasis ife_local_basis_cr_sm(std::span<const Point> vertices, const CutElement& cut,
                                    double beta_c_plus, double beta_c_minus,
                                    ShermanMorrisonInfo* info) {
  if (vertices.size() != 3) throw std::invalid_argument("ife_local_basis_cr_sm: triangle required");
  if (!(beta_c_plus > 0.0) || !(beta_c_minus > 0.0))
    throw std::invalid_argument("ife_local_basis_cr_sm: coefficients must be positive");

  // Isolated vertex A3: not on DE, and its two edges carry D and E.
  int a3 = -1, e1 = -1, e2 = -1;
  for (int v = 0; v < 3 && a3 < 0; ++v) {
    if (cut.cut_vertices[0] == v || cut.cut_vertices[1] == v) continue;
    const int ea = v, eb = (v + 2) % 3;  // edges v->v+1 and v-1->v
    if (point_on_edge(cut, 0, ea, 3) && point_on_edge(cut, 1, eb, 3)) {
      a3 = v, e1 = ea, e2 = eb;
    } else if (point_on_edge(cut, 0, eb, 3) && point_on_edge(cut, 1, ea, 3)) {
      a3 = v, e1 = eb, e2 = ea;
    }
  }
  if (a3 < 0) throw UnisolvenceError("ife_local_basis_cr_sm: no isolated vertex (corrupted cut)");
  const int e3 = (a3 + 1) % 3;

  const Point& A3 = vertices[a3];
  const Point& D = cut.D;  // on e1
  const Point& E = cut.E;  // on e2
  const Point& n = cut.n_h;
  const bool swapped = side_of_cut(A3, cut) == Side::Plus;
  const double rho = swapped ? beta_c_minus / beta_c_plus : beta_c_plus / beta_c_minus;
  const double rm1 = rho - 1.0;

  auto len = [&](int k) { return (vertices[(k + 1) % 3] - vertices[k]).norm(); };
  const double LA3 = n.dot(A3 - D);
  const Eigen::Vector2d delta(0.5 * (A3 - D).norm() * LA3 / len(e1), 0.5 * (A3 - E).norm() * LA3 / len(e2));

  LocalIFEBasis B;
  B.frame = element_frame(vertices, ElementKind::CR);
  B.n = 3;
  B.cut = &cut;
  B.beta_c_plus = beta_c_plus;
  B.beta_c_minus = beta_c_minus;
  const Eigen::Matrix4d S = standard_coefficients(vertices, B.frame);
  const Eigen::Matrix<double, 2, 4> G = B.frame.monomial_grads(cut.x_p);
  auto gn = [&](int k) { return n.dot(G * S.row(k).transpose()); };
  const Eigen::Vector2d gamma(gn(e1), gn(e2));
  const double g3 = gn(e3);
  const double gd = gamma.dot(delta);
  const double denom = 1.0 + rm1 * gd;
  if (info) {
    info->isolated_vertex = a3;
    info->swapped = swapped;
    info->k1 = (A3 - D).norm() / len(e1);
    info->k2 = (A3 - E).norm() / len(e2);
    info->gamma_delta = gd;
    info->denominator = denom;
    info->lower_bound = std::min(1.0, rho);
  }
  if (!(denom > kMinDenominator)) throw UnisolvenceError("ife_local_basis_cr_sm: vanishing denominator");

  Eigen::Vector4d L(n.dot(B.frame.origin - D), B.frame.scale * n.x(), B.frame.scale * n.y(), 0.0);
  Eigen::Matrix4d& big = swapped ? B.minus : B.plus;
  Eigen::Matrix4d& small = swapped ? B.plus : B.minus;
  for (int i = 0; i < 3; ++i) {
    const double N1 = (i == e1), N2 = (i == e2), N3 = (i == e3);
    // Sherman-Morrison solve, simplified so that no O(rho) terms cancel:
    // c = N - (rho-1) t delta, gamma.c + N3 g3 = t, t = (gamma.N + N3 g3) / denom.
    const Eigen::Vector2d N12(N1, N2);
    const double t = (gamma.dot(N12) + N3 * g3) / denom;
    const Eigen::Vector2d c = N12 - rm1 * t * delta;
    const Eigen::Vector4d pb = c[0] * S.row(e1).transpose() + c[1] * S.row(e2).transpose() + N3 * S.row(e3).transpose();
    const double c0 = rm1 * t;
    big.row(i) = pb.transpose();
    small.row(i) = (pb + c0 * L).transpose();
  }
  return B;
}

PiecewisePoly jump_correction_local(std::span<const Point> vertices, const CutElement& cut,
                                    double beta_c_plus, double beta_c_minus, const ScalarField& g_D,
                                    const ScalarField& g_N, ElementKind kind, double kappa) {
  const LocalFrame frame = element_frame(vertices, kind, kappa);
  const int m = frame.size();
  int e0 = 0;
  const Eigen::MatrixXd A = dense_system(vertices, cut, frame, beta_c_plus, beta_c_minus, e0);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * m);
  rhs[0] = g_D(cut.D);
  rhs[1] = g_D(cut.E);
  rhs[e0 - 1] = 0.5 * (g_N(cut.D) + g_N(cut.E)) * frame.scale / std::max(beta_c_plus, beta_c_minus);
  const Eigen::VectorXd x = solve_dense(A, rhs, nullptr, "jump_correction_local");
  PiecewisePoly p;
  p.plus.frame = p.minus.frame = frame;
  p.plus.c.head(m) = x.head(m);
  p.minus.c.head(m) = x.tail(m);
  return p;
}

InterfaceGeometry build_interface_geometry(const UnfittedMesh& mesh, const LevelSet& ls) {
  InterfaceGeometry g;
  const int ne = mesh.num_edges();
  g.edge_cuts.resize(ne);
  g.node_on_interface.assign(mesh.nodes.size(), 0);
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    if (ls(mesh.nodes[i]) == 0.0) g.node_on_interface[i] = 1;
  for (int e = 0; e < ne; ++e) {
    const auto& ed = mesh.edges[e];
    g.edge_cuts[e] = edge_cut(mesh.nodes[ed.nodes[0]], mesh.nodes[ed.nodes[1]], ls);
    if (g.edge_cuts[e] && g.edge_cuts[e]->snapped())
      g.node_on_interface[ed.nodes[g.edge_cuts[e]->snapped_end]] = 1;
    if (g.is_interface_edge(e)) g.interface_edges.push_back(e);
  }

  const int nt = mesh.num_elements();
  g.regions.resize(nt);
  g.cut_of_element.assign(nt, -1);
  std::array<std::optional<EdgeCut>, 4> local_cuts;
  std::array<char, 4> on_if{};
  for (int t = 0; t < nt; ++t) {
    const auto& el = mesh.elements[t];
    const auto verts = mesh.vertices(t);
    for (int k = 0; k < el.count; ++k) {
      on_if[k] = g.node_on_interface[el.nodes[k]];
      const int e = el.edges[k];
      local_cuts[k] = g.edge_cuts[e];
      if (local_cuts[k] && mesh.edges[e].nodes[0] != el.nodes[k]) {
        auto& c = *local_cuts[k];
        c.t = 1.0 - c.t;
        if (c.snapped()) c.snapped_end = 1 - c.snapped_end;
      }
    }
    const std::size_t cnt = static_cast<std::size_t>(el.count);
    const ElementCutInput in{verts.span(), {local_cuts.data(), cnt}, {on_if.data(), cnt}};
    g.regions[t] = classify_element(in, ls);
    if (g.regions[t] == Region::Interface) {
      g.cut_of_element[t] = static_cast<int>(g.cuts.size());
      g.cuts.push_back(build_cut(in, ls, t));
    }
  }
  for (int e : g.interface_edges) {
    const auto& ed = mesh.edges[e];
    for (int t : {ed.t1, ed.t2})
      if (t >= 0 && g.regions[t] != Region::Interface)
        throw GeometryError("interface edge " + std::to_string(e) + " borders a non-interface element");
  }
  return g;
}

IfeSpace::IfeSpace(const UnfittedMesh& mesh, const LevelSet& ls, ScalarField beta_plus,
                   ScalarField beta_minus, BasisMethod method)
    : mesh_(&mesh),
      ls_(ls),
      beta_plus_(std::move(beta_plus)),
      beta_minus_(std::move(beta_minus)),
      kind_(mesh.kind == MeshKind::Triangular ? ElementKind::CR : ElementKind::RQ1),
      geo_(build_interface_geometry(mesh, ls)) {
  if (kind_ == ElementKind::RQ1 && method == BasisMethod::ShermanMorrison)
    throw std::invalid_argument("IfeSpace: closed-form basis exists only for triangles");
  const bool sm = kind_ == ElementKind::CR && method != BasisMethod::Direct;
  bases_.reserve(geo_.cuts.size());
  for (const auto& cut : geo_.cuts) {
    const auto verts = mesh.vertices(cut.elem_id);
    const double bp = beta_plus_(cut.x_p), bm = beta_minus_(cut.x_p);
    if (sm)
      bases_.push_back(ife_local_basis_cr_sm(verts.span(), cut, bp, bm));
    else
      bases_.push_back(ife_local_basis_direct(verts.span(), cut, bp, bm, kind_,
                                              mesh.elements[cut.elem_id].kappa));
  }
}

ElementBasis IfeSpace::element(int elem, const JumpCorrection* corr) const {
  ElementBasis b;
  b.n = b.nf = n_local();
  b.coef[0].setZero();
  b.coef[1].setZero();
  b.region = geo_.regions[elem];
  const int c = geo_.cut_of_element[elem];
  if (c >= 0) {
    const auto& B = bases_[c];
    b.frame = B.frame;
    b.cut = &geo_.cuts[c];
    b.coef[0].topRows<4>() = B.plus;
    b.coef[1].topRows<4>() = B.minus;
    if (corr) {
      const auto& p = corr->local(c);
      b.coef[0].row(b.n) = p.plus.c.transpose();
      b.coef[1].row(b.n) = p.minus.c.transpose();
      b.nf = b.n + 1;
    }
    return b;
  }
  const auto verts = mesh_->vertices(elem);
  b.frame = element_frame(verts.span(), kind_, mesh_->elements[elem].kappa);
  const Eigen::Matrix4d S = standard_coefficients(verts.span(), b.frame);
  b.coef[0].topRows<4>() = S;
  b.coef[1].topRows<4>() = S;
  if (corr) b.nf = b.n + 1;  // zero correction outside interface elements
  return b;
}

JumpCorrection::JumpCorrection(const IfeSpace& space, const ScalarField& g_D, const ScalarField& g_N) {
  const auto& geo = space.geometry();
  local_.reserve(geo.cuts.size());
  for (std::size_t c = 0; c < geo.cuts.size(); ++c) {
    const auto& cut = geo.cuts[c];
    const auto& B = space.interface_basis(static_cast<int>(c));
    const auto verts = space.mesh().vertices(cut.elem_id);
    local_.push_back(jump_correction_local(verts.span(), cut, B.beta_c_plus, B.beta_c_minus, g_D, g_N,
                                           space.kind(), space.mesh().elements[cut.elem_id].kappa));
  }
}

Eigen::VectorXd interpolate_ife(const UnfittedMesh& mesh, const InterfaceGeometry& geo,
                                const LevelSet& ls, const ScalarField& u_plus,
                                const ScalarField& u_minus) {
  Eigen::VectorXd I(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edges[e];
    const Point& a = mesh.nodes[ed.nodes[0]];
    const Point& b = mesh.nodes[ed.nodes[1]];
    const auto& c = geo.edge_cuts[e];
    double s;
    if (c && !c->snapped()) {
      const Side sa = ls(a) > 0.0 ? Side::Plus : Side::Minus;
      s = integrate_cut_edge(u_plus, u_minus, a, b, c->point, sa);
    } else {
      const Side sm = ls(0.5 * (a + b)) >= 0.0 ? Side::Plus : Side::Minus;
      s = integrate_segment(sm == Side::Plus ? u_plus : u_minus, a, b);
    }
    I[e] = s / ed.length;
  }
  return I;
}

}  // namespace ifelab
