#pragma once

#include "ifelab/geometry.hpp"
#include "ifelab/local_poly.hpp"
#include "ifelab/mesh.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace ifelab {

/// The local IFE system could not be solved (singular or corrupted geometry).
class UnisolvenceError : public Error {
public:
  using Error::Error;
};

/// Frame used for all polynomials of one element: vertex centroid, diameter.
LocalFrame element_frame(std::span<const Point> vertices, ElementKind kind, double kappa = 1.0);

/// Polynomials dual to the edge means of the element (local edge k runs
/// from vertex k to vertex k+1).
std::vector<LocalPoly> standard_local_basis(std::span<const Point> vertices, ElementKind kind,
                                            double kappa = 1.0);
/// Same, as rows of a coefficient matrix in the given frame.
Eigen::Matrix4d standard_coefficients(std::span<const Point> vertices, const LocalFrame& frame);

/// Piecewise basis on an interface element. Row i of plus / minus holds the
/// coefficients of phi_i on poly_plus / poly_minus.
struct LocalIFEBasis {
  LocalFrame frame;
  int n = 3;
  Eigen::Matrix4d plus = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d minus = Eigen::Matrix4d::Zero();
  const CutElement* cut = nullptr;
  double beta_c_plus = 1.0;
  double beta_c_minus = 1.0;

  const Eigen::Matrix4d& coeffs(Side s) const { return s == Side::Plus ? plus : minus; }
  LocalPoly piece(int i, Side s) const { return {frame, coeffs(s).row(i).transpose()}; }
};

/// Diagnostics of the closed-form construction on triangles.
struct ShermanMorrisonInfo {
  int isolated_vertex = -1;
  bool swapped = false;  // isolated piece on the + side
  double k1 = 0.0, k2 = 0.0;
  double gamma_delta = 0.0;
  double denominator = 0.0;
  double lower_bound = 0.0;  // min(1, rho)
};

LocalIFEBasis ife_local_basis_cr_sm(std::span<const Point> vertices, const CutElement& cut,
                                    double beta_c_plus, double beta_c_minus,
                                    ShermanMorrisonInfo* info = nullptr);

/// Dense solve of continuity, [d] = 0 (RQ1), flux and edge-mean conditions.
/// `rcond` receives the reciprocal condition estimate of the system.
LocalIFEBasis ife_local_basis_direct(std::span<const Point> vertices, const CutElement& cut,
                                     double beta_c_plus, double beta_c_minus, ElementKind kind,
                                     double kappa = 1.0, double* rcond = nullptr);

struct PiecewisePoly {
  LocalPoly plus;
  LocalPoly minus;
  const LocalPoly& piece(Side s) const { return s == Side::Plus ? plus : minus; }
};

/// Local function with prescribed jumps g_D at D and E, flux jump equal to
/// the mean of g_N at D and E, and zero edge means. RQ1 adds [d] = 0.
PiecewisePoly jump_correction_local(std::span<const Point> vertices, const CutElement& cut,
                                    double beta_c_plus, double beta_c_minus, const ScalarField& g_D,
                                    const ScalarField& g_N, ElementKind kind, double kappa = 1.0);

/// Edge mean of a piecewise function over local edge k, with the edge split
/// at the cut point when DE ends there.
double edge_mean(const PiecewisePoly& f, std::span<const Point> vertices, const CutElement& cut,
                 int k);

/// Row vectors r+, r- with N_k(p) = r+ . c+ + r- . c-.
void edge_mean_rows(const LocalFrame& frame, std::span<const Point> vertices, const CutElement& cut,
                    int k, Eigen::Vector4d& row_plus, Eigen::Vector4d& row_minus);

/// Cut data of a whole mesh. Edge cuts are computed once per mesh edge and
/// shared by both neighbours.
struct InterfaceGeometry {
  std::vector<std::optional<EdgeCut>> edge_cuts;  // along edge nodes[0] -> nodes[1]
  std::vector<char> node_on_interface;
  std::vector<Region> regions;
  std::vector<int> cut_of_element;  // -1 for non-interface elements
  std::vector<CutElement> cuts;
  std::vector<int> interface_edges;  // edges with a non-snapped crossing

  bool is_interface_edge(int e) const { return edge_cuts[e] && !edge_cuts[e]->snapped(); }
};

InterfaceGeometry build_interface_geometry(const UnfittedMesh& mesh, const LevelSet& ls);

enum class BasisMethod { Auto, ShermanMorrison, Direct };

/// Up to four basis functions plus an optional correction slot, each given
/// by its coefficients on the + and - pieces (equal on non-interface
/// elements).
struct ElementBasis {
  LocalFrame frame;
  int n = 3;
  int nf = 3;
  Eigen::Matrix<double, 5, 4> coef[2];
  Region region = Region::Plus;
  const CutElement* cut = nullptr;

  Side side_at(const Point& x) const {
    if (cut) return side_of_cut(x, *cut);
    return region == Region::Minus ? Side::Minus : Side::Plus;
  }
  /// Values / physical gradients of all nf functions at x on side s.
  Eigen::Matrix<double, 5, 1> values(Side s, const Point& x) const {
    return coef[side_index(s)] * frame.monomials(x);
  }
  Eigen::Matrix<double, 5, 2> grads(Side s, const Point& x) const {
    return coef[side_index(s)] * frame.monomial_grads(x).transpose();
  }
};

class JumpCorrection;

/// Global IFE space over an unfitted mesh.
class IfeSpace {
public:
  IfeSpace(const UnfittedMesh& mesh, const LevelSet& ls, ScalarField beta_plus,
           ScalarField beta_minus, BasisMethod method = BasisMethod::Auto);
  // bases point into geo_.cuts, which survives a move but not a copy
  IfeSpace(const IfeSpace&) = delete;
  IfeSpace& operator=(const IfeSpace&) = delete;
  IfeSpace(IfeSpace&&) = default;

  const UnfittedMesh& mesh() const { return *mesh_; }
  const LevelSet& levelset() const { return ls_; }
  const InterfaceGeometry& geometry() const { return geo_; }
  ElementKind kind() const { return kind_; }
  int n_local() const { return dofs_per_element(kind_); }

  double beta(Side s, const Point& x) const { return s == Side::Plus ? beta_plus_(x) : beta_minus_(x); }
  const ScalarField& beta_field(Side s) const { return s == Side::Plus ? beta_plus_ : beta_minus_; }

  const CutElement* cut(int elem) const {
    const int c = geo_.cut_of_element[elem];
    return c < 0 ? nullptr : &geo_.cuts[c];
  }
  const LocalIFEBasis& interface_basis(int cut_index) const { return bases_[cut_index]; }

  /// Basis of an element; when `corr` is given the correction of interface
  /// elements occupies slot n (nf = n + 1).
  ElementBasis element(int elem, const JumpCorrection* corr = nullptr) const;

private:
  const UnfittedMesh* mesh_;
  LevelSet ls_;
  ScalarField beta_plus_, beta_minus_;
  ElementKind kind_;
  InterfaceGeometry geo_;
  std::vector<LocalIFEBasis> bases_;
};

/// Correction function of the whole mesh: one piecewise polynomial per
/// interface element, zero elsewhere.
class JumpCorrection {
public:
  JumpCorrection(const IfeSpace& space, const ScalarField& g_D, const ScalarField& g_N);
  const PiecewisePoly& local(int cut_index) const { return local_[cut_index]; }

private:
  std::vector<PiecewisePoly> local_;
};

/// Edge means of the exact solution, split at the exact crossing of each
/// edge; unsplit edges take the piece of their midpoint's sign.
Eigen::VectorXd interpolate_ife(const UnfittedMesh& mesh, const InterfaceGeometry& geo,
                                const LevelSet& ls, const ScalarField& u_plus,
                                const ScalarField& u_minus);

}  // namespace ifelab
