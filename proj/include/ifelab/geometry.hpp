#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifelab {

using Point = Eigen::Vector2d;
using Polygon = std::vector<Point>;
using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The interface crosses a mesh edge or element more often than the
/// discretization allows (mesh too coarse for the interface).
class GeometryError : public Error {
public:
  using Error::Error;
};

enum class Side { Plus, Minus };

inline Side opposite(Side s) { return s == Side::Plus ? Side::Minus : Side::Plus; }
inline int side_index(Side s) { return s == Side::Plus ? 0 : 1; }

/// Interface given implicitly as the zero set of phi. Omega+ = {phi > 0}.
struct LevelSet {
  ScalarField phi;
  VectorField grad;

  double operator()(const Point& x) const { return phi(x); }
  Point normal(const Point& x) const { return grad(x).normalized(); }
};

/// Root of phi along a straight segment p0 -> p1, at parameter t.
struct EdgeCut {
  Point point;
  double t = 0.0;
  /// Index (0 or 1) of the endpoint the root was snapped to, or -1.
  int snapped_end = -1;

  bool snapped() const { return snapped_end >= 0; }
};

/// Relative distance (in units of the edge length) below which a root is
/// moved onto the nearest endpoint.
inline constexpr double kSnapTolerance = 1e-10;

/// Locates the unique root of phi on [p0, p1] when phi changes sign between
/// the endpoints. Throws GeometryError if a 16-point sampling of the edge
/// shows more than one sign change.
std::optional<EdgeCut> edge_cut(const Point& p0, const Point& p1, const LevelSet& ls,
                                double tol = 1e-12);

enum class Region { Plus, Minus, Interface };

/// Cut data of one interface element. The segment DE (part of Gamma_h)
/// splits the element into two convex polygons.
struct CutElement {
  int elem_id = -1;
  Point D = Point::Zero();
  Point E = Point::Zero();
  Point n_h = Point::Zero();  // unit normal of DE pointing into the + side
  Point t_h = Point::Zero();  // R_{pi/2} n_h
  Point x_p = Point::Zero();  // midpoint of DE
  Polygon poly_plus;
  Polygon poly_minus;
  // Local edge (v_k -> v_{k+1}) whose interior carries D / E, or -1 when
  // the point sits on a vertex; in that case cut_vertices holds its index.
  std::array<int, 2> cut_edges{-1, -1};
  std::array<int, 2> cut_vertices{-1, -1};
  double h_T = 0.0;

  /// Interior split point of local edge k, if DE ends there.
  std::optional<Point> split_of_edge(int k) const {
    if (cut_edges[0] == k) return D;
    if (cut_edges[1] == k) return E;
    return std::nullopt;
  }
};

/// + iff (x - D).n_h >= 0; points on DE belong to the + side.
Side side_of_cut(const Point& x, const CutElement& cut);

/// Sides of the pieces a->split and split->b of an element edge. Without a
/// split both entries give the side of the whole edge. With a split the
/// endpoint farther from DE decides and the other piece gets the opposite
/// side, which keeps near-vertex crossings robust.
std::array<Side, 2> segment_sides(const CutElement& cut, const Point& a, const Point& b,
                                  bool split);

/// Boundary data an element needs to decide whether it is cut: per local
/// edge k (v_k -> v_{k+1}) the raw edge_cut result, and per vertex whether it
/// lies on the interface (phi == 0 or a snapped root).
struct ElementCutInput {
  std::span<const Point> vertices;
  std::span<const std::optional<EdgeCut>> edge_cuts;
  std::span<const char> vertex_on_interface;
};

Region classify_element(const ElementCutInput& in, const LevelSet& ls);
CutElement build_cut(const ElementCutInput& in, const LevelSet& ls, int elem_id = -1);

/// Convenience overloads that compute the edge cuts of the element on the fly.
Region classify_element(std::span<const Point> vertices, const LevelSet& ls);
CutElement build_cut(std::span<const Point> vertices, const LevelSet& ls, int elem_id = -1);

double polygon_area(std::span<const Point> poly);
double diameter(std::span<const Point> poly);
Point vertex_centroid(std::span<const Point> poly);

inline Point rotate90(const Point& v) { return {-v.y(), v.x()}; }

}  // namespace ifelab
