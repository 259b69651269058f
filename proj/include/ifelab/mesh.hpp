#pragma once

#include "ifelab/geometry.hpp"

#include <array>
#include <span>
#include <vector>

namespace ifelab {

enum class MeshKind { Triangular, Rectangular };

/// Which diagonal splits each cell of a triangular mesh.
enum class Diagonal {
  /// (x_i, y_{j+1}) -- (x_{i+1}, y_j): top-left to bottom-right.
  Anti,
  /// (x_i, y_j) -- (x_{i+1}, y_{j+1}): bottom-left to top-right.
  Main,
};

struct Box {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

struct MeshEdge {
  std::array<int, 2> nodes{};  // oriented as traversed counterclockwise by t1
  int t1 = -1;
  int t2 = -1;  // -1 on the boundary
  Point normal = Point::Zero();  // unit, outward from t1
  double length = 0.0;

  bool boundary() const { return t2 < 0; }
};

struct MeshElement {
  std::array<int, 4> nodes{};  // counterclockwise
  std::array<int, 4> edges{};  // local edge k joins nodes[k] and nodes[k+1]
  int count = 3;
  double kappa = 1.0;  // |e1|/|e2| for rectangles (x1-parallel over x2-parallel)
};

/// Small fixed-capacity vertex list of one element.
struct ElementVertices {
  std::array<Point, 4> pts;
  int count = 0;

  std::span<const Point> span() const { return {pts.data(), static_cast<std::size_t>(count)}; }
  const Point& operator[](int k) const { return pts[k]; }
};

/// Uniform background mesh of a rectangle. One degree of freedom per edge
/// (its mean value); boundary edge DOFs are constrained.
class UnfittedMesh {
public:
  MeshKind kind = MeshKind::Triangular;
  int n = 0;
  Box box;
  std::vector<Point> nodes;
  std::vector<MeshElement> elements;
  std::vector<MeshEdge> edges;

  int num_elements() const { return static_cast<int>(elements.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_dofs() const { return num_edges(); }

  ElementVertices vertices(int elem) const;
  /// Global edge ids of the element, one per local edge.
  std::span<const int> element_edges(int elem) const {
    const auto& e = elements[elem];
    return {e.edges.data(), static_cast<std::size_t>(e.count)};
  }
  /// Endpoints of local edge k of an element, in the element's orientation.
  std::array<Point, 2> local_edge(int elem, int k) const;
  /// Position of a global edge within an element's local edges, or -1.
  int local_index(int elem, int edge) const;

  /// Maximum element diameter.
  double h() const { return h_; }

  std::vector<char> boundary_flags() const;

private:
  friend UnfittedMesh build_uniform_tri(int, const Box&, Diagonal);
  friend UnfittedMesh build_uniform_rect(int, const Box&);
  void finalize();
  double h_ = 0.0;
};

UnfittedMesh build_uniform_tri(int n, const Box& box, Diagonal diagonal = Diagonal::Anti);
UnfittedMesh build_uniform_rect(int n, const Box& box);

/// Edges whose open segment carries a (non-snapped) crossing of the interface.
std::vector<int> interface_edges(const UnfittedMesh& mesh, const LevelSet& ls);

}  // namespace ifelab
