#include "ifelab/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace ifelab {

ElementVertices UnfittedMesh::vertices(int elem) const {
  const auto& e = elements[elem];
  ElementVertices v;
  v.count = e.count;
  for (int k = 0; k < e.count; ++k) v.pts[k] = nodes[e.nodes[k]];
  return v;
}

std::array<Point, 2> UnfittedMesh::local_edge(int elem, int k) const {
  const auto& e = elements[elem];
  return {nodes[e.nodes[k]], nodes[e.nodes[(k + 1) % e.count]]};
}

int UnfittedMesh::local_index(int elem, int edge) const {
  const auto& e = elements[elem];
  for (int k = 0; k < e.count; ++k)
    if (e.edges[k] == edge) return k;
  return -1;
}

std::vector<char> UnfittedMesh::boundary_flags() const {
  std::vector<char> flags(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) flags[i] = edges[i].boundary() ? 1 : 0;
  return flags;
}

void UnfittedMesh::finalize() {
  std::unordered_map<std::int64_t, int> lookup;
  lookup.reserve(elements.size() * 2);
  const std::int64_t nn = static_cast<std::int64_t>(nodes.size());
  edges.clear();
  h_ = 0.0;
  for (int t = 0; t < num_elements(); ++t) {
    auto& el = elements[t];
    for (int k = 0; k < el.count; ++k) {
      const int a = el.nodes[k];
      const int b = el.nodes[(k + 1) % el.count];
      const std::int64_t key = std::min(a, b) * nn + std::max(a, b);
      auto [it, inserted] = lookup.emplace(key, static_cast<int>(edges.size()));
      if (inserted) {
        MeshEdge e;
        e.nodes = {a, b};
        e.t1 = t;
        const Point d = nodes[b] - nodes[a];
        e.length = d.norm();
        e.normal = Point(d.y(), -d.x()) / e.length;
        edges.push_back(e);
      } else {
        edges[it->second].t2 = t;
      }
      el.edges[k] = it->second;
    }
    h_ = std::max(h_, diameter(vertices(t).span()));
  }
}

UnfittedMesh build_uniform_tri(int n, const Box& box, Diagonal diagonal) {
  if (n < 1) throw std::invalid_argument("build_uniform_tri: N must be >= 1");
  UnfittedMesh m;
  m.kind = MeshKind::Triangular;
  m.n = n;
  m.box = box;
  const double dx = (box.x1 - box.x0) / n;
  const double dy = (box.y1 - box.y0) / n;
  m.nodes.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.nodes.emplace_back(box.x0 + i * dx, box.y0 + j * dy);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  m.elements.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int p00 = id(i, j), p10 = id(i + 1, j), p11 = id(i + 1, j + 1), p01 = id(i, j + 1);
      MeshElement lo, hi;
      if (diagonal == Diagonal::Anti) {
        lo.nodes = {p00, p10, p01, -1};
        hi.nodes = {p10, p11, p01, -1};
      } else {
        lo.nodes = {p00, p10, p11, -1};
        hi.nodes = {p00, p11, p01, -1};
      }
      lo.count = hi.count = 3;
      m.elements.push_back(lo);
      m.elements.push_back(hi);
    }
  }
  m.finalize();
  return m;
}

UnfittedMesh build_uniform_rect(int n, const Box& box) {
  if (n < 1) throw std::invalid_argument("build_uniform_rect: N must be >= 1");
  UnfittedMesh m;
  m.kind = MeshKind::Rectangular;
  m.n = n;
  m.box = box;
  const double dx = (box.x1 - box.x0) / n;
  const double dy = (box.y1 - box.y0) / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.nodes.emplace_back(box.x0 + i * dx, box.y0 + j * dy);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  m.elements.reserve(n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      MeshElement el;
      el.nodes = {id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)};
      el.count = 4;
      el.kappa = dx / dy;
      m.elements.push_back(el);
    }
  }
  m.finalize();
  return m;
}

std::vector<int> interface_edges(const UnfittedMesh& mesh, const LevelSet& ls) {
  std::vector<int> out;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& edge = mesh.edges[e];
    const auto cut = edge_cut(mesh.nodes[edge.nodes[0]], mesh.nodes[edge.nodes[1]], ls);
    if (cut && !cut->snapped()) out.push_back(e);
  }
  return out;
}

}  // namespace ifelab
