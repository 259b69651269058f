#include "ifelab/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace ifelab {

namespace {

constexpr int kSignSamples = 16;
constexpr int kMaxBisections = 50;
constexpr double kParamTol = 1e-13;

struct BoundaryItem {
  Point x;
  bool is_cut = false;
  int vertex = -1;
  int edge = -1;
};

std::vector<BoundaryItem> walk_boundary(const ElementCutInput& in) {
  const int nv = static_cast<int>(in.vertices.size());
  std::vector<BoundaryItem> items;
  items.reserve(nv + 2);
  for (int k = 0; k < nv; ++k) {
    items.push_back({in.vertices[k], in.vertex_on_interface[k] != 0, k, -1});
    const auto& c = in.edge_cuts[k];
    if (c && !c->snapped()) items.push_back({c->point, true, -1, k});
  }
  return items;
}

struct LocalCutData {
  std::vector<std::optional<EdgeCut>> cuts;
  std::vector<char> on_interface;
};

LocalCutData compute_local_cuts(std::span<const Point> v, const LevelSet& ls) {
  const int nv = static_cast<int>(v.size());
  LocalCutData d;
  d.cuts.resize(nv);
  d.on_interface.assign(nv, 0);
  for (int k = 0; k < nv; ++k) {
    if (ls(v[k]) == 0.0) d.on_interface[k] = 1;
  }
  for (int k = 0; k < nv; ++k) {
    const int k1 = (k + 1) % nv;
    d.cuts[k] = edge_cut(v[k], v[k1], ls);
    if (d.cuts[k] && d.cuts[k]->snapped()) d.on_interface[d.cuts[k]->snapped_end == 0 ? k : k1] = 1;
  }
  return d;
}

}  // namespace

std::optional<EdgeCut> edge_cut(const Point& p0, const Point& p1, const LevelSet& ls, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("edge_cut: tolerance must be positive");
  const Point dir = p1 - p0;
  const double f0 = ls(p0);
  const double f1 = ls(p1);

  // Assumption check: at most one crossing per edge closure.
  int changes = 0;
  double last = f0;
  for (int k = 1; k <= kSignSamples; ++k) {
    const double f = (k == kSignSamples) ? f1 : ls(Point(p0 + (double(k) / kSignSamples) * dir));
    if (f == 0.0) continue;
    if (last != 0.0 && ((f > 0.0) != (last > 0.0))) ++changes;
    last = f;
  }
  if (changes > 1) {
    throw GeometryError("mesh too coarse for interface: edge (" + std::to_string(p0.x()) + "," +
                        std::to_string(p0.y()) + ")-(" + std::to_string(p1.x()) + "," +
                        std::to_string(p1.y()) + ") is crossed more than once");
  }

  if (!(f0 * f1 < 0.0)) return std::nullopt;

  double a = 0.0, b = 1.0, fa = f0, fb = f1;
  const double scale = std::max(std::abs(f0), std::abs(f1));
  double t = -1.0;
  for (int it = 0; it < kMaxBisections && (b - a) > kParamTol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = ls(Point(p0 + m * dir));
    if (fm == 0.0) {
      t = m;
      break;
    }
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  if (t < 0.0) {
    // Secant step inside the final bracket.
    t = a + fa / (fa - fb) * (b - a);
    t = std::clamp(t, a, b);
    if (std::abs(ls(Point(p0 + t * dir))) > tol * scale) t = 0.5 * (a + b);
  }

  EdgeCut cut;
  cut.t = t;
  cut.point = p0 + t * dir;
  if (t < kSnapTolerance) {
    cut.snapped_end = 0;
    cut.t = 0.0;
    cut.point = p0;
  } else if (1.0 - t < kSnapTolerance) {
    cut.snapped_end = 1;
    cut.t = 1.0;
    cut.point = p1;
  }
  return cut;
}

Side side_of_cut(const Point& x, const CutElement& cut) {
  return (x - cut.D).dot(cut.n_h) >= 0.0 ? Side::Plus : Side::Minus;
}

std::array<Side, 2> segment_sides(const CutElement& cut, const Point& a, const Point& b,
                                  bool split) {
  if (!split) {
    const Side s = side_of_cut(0.5 * (a + b), cut);
    return {s, s};
  }
  const double da = (a - cut.D).dot(cut.n_h);
  const double db = (b - cut.D).dot(cut.n_h);
  if (std::abs(da) >= std::abs(db)) {
    const Side s = da >= 0.0 ? Side::Plus : Side::Minus;
    return {s, opposite(s)};
  }
  const Side s = db >= 0.0 ? Side::Plus : Side::Minus;
  return {opposite(s), s};
}

Region classify_element(const ElementCutInput& in, const LevelSet& ls) {
  const int nv = static_cast<int>(in.vertices.size());
  std::vector<BoundaryItem> cuts;
  for (const auto& item : walk_boundary(in)) {
    if (item.is_cut) cuts.push_back(item);
  }
  if (cuts.size() > 2) {
    throw GeometryError("interface meets the boundary of an element at more than two points");
  }
  if (cuts.size() == 2) {
    const auto& p = cuts[0];
    const auto& q = cuts[1];
    const bool both_vertices = p.vertex >= 0 && q.vertex >= 0;
    const bool adjacent_vertices =
        both_vertices && ((p.vertex + 1) % nv == q.vertex || (q.vertex + 1) % nv == p.vertex);
    if (!adjacent_vertices) {
      // A vertex root together with a crossing of one of its own edges
      // would put two interface points on one edge closure.
      for (const auto* vtx : {&p, &q}) {
        const auto* other = (vtx == &p) ? &q : &p;
        if (vtx->vertex >= 0 && other->edge >= 0 &&
            (other->edge == vtx->vertex || (other->edge + 1) % nv == vtx->vertex)) {
          throw GeometryError("interface meets an edge closure at more than one point");
        }
      }
      return Region::Interface;
    }
  }
  const Point c = vertex_centroid(in.vertices);
  double s = ls(c);
  if (s == 0.0) {
    double best = 0.0;
    for (const auto& v : in.vertices) {
      const double f = ls(v);
      if (std::abs(f) > std::abs(best)) best = f;
    }
    s = best;
  }
  return s >= 0.0 ? Region::Plus : Region::Minus;
}

CutElement build_cut(const ElementCutInput& in, const LevelSet& ls, int elem_id) {
  if (classify_element(in, ls) != Region::Interface) {
    throw GeometryError("build_cut: element is not an interface element");
  }
  const auto items = walk_boundary(in);
  const int n = static_cast<int>(items.size());
  int i = -1, j = -1;
  for (int k = 0; k < n; ++k) {
    if (!items[k].is_cut) continue;
    (i < 0 ? i : j) = k;
  }

  CutElement cut;
  cut.elem_id = elem_id;
  cut.h_T = diameter(in.vertices);
  cut.D = items[i].x;
  cut.E = items[j].x;
  cut.cut_edges = {items[i].edge, items[j].edge};
  cut.cut_vertices = {items[i].vertex, items[j].vertex};

  const Point de = cut.E - cut.D;
  if (de.norm() < 1e-12 * cut.h_T) {
    throw GeometryError("build_cut: degenerate interface segment in element " +
                        std::to_string(elem_id));
  }

  Polygon poly_a;
  for (int k = i; k <= j; ++k) poly_a.push_back(items[k].x);
  Polygon poly_b;
  for (int k = j; k < n; ++k) poly_b.push_back(items[k].x);
  for (int k = 0; k <= i; ++k) poly_b.push_back(items[k].x);

  // Orient n_h toward the vertex with the largest positive-or-negative phi.
  double best = 0.0;
  Point witness = Point::Zero();
  for (const auto& it : items) {
    if (it.is_cut) continue;
    const double f = ls(it.x);
    if (std::abs(f) > std::abs(best)) {
      best = f;
      witness = it.x;
    }
  }
  cut.n_h = rotate90(de).normalized();
  if (((witness - cut.D).dot(cut.n_h) > 0.0) != (best > 0.0)) cut.n_h = -cut.n_h;

  const bool a_is_plus = (vertex_centroid(poly_a) - cut.D).dot(cut.n_h) > 0.0;
  cut.poly_plus = a_is_plus ? std::move(poly_a) : poly_b;
  cut.poly_minus = a_is_plus ? std::move(poly_b) : poly_a;
  cut.t_h = rotate90(cut.n_h);
  cut.x_p = 0.5 * (cut.D + cut.E);
  return cut;
}

Region classify_element(std::span<const Point> vertices, const LevelSet& ls) {
  const auto d = compute_local_cuts(vertices, ls);
  return classify_element(ElementCutInput{vertices, d.cuts, d.on_interface}, ls);
}

CutElement build_cut(std::span<const Point> vertices, const LevelSet& ls, int elem_id) {
  const auto d = compute_local_cuts(vertices, ls);
  return build_cut(ElementCutInput{vertices, d.cuts, d.on_interface}, ls, elem_id);
}

double polygon_area(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  double a = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Point& p = poly[k];
    const Point& q = poly[(k + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

double diameter(std::span<const Point> poly) {
  double d = 0.0;
  for (std::size_t a = 0; a < poly.size(); ++a)
    for (std::size_t b = a + 1; b < poly.size(); ++b) d = std::max(d, (poly[a] - poly[b]).norm());
  return d;
}

Point vertex_centroid(std::span<const Point> poly) {
  Point c = Point::Zero();
  for (const auto& p : poly) c += p;
  return c / static_cast<double>(poly.size());
}

}  // namespace ifelab
