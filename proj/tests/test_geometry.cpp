#include "ifelab/geometry.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace ifelab;
using namespace testing_support;

namespace {

bool contains(const Polygon& poly, const Point& p) {
  for (const auto& q : poly)
    if ((q - p).norm() < 1e-12) return true;
  return false;
}

}  // namespace

TEST(EdgeCut, CircleRootOnAxis) {
  const auto c = edge_cut({0, 0}, {1, 0}, circle(0.5));
  ASSERT_TRUE(c);
  EXPECT_NEAR(c->point.x(), 0.5, 1e-12);
  EXPECT_NEAR(c->point.y(), 0.0, 1e-15);
  EXPECT_FALSE(c->snapped());
}

TEST(EdgeCut, NoRootWhenBothEndpointsPositive) {
  EXPECT_FALSE(edge_cut({0.6, 0}, {1, 0}, circle(0.5)));
}

TEST(EdgeCut, LinearRoot) {
  const double r2 = std::sqrt(2.0);
  const LevelSet ls{[r2](const Point& x) { return (x.x() - x.y()) / r2; },
                    [r2](const Point&) -> Point { return Point(1, -1) / r2; }};
  const auto c = edge_cut({-1, 0}, {1, 0}, ls);
  ASSERT_TRUE(c);
  EXPECT_NEAR(c->point.norm(), 0.0, 1e-14);
}

TEST(EdgeCut, RootNearEndpointIsSnapped) {
  const auto c = edge_cut({0, 0}, {1, 0}, line({1, 0}, {1e-13, 0}));
  ASSERT_TRUE(c);
  EXPECT_TRUE(c->snapped());
  EXPECT_EQ(c->snapped_end, 0);
}

TEST(EdgeCut, DoubleCrossingRejected) {
  EXPECT_THROW(edge_cut({-1, 0}, {1, 0}, circle(0.5)), GeometryError);
}

TEST(Classify, ThreeRegions) {
  const auto ls = circle(0.25);
  const std::array<Point, 3> t1{Point(0, 0), Point(1, 0), Point(0, 1)};
  const std::array<Point, 3> t2{Point(2, 2), Point(3, 2), Point(2, 3)};
  const std::array<Point, 4> r{Point(-0.1, -0.1), Point(0.1, -0.1), Point(0.1, 0.1), Point(-0.1, 0.1)};
  EXPECT_EQ(classify_element(t1, ls), Region::Interface);
  EXPECT_EQ(classify_element(t2, ls), Region::Plus);
  EXPECT_EQ(classify_element(r, ls), Region::Minus);
}

TEST(BuildCut, VerticalLineThroughTriangle) {
  const std::array<Point, 3> v{Point(0, 0), Point(1, 0), Point(0, 1)};
  const auto cut = build_cut(v, line({1, 0}, {0.5, 0}));
  EXPECT_NEAR((cut.D - Point(0.5, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((cut.E - Point(0.5, 0.5)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((cut.n_h - Point(1, 0)).norm(), 0.0, 1e-12);
  ASSERT_EQ(cut.poly_minus.size(), 4u);
  for (const Point& p : {Point(0, 0), Point(0.5, 0), Point(0.5, 0.5), Point(0, 1)})
    EXPECT_TRUE(contains(cut.poly_minus, p)) << p.transpose();
  EXPECT_NEAR(shoelace(cut.poly_minus), 0.375, 1e-14);
  EXPECT_NEAR(shoelace(cut.poly_plus), 0.125, 1e-14);
  EXPECT_NEAR((cut.x_p - Point(0.5, 0.25)).norm(), 0.0, 1e-12);
}

TEST(BuildCut, HorizontalLineThroughSquare) {
  const std::array<Point, 4> v{Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)};
  const auto cut = build_cut(v, line({0, 1}, {0, 0.25}));
  EXPECT_NEAR(polygon_area(cut.poly_minus), 0.25, 1e-14);
  EXPECT_NEAR(polygon_area(cut.poly_plus), 0.75, 1e-14);
  EXPECT_NEAR((cut.n_h - Point(0, 1)).norm(), 0.0, 1e-12);
}

TEST(BuildCut, PiecesPartitionRandomTriangles) {
  RandomTriangles gen(7);
  const auto ls = circle(0.6, Point(0.1, -0.05));
  int done = 0;
  while (done < 1000) {
    const auto v = gen.next(0.5);
    std::array<Point, 3> shifted = v;
    const Point shift(gen.uniform(-0.6, 0.6), gen.uniform(-0.6, 0.6));
    for (auto& p : shifted) p += shift;
    Region r;
    try {
      r = classify_element(shifted, ls);
    } catch (const GeometryError&) {
      continue;  // circle crosses an edge twice
    }
    if (r != Region::Interface) continue;
    CutElement cut;
    try {
      cut = build_cut(shifted, ls);
    } catch (const GeometryError&) {
      continue;
    }
    const double area = shoelace({shifted.begin(), shifted.end()});
    const double sum = shoelace(cut.poly_plus) + shoelace(cut.poly_minus);
    ASSERT_NEAR(sum / area, 1.0, 1e-12);
    ++done;
  }
}

TEST(SideOfCut, TieBreakOnSegment) {
  const std::array<Point, 3> v{Point(0, 0), Point(1, 0), Point(0, 1)};
  const auto cut = build_cut(v, line({1, 0}, {0.5, 0}));
  EXPECT_EQ(side_of_cut({0.75, 0.1}, cut), Side::Plus);
  EXPECT_EQ(side_of_cut({0.25, 0.25}, cut), Side::Minus);
  EXPECT_EQ(side_of_cut({0.5, 0.25}, cut), Side::Plus);
}

TEST(SegmentSides, FartherEndpointDecides) {
  const std::array<Point, 3> v{Point(0, 0), Point(1, 0), Point(0, 1)};
  const auto cut = build_cut(v, line({1, 0}, {0.5, 0}));
  const auto s = segment_sides(cut, v[0], v[1], true);
  EXPECT_EQ(s[0], Side::Minus);
  EXPECT_EQ(s[1], Side::Plus);
  const auto w = segment_sides(cut, v[2], v[0], false);
  EXPECT_EQ(w[0], Side::Minus);
  EXPECT_EQ(w[1], Side::Minus);
}

TEST(Polygon, AreaDiameterCentroid) {
  const std::vector<Point> sq{Point(0, 0), Point(2, 0), Point(2, 1), Point(0, 1)};
  EXPECT_DOUBLE_EQ(polygon_area(sq), 2.0);
  EXPECT_NEAR(diameter(sq), std::sqrt(5.0), 1e-15);
  EXPECT_NEAR((vertex_centroid(sq) - Point(1, 0.5)).norm(), 0.0, 1e-15);
}
