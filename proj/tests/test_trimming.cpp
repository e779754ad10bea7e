#include <gtest/gtest.h>

#include <tiga/trimming.hpp>

#include <random>

using namespace tiga;

namespace {

const double L = 2.0 / 0.7;

GeometryMap<2> circle_box() { return GeometryMap<2>::identity_box(Vec<2>::Constant(-L / 2), Vec<2>::Constant(L / 2)); }

// per element: {any raster sample kept, any raster sample removed}
std::vector<std::pair<bool, bool>> rasterize(const BezierMesh<2>& mesh, const GeometryMap<2>& map,
                                             const TrimmingBoundary<2>& b, int res) {
  std::vector<std::pair<bool, bool>> out(mesh.num_elements(), {false, false});
  for (int j = 0; j < res; ++j)
    for (int i = 0; i < res; ++i) {
      const Vec<2> x((i + 0.5) / res, (j + 0.5) / res);
      int e = 0;
      for (; e < mesh.num_elements(); ++e)
        if (mesh.box(e).contains(x)) break;
      const bool kept = b.level(map.point(x)) < 0.0;
      (kept ? out[e].first : out[e].second) = true;
    }
  return out;
}

}  // namespace

TEST(Classify, CircleMatchesRasterization) {
  const auto map = circle_box();
  const auto circle = TrimmingBoundary<2>::circle(Vec<2>::Zero(), 1.0, KeepSide::Negative);
  const BezierMesh<2> mesh(TensorBSplineSpace<2>::uniform(2, 8), map);
  const auto cls = classify(mesh, map, circle);
  const auto raster = rasterize(mesh, map, circle, 512);
  int oracle_live = 0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    oracle_live += raster[e].first;
    switch (cls.labels[e]) {
      case Label::Cut: EXPECT_TRUE(raster[e].first && raster[e].second) << "element " << e; break;
      case Label::Interior: EXPECT_FALSE(raster[e].second) << "element " << e; break;
      case Label::Exterior: EXPECT_FALSE(raster[e].first) << "element " << e; break;
    }
  }
  EXPECT_EQ(cls.count(Label::Interior) + cls.count(Label::Cut), oracle_live);
}

TEST(Classify, NoTrimmingAllInterior) {
  const auto map = circle_box();
  const BezierMesh<2> mesh(TensorBSplineSpace<2>::uniform(2, 8), map);
  EXPECT_EQ(classify(mesh, map, TrimmingBoundary<2>::none()).count(Label::Interior), 64);
}

TEST(Classify, SingleCubeElementIsCut) {
  const auto map = GeometryMap<3>::identity_box(Vec<3>::Zero(), Vec<3>::Ones());
  const BezierMesh<3> mesh(TensorBSplineSpace<3>::uniform(2, 1), map);
  const auto cls = classify(mesh, map, TrimmingBoundary<3>::sphere(Vec<3>::Zero(), 1.0, KeepSide::Negative));
  EXPECT_EQ(cls.labels[0], Label::Cut);
}

TEST(Classify, TangentialCutReported) {
  // the trimming line coincides with the knot line x = 0.5 of a 1-element-wide strip
  const auto map = GeometryMap<2>::identity_box(Vec<2>::Zero(), Vec<2>::Ones());
  const auto plane = TrimmingBoundary<2>::plane(Vec<2>(1, 0), 0.5, KeepSide::Negative);
  const BezierMesh<2> mesh(TensorBSplineSpace<2>({KnotVector(1, {0, 0, 0.5, 0.5 + 1e-14, 1, 1}), KnotVector::uniform(1, 1)}),
                           map);
  EXPECT_THROW(classify(mesh, map, plane), TangentialCutError);
}

TEST(Classify, RefinementMonotone) {
  const auto map = circle_box();
  const auto circle = TrimmingBoundary<2>::circle(Vec<2>::Zero(), 1.0, KeepSide::Negative);
  for (int n : {4, 8, 16}) {
    const BezierMesh<2> coarse(TensorBSplineSpace<2>::uniform(2, n), map), fine(TensorBSplineSpace<2>::uniform(2, 2 * n), map);
    const auto c = classify(coarse, map, circle), f = classify(fine, map, circle);
    for (int e = 0; e < fine.num_elements(); ++e) {
      const auto mi = fine.multi_index(e);
      const Label parent = c.labels[coarse.flat({mi[0] / 2, mi[1] / 2})];
      if (parent != Label::Cut) {
        EXPECT_EQ(f.labels[e], parent);
      }
    }
  }
}

TEST(IntersectSegment, CircleCrossing) {
  const auto map = GeometryMap<2>::identity_box(Vec<2>::Zero(), Vec<2>::Ones());
  const auto circle = TrimmingBoundary<2>::circle(Vec<2>::Zero(), 1.0, KeepSide::Negative);
  const auto r = intersect_segment(circle, map, Vec<2>(0, 0), Vec<2>(2, 0));
  ASSERT_EQ(r.roots.size(), 1u);
  EXPECT_NEAR(r.roots[0], 0.5, 1e-14);
  EXPECT_TRUE(intersect_segment(circle, map, Vec<2>(0.1, 0.1), Vec<2>(0.2, 0.3)).roots.empty());
  const auto touch = intersect_segment(circle, map, Vec<2>(0, 0), Vec<2>(1, 0));
  EXPECT_TRUE(touch.touches_end);
}

TEST(IntersectSegment, SphereEdge) {
  const auto map = GeometryMap<3>::identity_box(Vec<3>::Zero(), Vec<3>::Ones());
  const auto sphere = TrimmingBoundary<3>::sphere(Vec<3>::Zero(), 1.0, KeepSide::Negative);
  const auto r = intersect_segment(sphere, map, Vec<3>(0.9, 0.3, 0.3), Vec<3>(1.0, 0.3, 0.3));
  ASSERT_EQ(r.roots.size(), 1u);
  EXPECT_NEAR(0.9 + 0.1 * r.roots[0], std::sqrt(0.82), 1e-13);
}

TEST(Slice, AgreesWithClassifyAndExitsEarly) {
  const auto map = circle_box();
  const auto circle = TrimmingBoundary<2>::circle(Vec<2>::Zero(), 1.0, KeepSide::Negative);
  for (int n : {8, 16, 32}) {
    const BezierMesh<2> mesh(TensorBSplineSpace<2>::uniform(2, n), map);
    const auto s = slice(mesh, map, circle);
    EXPECT_EQ(s.classification.labels, classify(mesh, map, circle).labels);
    EXPECT_LT(s.leaf_visits, mesh.num_elements());
  }
  const auto ball = GeometryMap<3>::identity_box(Vec<3>::Zero(), Vec<3>::Ones());
  const auto sphere = TrimmingBoundary<3>::sphere(Vec<3>::Zero(), 1.0, KeepSide::Negative);
  const BezierMesh<3> mesh3(TensorBSplineSpace<3>::uniform(2, 8), ball);
  EXPECT_EQ(slice(mesh3, ball, sphere).classification.labels, classify(mesh3, ball, sphere).labels);
}

TEST(Slice, UntrimmedTerminatesAtRoot) {
  const auto map = circle_box();
  const BezierMesh<2> mesh(TensorBSplineSpace<2>::uniform(2, 8), map);
  const auto s = slice(mesh, map, TrimmingBoundary<2>::none());
  EXPECT_EQ(s.max_depth, 0);
  EXPECT_EQ(s.classification.count(Label::Interior), 64);
}

TEST(ActiveSet, CountsSupportsOverLiveElements) {
  const auto map = circle_box();
  const auto circle = TrimmingBoundary<2>::circle(Vec<2>::Zero(), 1.0, KeepSide::Negative);
  const auto space = TensorBSplineSpace<2>::uniform(2, 8);
  const BezierMesh<2> mesh(space, map);
  const auto cls = classify(mesh, map, circle);
  const auto raster = rasterize(mesh, map, circle, 512);
  int expected = 0;
  for (int i = 0; i < space.size(); ++i) {
    bool live = false;
    for (const auto& e : space.support(i)) live = live || raster[mesh.flat(e)].first;
    expected += live;
  }
  EXPECT_EQ(static_cast<int>(active_index_set(space, cls).size()), expected);
  const auto big = TrimmingBoundary<2>::circle(Vec<2>::Zero(), 10.0, KeepSide::Negative);
  EXPECT_EQ(static_cast<int>(active_index_set(space, classify(mesh, map, big)).size()), space.size());
}
