#include <gtest/gtest.h>

#include <tiga/assembly.hpp>

#include "oracles.hpp"

using namespace tiga;

TEST(GaussLegendre, LowOrderClosedForms) {
  std::vector<double> x, w;
  gauss_legendre_1d(1, x, w);
  EXPECT_DOUBLE_EQ(x[0], 0.5);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  gauss_legendre_1d(2, x, w);
  EXPECT_NEAR(x[0], 0.5 - 0.5 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(x[1], 0.5 + 0.5 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(w[0], 0.5, 1e-15);
  EXPECT_NEAR(w[1], 0.5, 1e-15);
}

TEST(GaussLegendre, MatchesGolubWelsch) {
  for (int n = 1; n <= 30; ++n) {
    std::vector<double> x, w, gx, gw;
    gauss_legendre_1d(n, x, w);
    oracle::golub_welsch(n, gx, gw);
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(x[i], gx[i], 1e-14) << "n=" << n;
      EXPECT_NEAR(w[i], gw[i], 1e-14) << "n=" << n;
    }
  }
}

TEST(GaussLegendre, ExactnessSweep) {
  for (int n = 1; n <= 10; ++n) {
    const auto rule = gauss_legendre<1>(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * std::pow(rule.points[q][0], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-13) << "n=" << n << " k=" << k;
    }
  }
  const auto r2 = gauss_legendre<2>(3);
  double s = 0.0;
  for (size_t q = 0; q < r2.size(); ++q) s += r2.weights[q] * std::pow(r2.points[q][0], 5) * std::pow(r2.points[q][1], 4);
  EXPECT_NEAR(s, 1.0 / 30.0, 1e-14);
}

TEST(GaussLegendre, OutOfRange) {
  std::vector<double> x, w;
  EXPECT_THROW(gauss_legendre_1d(0, x, w), DomainError);
  EXPECT_THROW(gauss_legendre_1d(31, x, w), DomainError);
}

TEST(CollapsedTriangle, WeightsAndMonomials) {
  for (int n = 1; n <= 8; ++n) {
    const auto rule = collapsed_triangle(n);
    EXPECT_EQ(rule.size(), static_cast<size_t>(n * n));
    double sw = 0.0, sx = 0.0;
    for (size_t q = 0; q < rule.size(); ++q) {
      EXPECT_GT(rule.weights[q], 0.0);
      sw += rule.weights[q];
      sx += rule.weights[q] * rule.points[q][0];
    }
    EXPECT_NEAR(sw, 0.5, 1e-15);
    if (n > 1) {
      EXPECT_NEAR(sx, 1.0 / 6.0, 1e-15);
    }
    // x^a y^b over the triangle = a! b! / (a + b + 2)!
    const int deg = 2 * n - 2;
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        double s = 0.0;
        for (size_t q = 0; q < rule.size(); ++q)
          s += rule.weights[q] * std::pow(rule.points[q][0], a) * std::pow(rule.points[q][1], b);
        EXPECT_NEAR(s, std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3), 1e-13);
      }
  }
}

TEST(TileRule, IdentityAndAffineTiles) {
  const auto ref = gauss_legendre<2>(4);
  Box<2> unit;
  const auto same = map_through_tile(detail::affine_quad(unit, 2), ref);
  for (size_t q = 0; q < ref.size(); ++q) {
    EXPECT_LT((same.points[q] - ref.points[q]).norm(), 1e-15);
    EXPECT_NEAR(same.weights[q], ref.weights[q], 1e-15);
  }
  Box<3> b;
  b.lo = Vec<3>(0.1, 0.2, 0.3);
  b.hi = Vec<3>(0.6, 0.7, 0.8);
  const auto ref3 = gauss_legendre<3>(2);
  const auto scaled = map_through_tile(detail::affine_hex(b, 1), ref3);
  for (size_t q = 0; q < ref3.size(); ++q) EXPECT_NEAR(scaled.weights[q], ref3.weights[q] * 0.125, 1e-16);
}

TEST(TileRule, InvertedTileRejected) {
  Box<2> unit;
  Tile<2> t = detail::affine_quad(unit, 1);
  std::swap(t.nodes[0], t.nodes[1]);
  std::swap(t.nodes[2], t.nodes[3]);
  EXPECT_THROW(map_through_tile(t, gauss_legendre<2>(2)), ReparamError);
}

// cut elements of a centered disk: tile areas against the exact disk-rectangle area
TEST(TileRule, CutElementAreasMatchOracle) {
  const auto map = GeometryMap<2>::identity_box(Vec<2>(-1.5, -1.5), Vec<2>(1.5, 1.5));
  const auto circle = TrimmingBoundary<2>::circle(Vec<2>::Zero(), 1.0, KeepSide::Negative);
  ReparamOptions ro;
  ro.degree = 3;
  const auto d = discretize<2>(TensorBSplineSpace<2>::uniform(3, 16), map, circle, ro);
  ASSERT_GT(d.reparams.size(), 10u);
  double worst = 0.0;
  for (const auto& rp : d.reparams) {
    double area = 0.0;
    for (const auto& t : rp.tiles)
      for (double w : tile_rule(t, 6).weights) area += w;
    const Vec<2> lo = map.point(rp.box.lo), hi = map.point(rp.box.hi);
    const double exact = oracle::disk_rect_area(1.0, lo[0], hi[0], lo[1], hi[1]) / 9.0;
    worst = std::max(worst, std::abs(area - exact) / rp.box.measure());
  }
  // O(h^4) relative to the element measure at r = 3
  EXPECT_LT(worst, 1e-5);
}

TEST(BoundaryRule, StraightFaceLengthAndNormals) {
  SurfaceTile<2> face;
  face.degree = 2;
  face.nodes = {Vec<2>(0.2, 0.1), Vec<2>(0.35, 0.3), Vec<2>(0.5, 0.5)};
  const auto map = GeometryMap<2>::identity_box(Vec<2>::Zero(), Vec<2>(2.0, 2.0));
  const auto rule = boundary_rule(face, 4, map);
  double len = 0.0;
  for (size_t q = 0; q < rule.size(); ++q) {
    len += rule.weights[q];
    EXPECT_NEAR(rule.normals[q].norm(), 1.0, 1e-14);
    EXPECT_NEAR(rule.normals[q].dot(Vec<2>(0.6, 0.8)), 0.0, 1e-14);
  }
  EXPECT_NEAR(len, 2.0 * 0.5, 1e-14);
}

TEST(BoundaryRule, CirclePerimeterAndOutwardNormals) {
  const auto map = GeometryMap<2>::identity_box(Vec<2>(-1.5, -1.5), Vec<2>(1.5, 1.5));
  const auto circle = TrimmingBoundary<2>::circle(Vec<2>::Zero(), 1.0, KeepSide::Negative);
  ReparamOptions ro;
  ro.degree = 2;
  const auto d = discretize<2>(TensorBSplineSpace<2>::uniform(2, 32), map, circle, ro);
  double len = 0.0;
  for (const auto& rp : d.reparams)
    for (const auto& f : boundary_faces(rp)) {
      const auto rule = boundary_rule(f, 4, map);
      for (size_t q = 0; q < rule.size(); ++q) {
        len += rule.weights[q];
        const Vec<2> x = map.point(rule.points[q]);
        EXPECT_GT(rule.normals[q].dot(x), 0.99);
      }
    }
  EXPECT_NEAR(len, 2 * oracle::pi, 1e-6);
}
