#include <gtest/gtest.h>

#include <tiga/geometry.hpp>

#include <random>

#include "oracles.hpp"

using namespace tiga;

TEST(KnotVector, RejectsMalformedInput) {
  EXPECT_THROW(KnotVector(2, {0, 0, 1, 1}), DomainError);
  EXPECT_THROW(KnotVector(1, {0, 0, 0, 1, 1}), DomainError);
  EXPECT_THROW(KnotVector(1, {0, 0.5, 0.2, 1}), DomainError);
  EXPECT_THROW(KnotVector(1, {0, 0, 0, 0}), DomainError);
  EXPECT_THROW(KnotVector(2, {0, 0, 0, 0.5, 0.5, 0.5, 1, 1, 1}), DomainError);
  EXPECT_NO_THROW(KnotVector(2, {0, 0, 0, 0.5, 0.5, 1, 1, 1}));
}

TEST(KnotVector, LinearHatValues) {
  const KnotVector kv(1, {0, 0, 1, 1});
  double v[2], d[2];
  kv.eval(0, 0.25, v, d);
  EXPECT_DOUBLE_EQ(v[0], 0.75);
  EXPECT_DOUBLE_EQ(v[1], 0.25);
  EXPECT_DOUBLE_EQ(d[0], -1.0);
  EXPECT_DOUBLE_EQ(d[1], 1.0);
}

TEST(KnotVector, QuadraticAtInteriorKnot) {
  const KnotVector kv(2, {0, 0, 0, 0.5, 1, 1, 1});
  const int el = kv.find_element(0.5);
  double v[3], d[3];
  kv.eval(el, 0.5, v, d);
  const std::vector<double> t = kv.knots();
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(v[a], oracle::cox_de_boor(t, kv.first_function(el) + a, 2, 0.5), 1e-15);
  EXPECT_EQ(kv.first_function(el), 1);
  EXPECT_NEAR(v[0], 0.5, 1e-15);
  EXPECT_NEAR(v[1], 0.5, 1e-15);
  EXPECT_NEAR(v[2], 0.0, 1e-15);
}

TEST(KnotVector, MatchesRecursiveCoxDeBoor) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int p = 1; p <= 6; ++p) {
    std::vector<double> t(p + 1, 0.0);
    for (double k : {0.1, 0.3, 0.55, 0.8}) t.push_back(k);
    if (p > 1) t.insert(t.begin() + p + 2, 0.3);  // double knot
    t.insert(t.end(), p + 1, 1.0);
    const KnotVector kv(p, t);
    std::vector<double> v(p + 1), d(p + 1);
    for (int s = 0; s < 50; ++s) {
      const double x = s == 0 ? 1.0 : u(rng);
      const int el = kv.find_element(x);
      kv.eval(el, x, v.data(), d.data());
      for (int a = 0; a <= p; ++a) {
        const int i = kv.first_function(el) + a;
        EXPECT_NEAR(v[a], oracle::cox_de_boor(t, i, p, x), 1e-13) << "p=" << p << " x=" << x;
        if (x < 1.0) {
          EXPECT_NEAR(d[a], oracle::cox_de_boor_derivative(t, i, p, x), 1e-10);
        }
      }
    }
  }
}

TEST(TensorSpace, PartitionOfUnityAndLocalCount) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const TensorBSplineSpace<3> space({KnotVector::uniform(2, 4), KnotVector::uniform(3, 3), KnotVector::uniform(1, 5)});
  EXPECT_EQ(space.size(), 6 * 6 * 6);
  BasisValues<3> bv;
  for (int s = 0; s < 100; ++s) {
    const Vec<3> x(u(rng), u(rng), u(rng));
    space.eval(space.find_element(x), x, bv);
    EXPECT_EQ(static_cast<int>(bv.values.size()), 3 * 4 * 2);
    double sum = 0.0;
    Vec<3> g = Vec<3>::Zero();
    for (size_t i = 0; i < bv.values.size(); ++i) {
      sum += bv.values[i];
      g += bv.gradients[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
    EXPECT_LT(g.norm(), 1e-11);
  }
}

TEST(TensorSpace, SupportSizes) {
  const TensorBSplineSpace<1> line({KnotVector::uniform(2, 8)});
  EXPECT_EQ(line.support(4).size(), 3u);
  EXPECT_EQ(line.support(0).size(), 1u);
  const TensorBSplineSpace<2> sq({KnotVector::uniform(2, 8), KnotVector::uniform(3, 8)});
  const int interior = flat_index<2>({4, 5}, sq.dims());
  EXPECT_EQ(sq.support(interior).size(), 12u);
}

TEST(GeometryMap, IdentityBox) {
  const double L = 2.0 / 0.7;
  const auto m = GeometryMap<2>::identity_box(Vec<2>::Constant(-L / 2), Vec<2>::Constant(L / 2));
  EXPECT_LT(m.point(Vec<2>(0.5, 0.5)).norm(), 1e-15);
  EXPECT_NEAR(m.jacobian(Vec<2>(0.3, 0.9)).det, L * L, 1e-13);
}

TEST(GeometryMap, DistortionFixesBoundaryAndMatchesDifferences) {
  const auto m = GeometryMap<2>::distorted_box(Vec<2>(-1, -1), Vec<2>(1, 1));
  for (const Vec<2>& c : {Vec<2>(0, 0), Vec<2>(1, 0), Vec<2>(0, 1), Vec<2>(1, 1)})
    EXPECT_LT((m.point(c) - (2 * c - Vec<2>::Ones())).norm(), 1e-15);
  EXPECT_NEAR(m.point(Vec<2>(0.3, 0.0))[1], -1.0, 1e-15);
  EXPECT_GT((m.point(Vec<2>(0.5, 0.5)) - Vec<2>(0, 0)).norm(), 0.05);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 50; ++s) {
    const Vec<2> x(u(rng), u(rng));
    const Mat<2> J = m.jacobian(x).J;
    for (int d = 0; d < 2; ++d) {
      const Vec<2> fd = oracle::fd_first(
                            [&](double t) {
                              Vec<2> y = x;
                              y[d] = t;
                              return m.point(y)[0];
                            },
                            x[d], 1e-3) *
                            Vec<2>(1, 0) +
                        oracle::fd_first(
                            [&](double t) {
                              Vec<2> y = x;
                              y[d] = t;
                              return m.point(y)[1];
                            },
                            x[d], 1e-3) *
                            Vec<2>(0, 1);
      EXPECT_LT((J.col(d) - fd).norm(), 1e-6 * J.norm());
    }
    EXPECT_GT(m.jacobian(x).det, 0.0);
  }
}

TEST(GeometryMap, DistortedJacobianContinuousAcrossKnotLines) {
  const auto m = GeometryMap<3>::distorted_box(Vec<3>::Zero(), Vec<3>::Ones());
  for (double y : {0.1, 0.4, 0.7}) {
    const double a = m.jacobian(Vec<3>(0.5 - 1e-12, y, 0.3)).det, b = m.jacobian(Vec<3>(0.5 + 1e-12, y, 0.3)).det;
    EXPECT_NEAR(a, b, 1e-9);
  }
}

TEST(GeometryMap, SplineWithGrevilleControlIsIdentity) {
  const auto space = TensorBSplineSpace<2>::uniform(3, 4);
  std::vector<Vec<2>> ctrl(space.size());
  for (int i = 0; i < space.size(); ++i) {
    const auto mi = unflatten<2>(i, space.dims());
    ctrl[i] = Vec<2>(space.knots(0).greville(mi[0]), space.knots(1).greville(mi[1]));
  }
  const auto m = GeometryMap<2>::spline(space, ctrl);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 100; ++s) {
    const Vec<2> x(u(rng), u(rng));
    EXPECT_LT((m.point(x) - x).norm(), 1e-14);
    EXPECT_NEAR(m.jacobian(x).det, 1.0, 1e-13);
  }
}

TEST(GeometryMap, FoldedSplineRejected) {
  const auto space = TensorBSplineSpace<1>::uniform(1, 1);
  const auto m = GeometryMap<1>::spline(space, {Vec<1>(1.0), Vec<1>(0.0)});
  EXPECT_THROW(m.jacobian(Vec<1>(0.5)), GeometryError);
}

TEST(BezierMesh, BoxesPartitionTheParametricBox) {
  const auto space = TensorBSplineSpace<2>({KnotVector(2, {0, 0, 0, 0.2, 0.7, 1, 1, 1}), KnotVector::uniform(1, 3)});
  const BezierMesh<2> mesh(space, GeometryMap<2>::identity_box(Vec<2>::Zero(), Vec<2>::Ones()));
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) total += mesh.box(e).measure();
  EXPECT_EQ(mesh.num_elements(), 9);
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_EQ(mesh.flat(mesh.multi_index(5)), 5);
}
