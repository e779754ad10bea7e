#include <gtest/gtest.h>

#include <tiga/analysis.hpp>

#include <random>

#include "oracles.hpp"

using namespace tiga;

namespace {

// tensor Gauss rule in polar coordinates over the disk of radius R
template <class F>
double disk_integral(F f, double R = 1.0, int n = 40) {
  std::vector<double> x, w;
  oracle::golub_welsch(n, x, w);
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double r = R * x[i], t = 2 * oracle::pi * x[j];
      s += w[i] * w[j] * R * 2 * oracle::pi * r * f(Vec<2>(r * std::cos(t), r * std::sin(t)));
    }
  return s;
}

}  // namespace

TEST(Poisson2d, SourceIsLaplacianOfSolution) {
  const auto mc = case_poisson_2d();
  const double L = poisson2d_box_side();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int s = 0; s < 100; ++s) {
    const Vec<2> x(u(rng), u(rng));
    const double val = mc.exact_u(x)[0];
    const double lap = oracle::fd_laplacian<2>([&](const Vec<2>& y) { return mc.exact_u(y)[0]; }, x);
    EXPECT_NEAR(mc.problem.source(x)[0], lap, 1e-7);
    if (std::abs(val) > 1e-3) {
      EXPECT_NEAR(mc.problem.source(x)[0] / val, -8 * oracle::pi * oracle::pi / (L * L), 1e-10);
    }
  }
}

TEST(Poisson2d, NeumannDataAndZeroMean) {
  const auto mc = case_poisson_2d();
  const Vec<2> e1(1, 0);
  EXPECT_NEAR(mc.problem.neumann(e1, e1, BoundaryPart::Trimmed)[0], 0.0, 1e-15);
  // trimmed data uses the exact circle normal whatever the discrete normal
  const Vec<2> x(std::cos(0.7), std::sin(0.7));
  const double ref = (mc.exact_grad(x).row(0) * x)(0);
  EXPECT_NEAR(mc.problem.neumann(x, Vec<2>(0.6, 0.8), BoundaryPart::Trimmed)[0], ref, 1e-14);
  EXPECT_NEAR(disk_integral([&](const Vec<2>& y) { return mc.exact_u(y)[0]; }), 0.0, 1e-14);
  // flux balance: boundary integral of the normal derivative equals the source integral
  double flux = 0.0;
  std::vector<double> t, w;
  oracle::golub_welsch(60, t, w);
  for (int i = 0; i < 60; ++i) {
    const double a = 2 * oracle::pi * t[i];
    const Vec<2> y(std::cos(a), std::sin(a));
    flux += 2 * oracle::pi * w[i] * mc.problem.neumann(y, y, BoundaryPart::Trimmed)[0];
  }
  EXPECT_NEAR(flux, disk_integral([&](const Vec<2>& y) { return mc.problem.source(y)[0]; }), 1e-12);
}

TEST(Poisson3d, SourceBoundaryAndSymmetry) {
  const auto mc = case_poisson_3d();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  int checked = 0;
  while (checked < 1000) {
    const Vec<3> x(u(rng), u(rng), u(rng));
    // u is only C^0 across the z axis; keep the difference stencils away from it
    if (x.norm() > 0.97 || std::hypot(x[0], x[1]) < 0.25) continue;
    const double lap = oracle::fd_laplacian<3>([&](const Vec<3>& y) { return mc.exact_u(y)[0]; }, x);
    ASSERT_NEAR(mc.problem.source(x)[0], lap, 1e-7) << x.transpose();
    for (int d = 0; d < 3; ++d) {
      const double fd = oracle::fd_first(
          [&](double s) {
            Vec<3> y = x;
            y[d] = s;
            return mc.exact_u(y)[0];
          },
          x[d]);
      ASSERT_NEAR(mc.exact_grad(x)(0, d), fd, 1e-8);
    }
    ++checked;
  }
  for (int s = 0; s < 50; ++s) {
    Vec<3> x(u(rng), u(rng), u(rng));
    EXPECT_NEAR(mc.exact_u(x.normalized())[0], 0.0, 1e-15);
    x[0] = 0.0;
    EXPECT_EQ(mc.exact_u(x)[0], 0.0);
  }
}

TEST(Kirsch, ConcentrationHoleTractionAndFarField) {
  const PlateParameters pp;
  EXPECT_NEAR(kirsch_stress(pp, Vec<2>(0, pp.R))[0], 3 * pp.Tx, 1e-12);
  EXPECT_NEAR(kirsch_stress(pp, Vec<2>(pp.R, 0))[1], -pp.Tx, 1e-12);
  for (int k = 0; k <= 20; ++k) {
    const double t = 0.5 * oracle::pi * k / 20;
    const Vec<2> n(std::cos(t), std::sin(t));
    const Eigen::Vector3d s = kirsch_stress(pp, pp.R * n);
    EXPECT_NEAR(s[0] * n[0] + s[2] * n[1], 0.0, 1e-12);
    EXPECT_NEAR(s[2] * n[0] + s[1] * n[1], 0.0, 1e-12);
  }
  const Eigen::Vector3d far = kirsch_stress(pp, Vec<2>(300, 200));
  EXPECT_NEAR(far[0], pp.Tx, 1e-3);
  EXPECT_NEAR(far[1], 0.0, 1e-3);
  EXPECT_NEAR(far[2], 0.0, 1e-3);
}

TEST(Kirsch, DisplacementMatchesPolarForm) {
  const PlateParameters pp;
  const oracle::Kirsch ref;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int s = 0; s < 100; ++s) {
    const Vec<2> x(u(rng), u(rng));
    if (x.norm() < 1.0) continue;
    EXPECT_LT((kirsch_displacement(pp, x) - ref.displacement(x[0], x[1])).norm(), 1e-15);
    EXPECT_LT((kirsch_stress(pp, x) - ref.stress(x[0], x[1])).norm(), 1e-12);
  }
}

TEST(Kirsch, DisplacementGeneratesTheStresses) {
  const PlateParameters pp;
  const oracle::Kirsch ref;
  const auto lib = [&](double x, double y) { return Eigen::Vector2d(kirsch_displacement(pp, Vec<2>(x, y))); };
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  int checked = 0;
  while (checked < 100) {
    const Vec<2> x(u(rng), u(rng));
    if (x.norm() < 1.01) continue;
    const Eigen::Vector3d s = ref.stress(x[0], x[1]);
    EXPECT_LT((ref.stress_of(lib, x[0], x[1]) - s).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((plane_strain_stress(pp, kirsch_displacement_gradient(pp, x)) - s).cwiseAbs().maxCoeff(), 1e-10);
    ++checked;
  }
}

TEST(Kirsch, PrintedVerticalDisplacementFailsStressCheck) {
  const oracle::Kirsch ref;
  const auto printed = [&](double x, double y) { return ref.printed_displacement(x, y); };
  double worst = 0.0;
  for (const Vec<2>& x : {Vec<2>(1.5, 0.5), Vec<2>(0.5, 2.0), Vec<2>(3.0, 3.0)})
    worst = std::max(worst, (ref.stress_of(printed, x[0], x[1]) - ref.stress(x[0], x[1])).cwiseAbs().maxCoeff());
  EXPECT_GT(worst, 1.0);
}

TEST(ErrorNorms, ZeroFieldGivesSolutionNorm) {
  const auto mc = case_poisson_2d();
  ReparamOptions ro;
  ro.degree = 3;
  const auto d = discretize<2>(TensorBSplineSpace<2>::uniform(3, 32), mc.map, mc.boundary, ro);
  const ErrorNorms en = error_norms(d, Eigen::VectorXd::Zero(static_cast<int>(d.active.size())), mc, 2);
  const double l2 = std::sqrt(disk_integral([&](const Vec<2>& y) { return std::pow(mc.exact_u(y)[0], 2); }));
  const double semi = disk_integral([&](const Vec<2>& y) { return mc.exact_grad(y).squaredNorm(); });
  EXPECT_NEAR(en.l2, l2, 1e-7);
  EXPECT_NEAR(en.h1, std::sqrt(l2 * l2 + semi), 1e-6);
  EXPECT_NEAR(en.l2 * en.l2, en.l2_int * en.l2_int + en.l2_cut * en.l2_cut, 1e-14);
  EXPECT_NEAR(en.h1 * en.h1, en.h1_int * en.h1_int + en.h1_cut * en.h1_cut, 1e-13);
}

TEST(ErrorNorms, SolutionErrorSmallAndSplit) {
  const auto mc = case_poisson_2d();
  RunOptions opt;
  RunArtifacts<2> art;
  const RunRow row = run_case(mc, 3, 3, 1, 32, opt, &art);
  ASSERT_TRUE(row.failure.empty()) << row.failure;
  EXPECT_TRUE(row.converged);
  EXPECT_LT(row.l2, 1e-5);
  EXPECT_LT(row.h1, 1e-3);
  EXPECT_GT(row.h1_cut, 0.0);
  EXPECT_GT(row.h1_int, 0.0);
  EXPECT_NEAR(row.h1, std::hypot(row.h1_cut, row.h1_int), 1e-14);
  EXPECT_EQ(art.coef.size(), static_cast<int>(art.disc.active.size()));
}

TEST(GeometricMeasures, DiskAreaAndPerimeter) {
  const auto mc = case_poisson_2d();
  ReparamOptions ro;
  ro.degree = 3;
  const auto d = discretize<2>(TensorBSplineSpace<2>::uniform(3, 32), mc.map, mc.boundary, ro);
  const GeometricMeasures gm = geometric_measures(d);
  EXPECT_NEAR(gm.domain, oracle::pi, 1e-7);
  EXPECT_NEAR(gm.boundary, 2 * oracle::pi, 1e-7);
}

TEST(OracleMeasure, FullBoxAndDisk) {
  const auto mc = case_poisson_2d();
  const MeasureEstimate full = oracle_measure(TrimmingBoundary<2>::none(), mc.map, Box<2>{}, 100000);
  EXPECT_NEAR(full.value, mc.extent * mc.extent, 1e-10);
  EXPECT_EQ(full.stderr_, 0.0);
  const MeasureEstimate disk = oracle_measure(mc.boundary, mc.map, Box<2>{}, 1000000, 7);
  EXPECT_GT(disk.stderr_, 0.0);
  EXPECT_LT(std::abs(disk.value - oracle::pi), 3 * disk.stderr_ + 1e-12);
  const auto dist = case_poisson_2d(true);
  const MeasureEstimate dd = oracle_measure(dist.boundary, dist.map, Box<2>{}, 1000000, 8);
  EXPECT_LT(std::abs(dd.value - oracle::pi), 3 * dd.stderr_ + 1e-12);
  EXPECT_THROW(oracle_measure(mc.boundary, mc.map, Box<2>{}, 9999), DomainError);
}

TEST(FitSlope, PowerLawsAndFloor) {
  const std::vector<double> h = {0.4, 0.2, 0.1, 0.05};
  std::vector<double> e;
  for (double x : h) e.push_back(7 * std::pow(x, 3));
  EXPECT_NEAR(fit_slope(h, e), 3.0, 1e-12);
  e.back() = 1e-13;  // below ten times the floor: ignored
  EXPECT_NEAR(fit_slope(h, e, 1e-14), 3.0, 1e-12);
  EXPECT_TRUE(std::isnan(fit_slope({0.1}, {1.0})));
  EXPECT_TRUE(std::isnan(fit_slope(h, {NAN, NAN, NAN, 1.0})));
}

TEST(RunCase, FailuresAreCaptured) {
  const auto mc = case_poisson_2d();
  RunOptions opt;
  const RunRow bad = run_case(mc, 2, 3, 1, 8, opt);
  EXPECT_FALSE(bad.failure.empty());
  EXPECT_TRUE(std::isnan(bad.l2));
  const RunRow zero = run_case(mc, 0, 1, 1, 8, opt);
  EXPECT_FALSE(zero.failure.empty());
  ConvergenceRecord rec;
  rec.rows = {run_case(mc, 2, 2, 1, 8, opt), run_case(mc, 2, 2, 1, 16, opt), bad};
  fit_record(rec, 0.0);
  EXPECT_EQ(rec.slopes.size(), 2u);
}
