#pragma once

#include "config.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <functional>
#include <random>

namespace tiga {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace verify_detail {

inline std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// random open knot vector with interior multiplicities up to p
inline KnotVector random_knots(int p, int spans, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> inner;
  for (int i = 0; i < spans - 1; ++i) inner.push_back(u(rng));
  std::sort(inner.begin(), inner.end());
  std::vector<double> k(p + 1, 0.0);
  for (double v : inner) {
    const int mult = 1 + static_cast<int>(u(rng) * p);
    k.insert(k.end(), mult, v);
  }
  k.insert(k.end(), p + 1, 1.0);
  return KnotVector(p, std::move(k));
}

inline CheckResult partition_of_unity(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0, worst_d = 0.0;
  for (int p = 1; p <= 6; ++p) {
    std::array<KnotVector, 2> kv{random_knots(p, 7, rng), random_knots(p, 5, rng)};
    const TensorBSplineSpace<2> space(kv);
    BasisValues<2> bv;
    for (int s = 0; s < 200; ++s) {
      const Vec<2> x(u(rng), u(rng));
      space.eval(space.find_element(x), x, bv);
      double sum = 0.0;
      Vec<2> g = Vec<2>::Zero();
      for (size_t i = 0; i < bv.values.size(); ++i) {
        if (bv.values[i] < -1e-15) worst = 1.0;
        sum += bv.values[i];
        g += bv.gradients[i];
      }
      worst = std::max(worst, std::abs(sum - 1.0));
      worst_d = std::max(worst_d, g.norm());
    }
  }
  return {"partition of unity", worst < 1e-13 && worst_d < 1e-9,
          fmt("max |sum - 1| = %.2e, max |sum grad| = %.2e", worst, worst_d)};
}

inline CheckResult gauss_exactness() {
  double worst = 0.0;
  for (int n = 1; n <= 30; ++n) {
    std::vector<double> x, w;
    gauss_legendre_1d(n, x, w);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      long double s = 0.0L;
      for (int i = 0; i < n; ++i) s += w[i] * std::pow(static_cast<long double>(x[i]), k);
      worst = std::max(worst, static_cast<double>(std::abs(s * (k + 1) - 1.0L)));
    }
  }
  double tri = 0.0;
  for (int n = 1; n <= 12; ++n) {
    const QuadratureRule<2> rule = collapsed_triangle(n);
    // the collapse costs one degree: exact up to total degree 2n - 2
    for (int a = 0; a <= 2 * n - 2; ++a)
      for (int b = 0; a + b <= 2 * n - 2; ++b) {
        double s = 0.0;
        for (size_t q = 0; q < rule.size(); ++q)
          s += rule.weights[q] * std::pow(rule.points[q][0], a) * std::pow(rule.points[q][1], b);
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        tri = std::max(tri, std::abs(s - exact) / exact);
      }
  }
  return {"gauss exactness n = 1..30", worst < 1e-13 && tri < 1e-12,
          fmt("max relative monomial error: line %.2e, triangle %.2e", worst, tri)};
}

// discrete measures of an untrimmed distorted box, a trimmed distorted box and a trimmed sphere octant
inline CheckResult pushforward_measure() {
  ReparamOptions ro;
  ro.degree = 3;
  const Vec<2> lo(-1.5, -1.5), hi(1.5, 1.5);
  const auto plain = discretize<2>(TensorBSplineSpace<2>::uniform(3, 8), GeometryMap<2>::distorted_box(lo, hi),
                                   TrimmingBoundary<2>(), ro);
  const double box_err = std::abs(geometric_measures(plain).domain - 9.0) / 9.0;
  const auto disk = discretize<2>(TensorBSplineSpace<2>::uniform(3, 32), GeometryMap<2>::distorted_box(lo, hi),
                                  TrimmingBoundary<2>::circle(Vec<2>::Zero(), 1.0, KeepSide::Negative), ro);
  const GeometricMeasures gd = geometric_measures(disk);
  const double disk_err = std::abs(gd.domain - pi) / pi, circ_err = std::abs(gd.boundary - 2 * pi) / (2 * pi);
  ReparamOptions r3;
  r3.degree = 2;
  const auto ball = discretize<3>(TensorBSplineSpace<3>::uniform(2, 6), GeometryMap<3>::identity_box(
                                      Vec<3>::Zero(), Vec<3>::Ones()),
                                  TrimmingBoundary<3>::sphere(Vec<3>::Zero(), 1.0, KeepSide::Negative), r3);
  const double ball_err = std::abs(geometric_measures(ball).domain - pi / 6) / (pi / 6);
  const bool ok = box_err < 1e-13 && disk_err < 1e-6 && circ_err < 1e-6 && ball_err < 1e-3;
  char buf[200];
  std::snprintf(buf, sizeof buf, "relative errors: box %.1e, disk %.1e, circle %.1e, octant %.1e", box_err, disk_err,
                circ_err, ball_err);
  return {"push-forward measure consistency", ok, buf};
}

inline CheckResult assembly_properties() {
  std::ostringstream msg;
  bool ok = true;
  {
    const auto mc = case_poisson_2d(false, 0.0);
    ReparamOptions ro;
    ro.degree = 2;
    const auto d = discretize<2>(TensorBSplineSpace<2>::uniform(2, 8), mc.map, mc.boundary, ro);
    const LinearSystem sys = assemble(d, mc.problem);
    const Eigen::MatrixXd A(sys.A);
    const double asym = (A - A.transpose()).norm() / A.norm();
    const double null = (A * Eigen::VectorXd::Ones(A.rows())).norm() / A.norm();
    // positive on the complement of the constants
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(A.rows(), A.rows()) -
                        Eigen::MatrixXd::Constant(A.rows(), A.rows(), 1.0 / A.rows());
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q * A * Q).eigenvalues();
    const double second = ev[1] / ev[ev.size() - 1];
    ok = ok && asym < 1e-14 && null < 1e-12 && second > 1e-14;
    msg << "poisson asym " << asym << ", A*1 " << null << ", lambda_2/lambda_max " << second;
  }
  {
    const auto mc = case_plate_with_hole();
    ReparamOptions ro;
    ro.degree = 2;
    const auto d = discretize<2>(TensorBSplineSpace<2>::uniform(2, 8), mc.map, mc.boundary, ro);
    const LinearSystem sys = apply_dirichlet(assemble(d, mc.problem), d, mc.problem);
    const Eigen::SparseMatrix<double> At = sys.A.transpose();
    const double asym = (sys.A - At).norm() / sys.A.norm();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys.A);
    const bool spd = ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0;
    ok = ok && asym < 1e-14 && spd;
    msg << "; elasticity asym " << asym << ", spd " << (spd ? "yes" : "no");
  }
  return {"assembly symmetry / SPD", ok, msg.str()};
}

// active functions counted from supports, independently of the library's active set
inline CheckResult dimension_lemma() {
  std::ostringstream msg;
  bool ok = true;
  auto check2 = [&](const ManufacturedCase<2>& mc, int p, int n) {
    ReparamOptions ro;
    ro.degree = p;
    const auto d = discretize<2>(TensorBSplineSpace<2>::uniform(p, n), mc.map, mc.boundary, ro);
    int count = 0;
    for (int i = 0; i < d.space.size(); ++i) {
      bool live = false;
      for (const auto& e : d.space.support(i)) live = live || d.classification.labels[d.mesh.flat(e)] != Label::Exterior;
      count += live;
    }
    const LinearSystem sys = assemble(d, mc.problem);
    const bool good = count == static_cast<int>(d.active.size()) &&
                      sys.A.rows() == count * mc.problem.components();
    ok = ok && good;
    msg << mc.name << " p=" << p << " n=" << n << ": " << count << " active, block " << sys.A.rows() << "; ";
  };
  check2(case_poisson_2d(false, 0.0), 2, 16);
  check2(case_poisson_2d(true, 0.0), 3, 8);
  check2(case_plate_with_hole(), 2, 8);
  return {"dimension lemma", ok, msg.str()};
}

template <int Dim>
bool tiles_valid(const Discretization<Dim>& d, double& min_det, double& max_phi) {
  bool ok = true;
  for (const auto& rp : d.reparams) {
    const ReparamReport rep = validate(rp, d.boundary, d.map);
    min_det = std::min(min_det, rep.min_detJ);
    max_phi = std::max(max_phi, rep.max_phi_on_gamma);
    ok = ok && rep.contained && rep.min_detJ > 0.0;
  }
  return ok;
}

inline CheckResult tile_validity() {
  double min_det = 1e300, max_phi = 0.0;
  bool ok = true;
  for (int r = 1; r <= 3; ++r)
    for (bool distorted : {false, true}) {
      const auto mc = case_poisson_2d(distorted, 0.0);
      ReparamOptions ro;
      ro.degree = r;
      ro.ht_divisions = r == 1 ? 4 : 1;
      ok = tiles_valid(discretize<2>(TensorBSplineSpace<2>::uniform(r, 16), mc.map, mc.boundary, ro), min_det,
                       max_phi) && ok;
    }
  const auto plate = case_plate_with_hole();
  ReparamOptions ro;
  ro.degree = 2;
  ok = tiles_valid(discretize<2>(TensorBSplineSpace<2>::uniform(2, 16), plate.map, plate.boundary, ro), min_det,
                   max_phi) && ok;
  const auto ball = case_poisson_3d();
  ok = tiles_valid(discretize<3>(TensorBSplineSpace<3>::uniform(2, 6), ball.map, ball.boundary, ro), min_det,
                   max_phi) && ok;
  ok = ok && max_phi < 1e-12;
  return {"tile containment / Jacobian positivity", ok,
          fmt("min tile det J = %.3e, max |phi| on gamma_h nodes = %.2e", min_det, max_phi)};
}

inline std::string csv_of(const std::vector<RunRow>& rows) {
  std::vector<RunRow> copy = rows;
  for (auto& r : copy) r.secs = 0.0;
  std::ostringstream os;
  write_csv(os, copy);
  return os.str();
}

inline CheckResult byte_identical_reruns(std::uint64_t seed) {
  RunOptions opt;
  opt.seed = seed;
  opt.conditioning = true;
  auto sweep = [&](int threads) {
    RunOptions o = opt;
    o.threads = threads;
    std::vector<RunRow> rows;
    rows.push_back(run_case(case_poisson_2d(true, 1e-8), 2, 2, 1, 16, o));
    rows.push_back(run_case(case_plate_with_hole(), 2, 1, 2, 8, o));
    rows.push_back(run_case(case_poisson_3d(), 2, 2, 1, 4, o));
    return csv_of(rows);
  };
  const std::string a = sweep(1), b = sweep(1), c = sweep(3), e = sweep(3);
  const bool ok = a == b && c == e;
  return {"byte-identical reruns", ok,
          ok ? "serial and 3-thread reruns reproduce the CSV bytes" : "rerun output differs"};
}

}  // namespace verify_detail

// property suite behind `trimmed-iga verify`
inline std::vector<CheckResult> run_verify(std::uint64_t seed = 0) {
  using namespace verify_detail;
  const std::vector<std::function<CheckResult()>> checks = {
      [&] { return partition_of_unity(seed); }, gauss_exactness, pushforward_measure,    assembly_properties,
      dimension_lemma,                          tile_validity,   [&] { return byte_identical_reruns(seed); }};
  std::vector<CheckResult> out;
  for (const auto& c : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      out.push_back(c());
    } catch (const std::exception& ex) {
      out.push_back({"(check threw)", false, ex.what()});
    }
    out.back().seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return out;
}

}  // namespace tiga
