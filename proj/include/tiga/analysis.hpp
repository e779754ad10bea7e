#pragma once

#include "assembly.hpp"
#include "solver.hpp"

#include <chrono>
#include <limits>
#include <map>
#include <string>
#include <tuple>

namespace tiga {

template <int Dim>
struct ManufacturedCase {
  std::string name;
  GeometryMap<Dim> map;
  TrimmingBoundary<Dim> boundary;
  ProblemDefinition<Dim> problem;
  std::function<Field(const Vec<Dim>&)> exact_u;
  std::function<FieldGrad(const Vec<Dim>&)> exact_grad;
  double exact_measure = 0.0;           // area or volume of the trimmed domain
  double exact_boundary_measure = 0.0;  // length or area of the trimming curve inside the box
  double geo_precision = 0.0;
  bool mean_constraint = false;
  double extent = 1.0;  // side of the parametric box image, h = extent / n
};

inline double poisson2d_box_side() { return 2.0 / 0.7; }

// sin(2 pi x / L) sin(2 pi y / L) inside the unit circle, pure Neumann
inline ManufacturedCase<2> case_poisson_2d(bool distorted = false, double geo_precision = 0.0) {
  ManufacturedCase<2> c;
  const double L = poisson2d_box_side();
  const double k = 2.0 * pi / L;
  const Vec<2> lo(-0.5 * L, -0.5 * L), hi(0.5 * L, 0.5 * L);
  c.name = distorted ? "poisson2d_distorted" : "poisson2d";
  c.map = distorted ? GeometryMap<2>::distorted_box(lo, hi) : GeometryMap<2>::identity_box(lo, hi);
  c.boundary = TrimmingBoundary<2>::circle(Vec<2>::Zero(), 1.0, KeepSide::Negative);
  c.extent = L;
  c.geo_precision = geo_precision;
  c.exact_measure = pi;
  c.exact_boundary_measure = 2.0 * pi;
  c.mean_constraint = true;

  c.exact_u = [k](const Vec<2>& x) {
    Field f(1);
    f[0] = std::sin(k * x[0]) * std::sin(k * x[1]);
    return f;
  };
  c.exact_grad = [k](const Vec<2>& x) {
    FieldGrad g(1, 2);
    g(0, 0) = k * std::cos(k * x[0]) * std::sin(k * x[1]);
    g(0, 1) = k * std::sin(k * x[0]) * std::cos(k * x[1]);
    return g;
  };
  c.problem.pde = Pde::Poisson;
  c.problem.source = [k](const Vec<2>& x) {
    Field f(1);
    f[0] = -2.0 * k * k * std::sin(k * x[0]) * std::sin(k * x[1]);
    return f;
  };
  const auto grad = c.exact_grad;
  const auto boundary = c.boundary;
  c.problem.neumann = [grad, boundary](const Vec<2>& x, const Vec<2>& n, BoundaryPart part) {
    Vec<2> nn = n;
    if (part == BoundaryPart::Trimmed) nn = boundary.level_grad(x).normalized();
    Field f(1);
    f[0] = (grad(x).row(0) * nn)(0);
    return f;
  };
  const auto u = c.exact_u;
  c.problem.mean_field = [u](const Vec<2>& x) { return u(x)[0]; };
  return c;
}

struct PlateParameters {
  double L = 4.0;
  double R = 1.0;
  double Tx = 10.0;
  double E = 1e5;
  double nu = 0.3;

  double mu() const { return E / (2.0 * (1.0 + nu)); }
  double lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
};

// Kirsch stresses (xx, yy, xy) for uniaxial tension Tx along x
inline Eigen::Vector3d kirsch_stress(const PlateParameters& pp, const Vec<2>& x) {
  const double r = x.norm(), th = std::atan2(x[1], x[0]);
  const double a2 = pp.R * pp.R / (r * r), a4 = a2 * a2, T = pp.Tx;
  const double c2 = std::cos(2 * th), s2 = std::sin(2 * th);
  const double srr = 0.5 * T * (1 - a2) + 0.5 * T * (1 - 4 * a2 + 3 * a4) * c2;
  const double stt = 0.5 * T * (1 + a2) - 0.5 * T * (1 + 3 * a4) * c2;
  const double srt = -0.5 * T * (1 + 2 * a2 - 3 * a4) * s2;
  const double c = std::cos(th), s = std::sin(th);
  return Eigen::Vector3d(srr * c * c - 2 * srt * s * c + stt * s * s, srr * s * s + 2 * srt * s * c + stt * c * c,
                         (srr - stt) * s * c + srt * (c * c - s * s));
}

// plane-strain displacement matching the Kirsch stresses
inline Vec<2> kirsch_displacement(const PlateParameters& pp, const Vec<2>& x) {
  const double r = x.norm(), th = std::atan2(x[1], x[0]);
  if (r == 0.0) return Vec<2>::Zero();  // inside the hole, reached only by face collocation
  const double R = pp.R, nu = pp.nu, q = r * r / (R * R), f = pp.Tx * R * R / (4.0 * pp.mu() * r);
  return Vec<2>(f * ((2 - 2 * nu) * (q + 2) * std::cos(th) + (1 - 1 / q) * std::cos(3 * th)),
                f * ((4 * nu - 2 - 2 * nu * q) * std::sin(th) + (1 - 1 / q) * std::sin(3 * th)));
}

inline Mat<2> kirsch_displacement_gradient(const PlateParameters& pp, const Vec<2>& x) {
  const double r = x.norm(), th = std::atan2(x[1], x[0]);
  const double R = pp.R, nu = pp.nu, T = pp.Tx, mu = pp.mu();
  // u = T R^2/(4 mu) * [ A(r) cos th + B(r) cos 3th ,  C(r) sin th + B(r) sin 3th ]
  const double K = T * R * R / (4.0 * mu);
  const double A = (2 - 2 * nu) * (r / (R * R) + 2 / r), dA = (2 - 2 * nu) * (1 / (R * R) - 2 / (r * r));
  const double B = 1 / r - R * R / (r * r * r), dB = -1 / (r * r) + 3 * R * R / (r * r * r * r);
  const double C = (4 * nu - 2) / r - 2 * nu * r / (R * R), dC = -(4 * nu - 2) / (r * r) - 2 * nu / (R * R);
  const double c1 = std::cos(th), s1 = std::sin(th), c3 = std::cos(3 * th), s3 = std::sin(3 * th);
  const double ux_r = K * (dA * c1 + dB * c3), ux_t = K * (-A * s1 - 3 * B * s3);
  const double uy_r = K * (dC * s1 + dB * s3), uy_t = K * (C * c1 + 3 * B * c3);
  // d/dx = cos th d/dr - sin th / r d/dth, d/dy = sin th d/dr + cos th / r d/dth
  Mat<2> G;
  G << c1 * ux_r - s1 / r * ux_t, s1 * ux_r + c1 / r * ux_t, c1 * uy_r - s1 / r * uy_t, s1 * uy_r + c1 / r * uy_t;
  return G;
}

inline Eigen::Vector3d plane_strain_stress(const PlateParameters& pp, const Mat<2>& G) {
  const double lam = pp.lambda(), mu = pp.mu();
  const double div = G(0, 0) + G(1, 1);
  return Eigen::Vector3d(lam * div + 2 * mu * G(0, 0), lam * div + 2 * mu * G(1, 1), mu * (G(0, 1) + G(1, 0)));
}

// quarter plate [0,L]^2 minus the disc of radius R at the origin
inline ManufacturedCase<2> case_plate_with_hole(const PlateParameters& pp = {}) {
  ManufacturedCase<2> c;
  c.name = "plate";
  c.map = GeometryMap<2>::identity_box(Vec<2>::Zero(), Vec<2>::Constant(pp.L));
  c.boundary = TrimmingBoundary<2>::circle(Vec<2>::Zero(), pp.R, KeepSide::Positive);
  c.extent = pp.L;
  c.exact_measure = pp.L * pp.L - 0.25 * pi * pp.R * pp.R;
  c.exact_boundary_measure = 0.5 * pi * pp.R;
  c.exact_u = [pp](const Vec<2>& x) {
    Field f(2);
    f = kirsch_displacement(pp, x);
    return f;
  };
  c.exact_grad = [pp](const Vec<2>& x) {
    FieldGrad g(2, 2);
    g = kirsch_displacement_gradient(pp, x);
    return g;
  };
  c.problem.pde = Pde::Elasticity;
  c.problem.E = pp.E;
  c.problem.nu = pp.nu;
  c.problem.neumann = [pp](const Vec<2>& x, const Vec<2>& n, BoundaryPart part) {
    Field f = Field::Zero(2);
    if (part == BoundaryPart::Trimmed) return f;  // traction-free hole
    const Eigen::Vector3d s = kirsch_stress(pp, x);
    f[0] = s[0] * n[0] + s[2] * n[1];
    f[1] = s[2] * n[0] + s[1] * n[1];
    return f;
  };
  c.problem.dirichlet.push_back({0, 0, 0, [pp](const Vec<2>& x) { return kirsch_displacement(pp, x)[0]; }});
  c.problem.dirichlet.push_back({1, 0, 1, [pp](const Vec<2>& x) { return kirsch_displacement(pp, x)[1]; }});
  return c;
}

// u = x rho sin^2(pi r / R), rho = sqrt(x^2 + y^2), on the unit cube inside the sphere of radius R
inline ManufacturedCase<3> case_poisson_3d(double R = 1.0) {
  ManufacturedCase<3> c;
  c.name = "poisson3d";
  c.map = GeometryMap<3>::identity_box(Vec<3>::Zero(), Vec<3>::Ones());
  c.boundary = TrimmingBoundary<3>::sphere(Vec<3>::Zero(), R, KeepSide::Negative);
  c.extent = 1.0;
  c.exact_measure = pi * R * R * R / 6.0;
  c.exact_boundary_measure = 0.5 * pi * R * R;
  c.mean_constraint = true;
  const double k = pi / R;
  c.exact_u = [k](const Vec<3>& x) {
    const double rho = std::hypot(x[0], x[1]), s = std::sin(k * x.norm());
    Field f(1);
    f[0] = x[0] * rho * s * s;
    return f;
  };
  c.exact_grad = [k](const Vec<3>& x) {
    const double rho = std::hypot(x[0], x[1]), r = x.norm();
    const double s = std::sin(k * r), s2 = s * s;
    const double ds = r > 0.0 ? k * std::sin(2 * k * r) / r : 0.0;  // s2'(r) / r
    FieldGrad g(1, 3);
    const double xr = x[0] * rho;
    g(0, 0) = (rho > 0.0 ? rho + x[0] * x[0] / rho : 0.0) * s2 + xr * ds * x[0];
    g(0, 1) = (rho > 0.0 ? x[0] * x[1] / rho : 0.0) * s2 + xr * ds * x[1];
    g(0, 2) = xr * ds * x[2];
    return g;
  };
  c.problem.pde = Pde::Poisson;
  c.problem.source = [k](const Vec<3>& x) {
    const double rho = std::hypot(x[0], x[1]), r = x.norm();
    const double s = std::sin(k * r), s2 = s * s;
    const double d1 = k * std::sin(2 * k * r), d2 = 2 * k * k * std::cos(2 * k * r);
    Field f(1);
    f[0] = (rho > 0.0 ? 3.0 * x[0] / rho * s2 : 0.0) + (r > 0.0 ? 6.0 * x[0] * rho * d1 / r : 0.0) + x[0] * rho * d2;
    return f;
  };
  const auto grad = c.exact_grad;
  c.problem.neumann = [grad](const Vec<3>& x, const Vec<3>& n, BoundaryPart part) {
    Field f(1);
    f[0] = part == BoundaryPart::Trimmed ? 0.0 : (grad(x).row(0) * n)(0);
    return f;
  };
  const auto u = c.exact_u;
  c.problem.mean_field = [u](const Vec<3>& x) { return u(x)[0]; };
  return c;
}

struct ErrorNorms {
  double l2 = 0.0, h1 = 0.0, h1_cut = 0.0, h1_int = 0.0;
  double l2_cut = 0.0, l2_int = 0.0;
};

template <int Dim>
struct DiscreteField {
  const Discretization<Dim>* d;
  Eigen::VectorXd coef;  // full active layout, function-major
  int components;

  void eval(const MultiIndex<Dim>& e, const Vec<Dim>& x, BasisValues<Dim>& bv, Field& u, FieldGrad& g) const {
    d->space.eval(e, x, bv);
    const Mat<Dim> Jit = d->map.jacobian(x).J.inverse().transpose();
    u = Field::Zero(components);
    g = FieldGrad::Zero(components, Dim);
    for (size_t a = 0; a < bv.values.size(); ++a) {
      const int ia = d->active_of[bv.indices[a]];
      const Vec<Dim> ga = Jit * bv.gradients[a];
      for (int c = 0; c < components; ++c) {
        const double v = coef[ia * components + c];
        u[c] += v * bv.values[a];
        g.row(c) += v * ga.transpose();
      }
    }
  }
};

template <int Dim>
ErrorNorms error_norms(const Discretization<Dim>& d, const Eigen::VectorXd& coef, const ManufacturedCase<Dim>& mc,
                       int quad_boost = 0) {
  const RuleSet<Dim> rules(d.degree() + 1 + quad_boost);
  const DiscreteField<Dim> uh{&d, coef, mc.problem.components()};
  double l2[2] = {0, 0}, semi[2] = {0, 0};
  QuadratureRule<Dim> rule;
  BasisValues<Dim> bv;
  Field u;
  FieldGrad g;
  for (int e = 0; e < d.mesh.num_elements(); ++e) {
    const Label lab = d.classification.labels[e];
    if (lab == Label::Exterior) continue;
    const int fam = lab == Label::Cut ? 1 : 0;
    element_rule(d, e, rules.gauss, rules.triangle, rule);
    const MultiIndex<Dim> mi = d.mesh.multi_index(e);
    for (size_t q = 0; q < rule.size(); ++q) {
      uh.eval(mi, rule.points[q], bv, u, g);
      const Vec<Dim> X = d.map.point(rule.points[q]);
      l2[fam] += rule.weights[q] * (u - mc.exact_u(X)).squaredNorm();
      semi[fam] += rule.weights[q] * (g - mc.exact_grad(X)).squaredNorm();
    }
  }
  ErrorNorms n;
  n.l2_int = std::sqrt(l2[0]);
  n.l2_cut = std::sqrt(l2[1]);
  n.l2 = std::sqrt(l2[0] + l2[1]);
  n.h1_int = std::sqrt(l2[0] + semi[0]);
  n.h1_cut = std::sqrt(l2[1] + semi[1]);
  n.h1 = std::sqrt(l2[0] + l2[1] + semi[0] + semi[1]);
  return n;
}

struct GeometricMeasures {
  double domain = 0.0;    // area or volume of the discrete domain
  double boundary = 0.0;  // measure of the discrete trimming boundary
};

template <int Dim>
GeometricMeasures geometric_measures(const Discretization<Dim>& d, int quad_boost = 0) {
  const int n = d.degree() + 1 + quad_boost;
  const RuleSet<Dim> rules(n);
  GeometricMeasures m;
  QuadratureRule<Dim> rule;
  for (int e = 0; e < d.mesh.num_elements(); ++e) {
    element_rule(d, e, rules.gauss, rules.triangle, rule);
    for (double w : rule.weights) m.domain += w;
  }
  for (const auto& rp : d.reparams)
    for (const auto& sf : boundary_faces(rp)) {
      const BoundaryRule<Dim> br = boundary_rule(sf, n, d.map);
      for (double w : br.weights) m.boundary += w;
    }
  return m;
}

struct MeasureEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

// stratified Monte Carlo of the physical measure of the kept region of a parametric box;
// two samples per stratum give the variance estimate
template <int Dim>
MeasureEstimate oracle_measure(const TrimmingBoundary<Dim>& boundary, const GeometryMap<Dim>& map, const Box<Dim>& box,
                               long long samples, std::uint64_t seed = 1) {
  if (samples < 10000) throw DomainError("oracle: at least 1e4 samples required");
  const int per = std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(samples / 2), 1.0 / Dim))));
  MultiIndex<Dim> counts;
  counts.fill(per);
  const long long strata = static_cast<long long>(product<Dim>(counts));
  const double cell = box.measure() / static_cast<double>(strata);
  const ParamLevel<Dim> level(map, boundary);
  double sum = 0.0, var = 0.0;
  std::uint64_t state = splitmix64(seed);
  auto uniform = [&state]() {
    state = splitmix64(state);
    return 0.5 * (hash_unit(state) + 1.0);
  };
  Vec<Dim> step = box.size() / per;
  for (long long s = 0; s < strata; ++s) {
    const MultiIndex<Dim> si = unflatten<Dim>(static_cast<int>(s), counts);
    double f[2];
    for (int k = 0; k < 2; ++k) {
      Vec<Dim> x;
      for (int dd = 0; dd < Dim; ++dd) x[dd] = box.lo[dd] + (si[dd] + uniform()) * step[dd];
      const bool inside = boundary.trivial() || level(x) < 0.0;
      f[k] = inside ? map.jacobian(x).det : 0.0;
    }
    sum += cell * 0.5 * (f[0] + f[1]);
    var += cell * cell * 0.25 * (f[0] - f[1]) * (f[0] - f[1]);
  }
  return {sum, std::sqrt(var)};
}

// least-squares slope of log(err) over log(h) on the finest `points` entries with err above the floor
inline double fit_slope(const std::vector<double>& h, const std::vector<double>& err, double floor = 0.0, int points = 3) {
  std::vector<std::pair<double, double>> pts;
  for (size_t i = 0; i < h.size(); ++i)
    if (std::isfinite(err[i]) && err[i] > 0.0 && h[i] > 0.0 && !(floor > 0.0 && err[i] <= 10.0 * floor))
      pts.push_back({h[i], err[i]});
  std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.first > b.first; });
  if (static_cast<int>(pts.size()) > points) pts.erase(pts.begin(), pts.end() - points);
  if (pts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(pts.size());
  for (auto& [hh, e] : pts) {
    const double x = std::log(hh), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct RunOptions {
  int quad_boost = 0;
  int threads = 1;
  std::uint64_t seed = 0;
  bool conditioning = false;
  bool timing = true;
  double tol = 1e-12;
};

struct RunRow {
  std::string case_name;
  int p = 0, r = 0, ht = 1, n = 0;
  double h = 0.0;
  double l2 = NAN, h1 = NAN, h1_cut = NAN, h1_int = NAN;
  double area_err = NAN, bnd_err = NAN;
  double cond_raw = NAN, cond_scaled = NAN;
  int iters = 0;
  double secs = 0.0;
  bool converged = false;
  std::string failure;  // empty on success
  int dofs = 0;
  double area = NAN, boundary = NAN;
};

template <int Dim>
struct RunArtifacts {
  Discretization<Dim> disc;
  LinearSystem system;
  SolveReport solve;
  Eigen::VectorXd coef;  // full active layout
};

template <int Dim>
RunRow run_case(const ManufacturedCase<Dim>& mc, int p, int r, int ht, int n, const RunOptions& opt,
                RunArtifacts<Dim>* keep = nullptr) {
  RunRow row;
  row.case_name = mc.name;
  row.p = p;
  row.r = r;
  row.ht = ht;
  row.n = n;
  row.h = mc.extent / n;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (p < 1 || p > 6) throw DomainError("run: p must lie in [1, 6]");
    if (r < 1 || r > p) throw DomainError("run: r must lie in [1, p]");
    ReparamOptions ro;
    ro.degree = r;
    ro.ht_divisions = ht;
    ro.geo_precision = mc.geo_precision;
    ro.seed = opt.seed;
    RunArtifacts<Dim> art;
    art.disc = discretize<Dim>(TensorBSplineSpace<Dim>::uniform(p, n), mc.map, mc.boundary, ro, opt.threads);
    const auto& d = art.disc;
    LinearSystem sys = assemble(d, mc.problem, opt.quad_boost, opt.threads);
    if (mc.mean_constraint) {
      auto [c, target] = mean_constraint_row(d, opt.quad_boost, mc.problem.mean_field);
      sys = apply_mean_constraint(std::move(sys), c, target);
    }
    sys = apply_dirichlet(std::move(sys), d, mc.problem);
    row.dofs = static_cast<int>(sys.A.rows());

    const Eigen::VectorXd D = diagonal_scaling(sys.A);
    PcgOptions po;
    po.tol = opt.tol;
    std::optional<Constraint> con;
    if (sys.constraint) con = Constraint{*sys.constraint, sys.target};
    SolveReport rep = pcg(sys.A, sys.b, D, po, con);
    if (opt.conditioning) {
      rep.condition_raw = condition_number(sys.A, ConditionMode::Raw, sys.constraint).value;
      rep.condition_scaled = condition_number(sys.A, ConditionMode::Scaled, sys.constraint).value;
    }
    art.coef = sys.expand(rep.x);
    const ErrorNorms en = error_norms(d, art.coef, mc, opt.quad_boost);
    const GeometricMeasures gm = geometric_measures(d, opt.quad_boost);
    row.l2 = en.l2;
    row.h1 = en.h1;
    row.h1_cut = en.h1_cut;
    row.h1_int = en.h1_int;
    row.area = gm.domain;
    row.boundary = gm.boundary;
    row.area_err = std::abs(gm.domain - mc.exact_measure);
    row.bnd_err = std::abs(gm.boundary - mc.exact_boundary_measure);
    row.cond_raw = rep.condition_raw;
    row.cond_scaled = rep.condition_scaled;
    row.iters = rep.iterations;
    row.converged = rep.converged;
    if (keep) {
      art.system = std::move(sys);
      art.solve = std::move(rep);
      *keep = std::move(art);
    }
  } catch (const std::exception& ex) {
    row.failure = ex.what();
  }
  if (opt.timing) row.secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

struct SlopeSet {
  double l2 = NAN, h1 = NAN, h1_cut = NAN, h1_int = NAN, area_err = NAN, bnd_err = NAN, cond_raw = NAN,
         cond_scaled = NAN, iters = NAN;
};

struct ConvergenceRecord {
  std::vector<RunRow> rows;
  std::map<std::tuple<std::string, int, int, int>, SlopeSet> slopes;  // (case, p, r, ht)
};

inline SlopeSet fit_rows(const std::vector<const RunRow*>& rows, double floor) {
  std::vector<double> h;
  for (auto* r : rows) h.push_back(r->h);
  auto col = [&](double RunRow::*m) {
    std::vector<double> v;
    for (auto* r : rows) v.push_back(r->failure.empty() ? r->*m : NAN);
    return v;
  };
  std::vector<double> it;
  for (auto* r : rows) it.push_back(r->failure.empty() && r->iters > 0 ? r->iters : NAN);
  SlopeSet s;
  s.l2 = fit_slope(h, col(&RunRow::l2), floor);
  s.h1 = fit_slope(h, col(&RunRow::h1), floor);
  s.h1_cut = fit_slope(h, col(&RunRow::h1_cut), floor);
  s.h1_int = fit_slope(h, col(&RunRow::h1_int), floor);
  s.area_err = fit_slope(h, col(&RunRow::area_err), floor);
  s.bnd_err = fit_slope(h, col(&RunRow::bnd_err), floor);
  s.cond_raw = fit_slope(h, col(&RunRow::cond_raw));
  s.cond_scaled = fit_slope(h, col(&RunRow::cond_scaled));
  s.iters = fit_slope(h, it);
  return s;
}

inline void fit_record(ConvergenceRecord& rec, double floor) {
  std::map<std::tuple<std::string, int, int, int>, std::vector<const RunRow*>> groups;
  for (const auto& r : rec.rows) groups[{r.case_name, r.p, r.r, r.ht}].push_back(&r);
  rec.slopes.clear();
  for (auto& [key, rows] : groups) rec.slopes[key] = fit_rows(rows, floor);
}

template <int Dim>
ConvergenceRecord convergence_study(const ManufacturedCase<Dim>& mc, const std::vector<int>& degrees,
                                    const std::vector<int>& r_choices, const std::vector<int>& ht_choices,
                                    const std::vector<int>& meshes, const RunOptions& opt) {
  ConvergenceRecord rec;
  for (int p : degrees)
    for (int r : r_choices) {
      const int rr = r <= 0 ? p : r;  // 0 selects r = p
      if (rr > p) continue;
      for (int ht : ht_choices)
        for (int n : meshes) rec.rows.push_back(run_case(mc, p, rr, ht, n, opt));
    }
  fit_record(rec, mc.geo_precision);
  return rec;
}

}  // namespace tiga
