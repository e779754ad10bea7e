#pragma once

#include "core.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>

namespace tiga {

using SparseMatrix = Eigen::SparseMatrix<double>;

// D = diag(1 / sqrt(A_ii))
inline Eigen::VectorXd diagonal_scaling(const SparseMatrix& A) {
  const Eigen::VectorXd diag = A.diagonal();
  Eigen::VectorXd D(diag.size());
  for (int i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > 0.0))
      throw SolverError("diagonal scaling: nonpositive diagonal entry " + std::to_string(diag[i]) +
                        " at active function " + std::to_string(i));
    D[i] = 1.0 / std::sqrt(diag[i]);
  }
  return D;
}

inline SparseMatrix scale_symmetric(const SparseMatrix& A, const Eigen::VectorXd& D) {
  return D.asDiagonal() * A * D.asDiagonal();
}

struct Constraint {
  Eigen::VectorXd c;
  double target = 0.0;
};

struct SolveReport {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual = 0.0;  // relative, in the unscaled variables
  bool converged = false;
  double condition_raw = std::numeric_limits<double>::quiet_NaN();
  double condition_scaled = std::numeric_limits<double>::quiet_NaN();
};

struct PcgOptions {
  double tol = 1e-12;
  int maxit = -1;  // negative: 10 n
  int restarts = 3;
  std::function<void(int, const Eigen::VectorXd&)> monitor;  // iteration, current x
};

// conjugate gradients on D A D y = D b, x = D y; with a constraint c.x = target the
// iteration runs in the affine space of admissible x (multiplier eliminated by projection)
inline SolveReport pcg(const SparseMatrix& A, const Eigen::VectorXd& b, const Eigen::VectorXd& D,
                       const PcgOptions& opt = {}, const std::optional<Constraint>& constraint = std::nullopt) {
  const int n = static_cast<int>(b.size());
  if (A.rows() != n || A.cols() != n || D.size() != n) throw SolverError("pcg: dimension mismatch");
  const int maxit = opt.maxit >= 0 ? opt.maxit : 10 * n;
  const SparseMatrix S = scale_symmetric(A, D);
  const Eigen::VectorXd bs = D.cwiseProduct(b);
  const Eigen::VectorXd Dinv = D.cwiseInverse();

  Eigen::VectorXd ct;
  double ct2 = 0.0;
  if (constraint) {
    if (constraint->c.size() != n) throw SolverError("pcg: constraint size mismatch");
    ct = D.cwiseProduct(constraint->c);
    ct2 = ct.squaredNorm();
    if (!(ct2 > 0.0)) throw SolverError("pcg: zero constraint row");
  }
  auto project = [&](Eigen::VectorXd& v) {
    if (constraint) v -= (ct.dot(v) / ct2) * ct;
  };

  SolveReport rep;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  if (constraint) y = (constraint->target / ct2) * ct;
  const double bnorm = b.norm();
  if (bnorm == 0.0 && !constraint) {
    rep.x = Eigen::VectorXd::Zero(n);
    rep.converged = true;
    return rep;
  }
  const double ref = bnorm > 0.0 ? bnorm : 1.0;
  auto true_residual = [&](const Eigen::VectorXd& yy) {
    Eigen::VectorXd r = bs - S * yy;
    project(r);
    return r;
  };

  int it = 0;
  for (int attempt = 0; attempt <= opt.restarts; ++attempt) {
    Eigen::VectorXd r = true_residual(y);
    double res = Dinv.cwiseProduct(r).norm() / ref;
    rep.residual = res;
    if (res <= opt.tol) {
      rep.converged = true;
      break;
    }
    Eigen::VectorXd p = r, q(n);
    double rr = r.squaredNorm();
    while (it < maxit) {
      q.noalias() = S * p;
      project(q);
      const double pq = p.dot(q);
      if (!(pq > 0.0)) break;
      const double alpha = rr / pq;
      y += alpha * p;
      r -= alpha * q;
      ++it;
      if (opt.monitor) opt.monitor(it, D.cwiseProduct(y));
      res = Dinv.cwiseProduct(r).norm() / ref;
      if (res <= opt.tol) break;
      const double rr_new = r.squaredNorm();
      p = r + (rr_new / rr) * p;
      rr = rr_new;
    }
    rep.residual = Dinv.cwiseProduct(true_residual(y)).norm() / ref;
    rep.converged = rep.residual <= opt.tol;
    if (rep.converged || it >= maxit) break;
  }
  rep.iterations = it;
  rep.x = D.cwiseProduct(y);
  return rep;
}

struct ConditionEstimate {
  double value = std::numeric_limits<double>::infinity();
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool singular = false;
  bool used_lanczos = false;
  std::string diagnostic;
};

struct ConditionOptions {
  int dense_limit = 2000;
  int lanczos_steps = 300;
  double lanczos_tol = 1e-10;
  std::uint64_t seed = 1;
};

namespace detail {

// largest eigenvalue of a symmetric operator by Lanczos with full reorthogonalization
template <class Op, class Proj>
double lanczos_largest(const Op& op, const Proj& project, int n, const ConditionOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  project(v);
  v.normalize();
  const int m = std::min(opt.lanczos_steps, n);
  Eigen::MatrixXd V(n, m);
  std::vector<double> alpha, beta;
  double prev = 0.0, theta = 0.0;
  for (int j = 0; j < m; ++j) {
    V.col(j) = v;
    Eigen::VectorXd w = op(v);
    project(w);
    const double a = v.dot(w);
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    const double bnext = w.norm();
    const int k = j + 1;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    theta = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    if (j > 4 && std::abs(theta - prev) <= opt.lanczos_tol * std::abs(theta)) break;
    prev = theta;
    if (bnext <= 1e-14 * std::abs(theta)) break;
    beta.push_back(bnext);
    v = w / bnext;
  }
  return theta;
}

inline ConditionEstimate finish_estimate(double lmin, double lmax) {
  ConditionEstimate est;
  est.lambda_min = lmin;
  est.lambda_max = lmax;
  if (!(lmax > 0.0) || !(lmin > 0.0) || !std::isfinite(lmax)) {
    est.singular = true;
    est.value = std::numeric_limits<double>::infinity();
    est.diagnostic = "numerically singular: lambda_min = " + std::to_string(lmin) + ", lambda_max = " + std::to_string(lmax);
    return est;
  }
  est.value = lmax / lmin;
  return est;
}

}  // namespace detail

// lambda_max / lambda_min on the orthogonal complement of the constraint row (if any).
// lambda_min comes from the largest eigenvalue of the restricted inverse, factorized after
// symmetric diagonal equilibration so that small-cut scaling does not pollute it
inline ConditionEstimate condition_number(const SparseMatrix& A, const std::optional<Eigen::VectorXd>& constraint = std::nullopt,
                                          const ConditionOptions& opt = {}) {
  const int n = static_cast<int>(A.rows());
  if (n == 0) throw SolverError("condition number: empty matrix");
  if (constraint && n < 2) throw SolverError("condition number: no unconstrained directions");
  Eigen::VectorXd D;
  try {
    D = diagonal_scaling(A);
  } catch (const SolverError& e) {
    ConditionEstimate est;
    est.singular = true;
    est.diagnostic = e.what();
    return est;
  }
  const SparseMatrix S = scale_symmetric(A, D);
  Eigen::VectorXd c, cs;
  double c2 = 0.0;
  if (constraint) {
    c = *constraint;
    c2 = c.squaredNorm();
    cs = D.cwiseProduct(c);
  }
  auto project = [&](Eigen::VectorXd& v) {
    if (constraint) v -= (c.dot(v) / c2) * c;
  };

  if (n <= opt.dense_limit) {
    Eigen::MatrixXd M = Eigen::MatrixXd(A);
    Eigen::MatrixXd Sinv;
    if (constraint) {
      const Eigen::VectorXd u = c / std::sqrt(c2);
      const Eigen::VectorXd Mu = M * u;
      M = M - u * Mu.transpose() - Mu * u.transpose() + (u.dot(Mu)) * u * u.transpose();
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + 1, n + 1);
      K.topLeftCorner(n, n) = Eigen::MatrixXd(S);
      K.col(n).head(n) = cs;
      K.row(n).head(n) = cs.transpose();
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
      Sinv = lu.inverse().topLeftCorner(n, n);
    } else {
      Eigen::LDLT<Eigen::MatrixXd> ldlt{Eigen::MatrixXd(S)};
      if (ldlt.info() != Eigen::Success) return detail::finish_estimate(0.0, 1.0);
      Sinv = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
    }
    Eigen::MatrixXd B = D.asDiagonal() * Sinv * D.asDiagonal();
    B = 0.5 * (B + B.transpose()).eval();
    if (constraint) {
      const Eigen::VectorXd u = c / std::sqrt(c2);
      const Eigen::VectorXd Bu = B * u;
      B = B - u * Bu.transpose() - Bu * u.transpose() + (u.dot(Bu)) * u * u.transpose();
    }
    const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    const double inv = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(B, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    if (!std::isfinite(inv)) return detail::finish_estimate(0.0, lmax);
    return detail::finish_estimate(inv > 0.0 ? 1.0 / inv : 0.0, lmax);
  }

  const double lmax = detail::lanczos_largest([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(A * v); }, project, n, opt);
  double inv_max = 0.0;
  if (!constraint) {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(S);
    if (ldlt.info() != Eigen::Success) return detail::finish_estimate(0.0, lmax);
    inv_max = detail::lanczos_largest(
        [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(D.cwiseProduct(ldlt.solve(D.cwiseProduct(v)))); }, project,
        n, opt);
  } else {
    // [S cs; cs^T 0] [y; l] = [D v; 0] gives x = D y = (P A P)^+ v on the complement
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < S.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(S, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < n; ++i)
      if (cs[i] != 0.0) {
        trip.emplace_back(i, n, cs[i]);
        trip.emplace_back(n, i, cs[i]);
      }
    SparseMatrix K(n + 1, n + 1);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success) return detail::finish_estimate(0.0, lmax);
    inv_max = detail::lanczos_largest(
        [&](const Eigen::VectorXd& v) {
          Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
          rhs.head(n) = D.cwiseProduct(v);
          return Eigen::VectorXd(D.cwiseProduct(lu.solve(rhs).head(n)));
        },
        project, n, opt);
  }
  ConditionEstimate est = detail::finish_estimate(inv_max > 0.0 ? 1.0 / inv_max : 0.0, lmax);
  est.used_lanczos = true;
  return est;
}

enum class ConditionMode { Raw, Scaled };

inline ConditionEstimate condition_number(const SparseMatrix& A, ConditionMode mode,
                                          const std::optional<Eigen::VectorXd>& constraint = std::nullopt,
                                          const ConditionOptions& opt = {}) {
  if (mode == ConditionMode::Raw) return condition_number(A, constraint, opt);
  const Eigen::VectorXd D = diagonal_scaling(A);
  std::optional<Eigen::VectorXd> ct;
  if (constraint) ct = Eigen::VectorXd(D.cwiseProduct(*constraint));
  return condition_number(scale_symmetric(A, D), ct, opt);
}

}  // namespace tiga
