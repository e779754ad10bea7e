#pragma once

#include "geometry.hpp"
#include "lagrange.hpp"

#include <vector>

namespace tiga {

template <int Dim>
struct QuadratureRule {
  std::vector<Vec<Dim>> points;
  std::vector<double> weights;

  size_t size() const { return weights.size(); }
};

// Gauss-Legendre nodes and weights on [0,1]
inline void gauss_legendre_1d(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1 || n > 30) throw DomainError("gauss_legendre: n must lie in [1, 30]");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double wi = 1.0 / ((1.0 - z * z) * dp * dp);
    x[i] = 0.5 * (1.0 - z);
    x[n - 1 - i] = 0.5 * (1.0 + z);
    w[i] = w[n - 1 - i] = wi;
  }
  if (n % 2 == 1) x[n / 2] = 0.5;
}

template <int Dim>
QuadratureRule<Dim> gauss_legendre(int n) {
  std::vector<double> x, w;
  gauss_legendre_1d(n, x, w);
  QuadratureRule<Dim> rule;
  int total = 1;
  for (int d = 0; d < Dim; ++d) total *= n;
  rule.points.reserve(total);
  rule.weights.reserve(total);
  for (int k = 0; k < total; ++k) {
    Vec<Dim> p;
    double wt = 1.0;
    int r = k;
    for (int d = 0; d < Dim; ++d) {
      p[d] = x[r % n];
      wt *= w[r % n];
      r /= n;
    }
    rule.points.push_back(p);
    rule.weights.push_back(wt);
  }
  return rule;
}

// Duffy collapse of the unit square onto {u, v >= 0, u + v <= 1}
inline QuadratureRule<2> collapsed_triangle(int n) {
  std::vector<double> x, w;
  gauss_legendre_1d(n, x, w);
  QuadratureRule<2> rule;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double xi = x[i], eta = x[j];
      rule.points.push_back(Vec<2>(xi * (1.0 - eta), xi * eta));
      rule.weights.push_back(w[i] * w[j] * xi);
    }
  return rule;
}

template <int Dim>
QuadratureRule<Dim> reference_rule(TileKind kind, int n) {
  if constexpr (Dim == 2) {
    if (kind == TileKind::Triangle) return collapsed_triangle(n);
  }
  return gauss_legendre<Dim>(n);
}

template <int Dim>
QuadratureRule<Dim> map_through_tile(const Tile<Dim>& tile, const QuadratureRule<Dim>& rule) {
  QuadratureRule<Dim> out;
  out.points.reserve(rule.size());
  out.weights.reserve(rule.size());
  for (size_t q = 0; q < rule.size(); ++q) {
    const TilePoint<Dim> tp = eval_tile(tile, rule.points[q]);
    const double det = tp.J.determinant();
    if (!(det > 0.0)) throw ReparamError("tile map: nonpositive Jacobian at a quadrature point");
    out.points.push_back(tp.x);
    out.weights.push_back(rule.weights[q] * det);
  }
  return out;
}

template <int Dim>
QuadratureRule<Dim> tile_rule(const Tile<Dim>& tile, int n) {
  return map_through_tile(tile, reference_rule<Dim>(tile.kind, n));
}

template <int Dim>
struct BoundaryRule {
  std::vector<Vec<Dim>> points;  // parametric
  std::vector<double> weights;   // physical surface measure
  std::vector<Vec<Dim>> normals; // physical unit outward normals

  size_t size() const { return weights.size(); }
};

// physical normal scaled by the surface measure element, from parametric tangents
template <int Dim>
Vec<Dim> area_normal(const Mat<Dim>& J, const Eigen::Matrix<double, Dim, Dim - 1>& T) {
  const Eigen::Matrix<double, Dim, Dim - 1> P = J * T;
  if constexpr (Dim == 2) {
    return Vec<2>(P(1, 0), -P(0, 0));
  } else {
    return Vec<3>(P.col(0).cross(P.col(1)));
  }
}

template <int Dim>
BoundaryRule<Dim> boundary_rule(const SurfaceTile<Dim>& face, int n, const GeometryMap<Dim>& map) {
  const QuadratureRule<Dim - 1> ref = gauss_legendre<Dim - 1>(n);
  BoundaryRule<Dim> out;
  for (size_t q = 0; q < ref.size(); ++q) {
    const SurfacePoint<Dim> sp = eval_surface(face, ref.points[q]);
    const Vec<Dim> an = area_normal<Dim>(map.jacobian(sp.x).J, sp.T);
    const double m = an.norm();
    if (!(m > 0.0)) throw ReparamError("boundary rule: degenerate surface tangent");
    out.points.push_back(sp.x);
    out.weights.push_back(ref.weights[q] * m);
    out.normals.push_back(an / m);
  }
  return out;
}

}  // namespace tiga
