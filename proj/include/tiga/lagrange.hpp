#pragma once

#include "core.hpp"

#include <algorithm>
#include <vector>

namespace tiga {

// equidistant Lagrange basis of degree r on [0,1]
inline void lagrange_1d(int r, double x, double* v, double* dv) {
  if (r == 0) {
    v[0] = 1.0;
    dv[0] = 0.0;
    return;
  }
  double diff[8];
  for (int m = 0; m <= r; ++m) diff[m] = x - static_cast<double>(m) / r;
  for (int j = 0; j <= r; ++j) {
    const double xj = static_cast<double>(j) / r;
    double denom = 1.0, prod = 1.0, dprod = 0.0;
    for (int m = 0; m <= r; ++m) {
      if (m == j) continue;
      denom *= xj - static_cast<double>(m) / r;
      dprod = dprod * diff[m] + prod;
      prod *= diff[m];
    }
    v[j] = prod / denom;
    dv[j] = dprod / denom;
  }
}

// Silvester factor: 1 at lambda = a/r, 0 at lambda = m/r for m < a
inline void silvester(int r, int a, double lambda, double& v, double& dv) {
  v = 1.0;
  dv = 0.0;
  for (int m = 0; m < a; ++m) {
    const double f = (r * lambda - m) / (a - m);
    dv = dv * f + v * r / (a - m);
    v *= f;
  }
}

// lattice of the degree-r triangle: (i, j) with i + j <= r, j outer
inline std::vector<std::array<int, 2>> triangle_lattice(int r) {
  std::vector<std::array<int, 2>> out;
  for (int j = 0; j <= r; ++j)
    for (int i = 0; i <= r - j; ++i) out.push_back({i, j});
  return out;
}

inline int triangle_node(int r, int i, int j) {
  // nodes before row j: sum_{q<j} (r + 1 - q)
  return j * (r + 1) - j * (j - 1) / 2 + i;
}

inline void lagrange_triangle(int r, double u, double v, double* val, double* du, double* dv) {
  const double w = 1.0 - u - v;
  int n = 0;
  for (int j = 0; j <= r; ++j) {
    for (int i = 0; i <= r - j; ++i, ++n) {
      const int k = r - i - j;
      double pu, dpu, pv, dpv, pw, dpw;
      silvester(r, i, u, pu, dpu);
      silvester(r, j, v, pv, dpv);
      silvester(r, k, w, pw, dpw);
      val[n] = pu * pv * pw;
      du[n] = dpu * pv * pw - pu * pv * dpw;
      dv[n] = pu * dpv * pw - pu * pv * dpw;
    }
  }
}

enum class TileKind { Quad, Triangle, Hex };

template <int Dim>
struct Tile {
  struct Face {
    int id;
    bool reversed;
  };

  TileKind kind;
  int degree;
  std::vector<Vec<Dim>> nodes;
  std::vector<Face> boundary_faces;
};

template <int Dim>
struct TilePoint {
  Vec<Dim> x;
  Mat<Dim> J;
};

template <int Dim>
TilePoint<Dim> eval_tile(const Tile<Dim>& tile, const Vec<Dim>& ref) {
  const int r = tile.degree;
  TilePoint<Dim> out;
  out.x.setZero();
  out.J.setZero();
  if (tile.kind == TileKind::Triangle) {
    if constexpr (Dim == 2) {
      double v[64], du[64], dv[64];
      lagrange_triangle(r, ref[0], ref[1], v, du, dv);
      for (size_t n = 0; n < tile.nodes.size(); ++n) {
        out.x += v[n] * tile.nodes[n];
        out.J.col(0) += du[n] * tile.nodes[n];
        out.J.col(1) += dv[n] * tile.nodes[n];
      }
    }
    return out;
  }
  double v[Dim][8], d[Dim][8];
  for (int a = 0; a < Dim; ++a) lagrange_1d(r, ref[a], v[a], d[a]);
  const int m = r + 1;
  int n = 0;
  if constexpr (Dim == 2) {
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i, ++n) {
        out.x += v[0][i] * v[1][j] * tile.nodes[n];
        out.J.col(0) += d[0][i] * v[1][j] * tile.nodes[n];
        out.J.col(1) += v[0][i] * d[1][j] * tile.nodes[n];
      }
  } else {
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i, ++n) {
          const Vec<Dim>& p = tile.nodes[n];
          out.x += v[0][i] * v[1][j] * v[2][k] * p;
          out.J.col(0) += d[0][i] * v[1][j] * v[2][k] * p;
          out.J.col(1) += v[0][i] * d[1][j] * v[2][k] * p;
          out.J.col(2) += v[0][i] * v[1][j] * d[2][k] * p;
        }
  }
  return out;
}

// curve (Dim = 2) or surface (Dim = 3) Lagrange patch in parametric coordinates;
// node order makes (T_y, -T_x), resp. X_u x X_v, the outward normal
template <int Dim>
struct SurfaceTile {
  int degree = 1;
  int element = -1;
  std::vector<Vec<Dim>> nodes;
};

template <int Dim>
struct SurfacePoint {
  Vec<Dim> x;
  Eigen::Matrix<double, Dim, Dim - 1> T;
};

template <int Dim>
SurfacePoint<Dim> eval_surface(const SurfaceTile<Dim>& s, const Eigen::Matrix<double, Dim - 1, 1>& ref) {
  const int r = s.degree, m = r + 1;
  SurfacePoint<Dim> out;
  out.x.setZero();
  out.T.setZero();
  double v[2][8], d[2][8];
  for (int a = 0; a < Dim - 1; ++a) lagrange_1d(r, ref[a], v[a], d[a]);
  if constexpr (Dim == 2) {
    for (int i = 0; i < m; ++i) {
      out.x += v[0][i] * s.nodes[i];
      out.T.col(0) += d[0][i] * s.nodes[i];
    }
  } else {
    int n = 0;
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i, ++n) {
        out.x += v[0][i] * v[1][j] * s.nodes[n];
        out.T.col(0) += d[0][i] * v[1][j] * s.nodes[n];
        out.T.col(1) += v[0][i] * d[1][j] * s.nodes[n];
      }
  }
  return out;
}

// nodes of a reference face in canonical order
template <int Dim>
std::vector<Vec<Dim>> face_nodes(const Tile<Dim>& tile, int face) {
  const int r = tile.degree, m = r + 1;
  std::vector<Vec<Dim>> out;
  if constexpr (Dim == 2) {
    if (tile.kind == TileKind::Quad) {
      for (int q = 0; q < m; ++q) {
        int i = 0, j = 0;
        switch (face) {
          case 0: i = q; j = 0; break;
          case 1: i = r; j = q; break;
          case 2: i = q; j = r; break;
          default: i = 0; j = q; break;
        }
        out.push_back(tile.nodes[i + m * j]);
      }
    } else {
      for (int q = 0; q < m; ++q) {
        int i = 0, j = 0;
        switch (face) {
          case 0: i = q; j = 0; break;
          case 1: i = r - q; j = q; break;
          default: i = 0; j = q; break;
        }
        out.push_back(tile.nodes[triangle_node(r, i, j)]);
      }
    }
  } else {
    for (int b = 0; b < m; ++b)
      for (int a = 0; a < m; ++a) {
        int i = 0, j = 0, k = 0;
        switch (face) {
          case 0: i = a; j = b; k = 0; break;
          case 1: i = a; j = b; k = r; break;
          case 2: i = a; j = 0; k = b; break;
          case 3: i = a; j = r; k = b; break;
          case 4: i = 0; j = a; k = b; break;
          default: i = r; j = a; k = b; break;
        }
        out.push_back(tile.nodes[i + m * (j + m * k)]);
      }
  }
  return out;
}

template <int Dim>
SurfaceTile<Dim> make_surface(const Tile<Dim>& tile, const typename Tile<Dim>::Face& f, int element) {
  SurfaceTile<Dim> s;
  s.degree = tile.degree;
  s.element = element;
  s.nodes = face_nodes(tile, f.id);
  if (f.reversed) {
    if constexpr (Dim == 2) {
      std::reverse(s.nodes.begin(), s.nodes.end());
    } else {
      const int m = tile.degree + 1;
      std::vector<Vec<Dim>> t(s.nodes.size());
      for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) t[b + m * a] = s.nodes[a + m * b];
      s.nodes = std::move(t);
    }
  }
  return s;
}

}  // namespace tiga
