#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tiga {

template <int Dim> using Vec = Eigen::Matrix<double, Dim, 1>;
template <int Dim> using Mat = Eigen::Matrix<double, Dim, Dim>;
template <int Dim> using MultiIndex = std::array<int, Dim>;

// value of a scalar or vector field (at most 3 components)
using Field = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
// rows = components, cols = spatial derivative direction
using FieldGrad = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class TangentialCutError : public Error {
 public:
  using Error::Error;
};

class DegenerateTopologyError : public Error {
 public:
  using Error::Error;
};

class ReparamError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

template <int Dim>
struct Box {
  Vec<Dim> lo = Vec<Dim>::Zero();
  Vec<Dim> hi = Vec<Dim>::Ones();

  Vec<Dim> center() const { return 0.5 * (lo + hi); }
  Vec<Dim> size() const { return hi - lo; }
  double measure() const { return size().prod(); }
  Vec<Dim> at(const Vec<Dim>& unit) const { return lo + size().cwiseProduct(unit); }
  bool contains(const Vec<Dim>& x, double slack = 0.0) const {
    for (int d = 0; d < Dim; ++d)
      if (x[d] < lo[d] - slack || x[d] > hi[d] + slack) return false;
    return true;
  }
};

inline constexpr double pi = 3.14159265358979323846;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// maps a hash to [-1, 1]
inline double hash_unit(std::uint64_t h) {
  return 2.0 * static_cast<double>(h >> 11) * 0x1.0p-53 - 1.0;
}

template <int Dim>
int flat_index(const MultiIndex<Dim>& idx, const MultiIndex<Dim>& sizes) {
  int flat = 0;
  for (int d = Dim - 1; d >= 0; --d) flat = flat * sizes[d] + idx[d];
  return flat;
}

template <int Dim>
MultiIndex<Dim> unflatten(int flat, const MultiIndex<Dim>& sizes) {
  MultiIndex<Dim> idx{};
  for (int d = 0; d < Dim; ++d) {
    idx[d] = flat % sizes[d];
    flat /= sizes[d];
  }
  return idx;
}

template <int Dim>
int product(const MultiIndex<Dim>& sizes) {
  int n = 1;
  for (int s : sizes) n *= s;
  return n;
}

}  // namespace tiga
