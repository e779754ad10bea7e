#pragma once

#include "splines.hpp"

#include <memory>

namespace tiga {

enum class MapKind { IdentityBox, PolynomialDistortion, SplineCoefficients };

template <int Dim>
struct Jacobian {
  Mat<Dim> J;
  double det;
};

// F : [0,1]^Dim -> physical space
template <int Dim>
class GeometryMap {
 public:
  GeometryMap() : GeometryMap(identity_box(Vec<Dim>::Zero(), Vec<Dim>::Ones())) {}

  static GeometryMap identity_box(const Vec<Dim>& lo, const Vec<Dim>& hi) {
    GeometryMap m(MapKind::IdentityBox);
    m.lo_ = lo;
    m.hi_ = hi;
    return m;
  }

  // identity plus a bubble perturbation vanishing on the boundary of the box
  static GeometryMap distorted_box(const Vec<Dim>& lo, const Vec<Dim>& hi, double amplitude = 0.6) {
    GeometryMap m(MapKind::PolynomialDistortion);
    m.lo_ = lo;
    m.hi_ = hi;
    m.amplitude_ = amplitude;
    return m;
  }

  static GeometryMap spline(TensorBSplineSpace<Dim> space, std::vector<Vec<Dim>> control) {
    if (static_cast<int>(control.size()) != space.size())
      throw DomainError("spline map: control point count does not match space dimension");
    GeometryMap m(MapKind::SplineCoefficients);
    m.space_ = std::make_shared<TensorBSplineSpace<Dim>>(std::move(space));
    m.control_ = std::make_shared<std::vector<Vec<Dim>>>(std::move(control));
    m.lo_ = m.hi_ = (*m.control_)[0];
    for (const auto& c : *m.control_) {
      m.lo_ = m.lo_.cwiseMin(c);
      m.hi_ = m.hi_.cwiseMax(c);
    }
    return m;
  }

  MapKind kind() const { return kind_; }
  const Vec<Dim>& lo() const { return lo_; }
  const Vec<Dim>& hi() const { return hi_; }
  double diameter() const { return (hi_ - lo_).norm(); }

  Vec<Dim> point(const Vec<Dim>& x) const {
    switch (kind_) {
      case MapKind::IdentityBox:
        return lo_ + (hi_ - lo_).cwiseProduct(x);
      case MapKind::PolynomialDistortion: {
        Vec<Dim> d;
        Mat<Dim> unused;
        bubble(x, d, unused);
        return lo_ + (hi_ - lo_).cwiseProduct(x + d);
      }
      case MapKind::SplineCoefficients: {
        BasisValues<Dim> bv;
        space_->eval(space_->find_element(x), x, bv);
        Vec<Dim> y = Vec<Dim>::Zero();
        for (size_t i = 0; i < bv.values.size(); ++i) y += bv.values[i] * (*control_)[bv.indices[i]];
        return y;
      }
    }
    return x;
  }

  Jacobian<Dim> jacobian(const Vec<Dim>& x) const {
    Mat<Dim> J = Mat<Dim>::Identity();
    switch (kind_) {
      case MapKind::IdentityBox:
        J = (hi_ - lo_).asDiagonal();
        break;
      case MapKind::PolynomialDistortion: {
        Vec<Dim> d;
        Mat<Dim> Dd;
        bubble(x, d, Dd);
        J = (hi_ - lo_).asDiagonal() * (Mat<Dim>::Identity() + Dd);
        break;
      }
      case MapKind::SplineCoefficients: {
        BasisValues<Dim> bv;
        space_->eval(space_->find_element(x), x, bv);
        J.setZero();
        for (size_t i = 0; i < bv.values.size(); ++i) J += (*control_)[bv.indices[i]] * bv.gradients[i].transpose();
        break;
      }
    }
    const double det = J.determinant();
    if (!(det > 0.0)) throw GeometryError("geometry map: nonpositive Jacobian determinant");
    return {J, det};
  }

  // L with |F(x) - F(y)| <= L |x - y| for x, y in the parametric box b
  double lipschitz_bound(const Box<Dim>& b) const {
    if (kind_ == MapKind::IdentityBox) return (hi_ - lo_).maxCoeff();
    double best = 0.0;
    const int n = 3;
    int total = 1;
    for (int d = 0; d < Dim; ++d) total *= n;
    for (int k = 0; k < total; ++k) {
      Vec<Dim> u;
      int r = k;
      for (int d = 0; d < Dim; ++d) {
        u[d] = 0.5 * (r % n);
        r /= n;
      }
      best = std::max(best, jacobian(b.at(u)).J.norm());
    }
    return 1.25 * best;
  }

 private:
  explicit GeometryMap(MapKind k) : kind_(k) {}

  void bubble(const Vec<Dim>& x, Vec<Dim>& d, Mat<Dim>& Dd) const {
    double b = amplitude_;
    Vec<Dim> db;
    for (int i = 0; i < Dim; ++i) b *= x[i] * (1.0 - x[i]);
    for (int i = 0; i < Dim; ++i) {
      double g = amplitude_ * (1.0 - 2.0 * x[i]);
      for (int j = 0; j < Dim; ++j)
        if (j != i) g *= x[j] * (1.0 - x[j]);
      db[i] = g;
    }
    for (int i = 0; i < Dim; ++i) {
      const int k = (i + 1) % Dim;
      const double w = 1.0 + 2.0 * x[k];
      d[i] = b * w;
      for (int j = 0; j < Dim; ++j) Dd(i, j) = db[j] * w + (j == k ? 2.0 * b : 0.0);
    }
  }

  MapKind kind_;
  Vec<Dim> lo_ = Vec<Dim>::Zero(), hi_ = Vec<Dim>::Ones();
  double amplitude_ = 0.0;
  std::shared_ptr<const TensorBSplineSpace<Dim>> space_;
  std::shared_ptr<const std::vector<Vec<Dim>>> control_;
};

template <int Dim>
Vec<Dim> map_point(const GeometryMap<Dim>& map, const Vec<Dim>& x) {
  return map.point(x);
}

template <int Dim>
Jacobian<Dim> map_jacobian(const GeometryMap<Dim>& map, const Vec<Dim>& x) {
  return map.jacobian(x);
}

template <int Dim>
class BezierMesh {
 public:
  BezierMesh() = default;
  BezierMesh(const TensorBSplineSpace<Dim>& space, const GeometryMap<Dim>& map)
      : counts_(space.element_counts()) {
    boxes_.reserve(space.num_elements());
    for (int e = 0; e < space.num_elements(); ++e) {
      Box<Dim> b = space.element_box(unflatten<Dim>(e, counts_));
      boxes_.push_back(b);
      // image diameter estimated from the corners
      for (int c = 0; c < (1 << Dim); ++c) {
        Vec<Dim> u, v;
        for (int d = 0; d < Dim; ++d) {
          u[d] = (c >> d) & 1;
          v[d] = 1.0 - u[d];
        }
        h_ = std::max(h_, (map.point(b.at(u)) - map.point(b.at(v))).norm());
      }
    }
  }

  int num_elements() const { return static_cast<int>(boxes_.size()); }
  const MultiIndex<Dim>& counts() const { return counts_; }
  const Box<Dim>& box(int e) const { return boxes_[e]; }
  MultiIndex<Dim> multi_index(int e) const { return unflatten<Dim>(e, counts_); }
  int flat(const MultiIndex<Dim>& e) const { return flat_index<Dim>(e, counts_); }
  double h() const { return h_; }

 private:
  MultiIndex<Dim> counts_{};
  std::vector<Box<Dim>> boxes_;
  double h_ = 0.0;
};

}  // namespace tiga
