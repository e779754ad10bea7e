#pragma once

#include "core.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

namespace tiga {

class KnotVector {
 public:
  KnotVector() = default;

  KnotVector(int degree, std::vector<double> knots) : degree_(degree), knots_(std::move(knots)) {
    if (degree_ < 0) throw DomainError("knot vector: negative degree");
    const int m = static_cast<int>(knots_.size());
    if (m < 2 * (degree_ + 1)) throw DomainError("knot vector: too few knots for degree");
    for (int i = 1; i < m; ++i)
      if (knots_[i] < knots_[i - 1]) throw DomainError("knot vector: knots must be nondecreasing");
    const double a = knots_.front(), b = knots_.back();
    if (!(b > a)) throw DomainError("knot vector: no nonempty knot span");
    for (int i = 0; i <= degree_; ++i)
      if (knots_[i] != a || knots_[m - 1 - i] != b) throw DomainError("knot vector: end knots must repeat p+1 times");
    if (knots_[degree_ + 1] == a || knots_[m - degree_ - 2] == b)
      throw DomainError("knot vector: end knots repeated more than p+1 times");

    breaks_.push_back(a);
    for (int i = 1; i < m; ++i) {
      if (knots_[i] > knots_[i - 1]) {
        spans_.push_back(i - 1);
        breaks_.push_back(knots_[i]);
      }
    }
    int run = 1;
    for (int i = 1; i < m; ++i) {
      run = (knots_[i] == knots_[i - 1]) ? run + 1 : 1;
      if (run > degree_ && knots_[i] != a && knots_[i] != b)
        throw DomainError("knot vector: interior multiplicity exceeds degree");
    }
  }

  // open uniform knot vector on [0, 1]
  static KnotVector uniform(int degree, int spans) {
    if (spans < 1) throw DomainError("knot vector: need at least one span");
    std::vector<double> k(degree + 1, 0.0);
    for (int i = 1; i < spans; ++i) k.push_back(static_cast<double>(i) / spans);
    k.insert(k.end(), degree + 1, 1.0);
    return KnotVector(degree, std::move(k));
  }

  int degree() const { return degree_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& breaks() const { return breaks_; }
  int num_functions() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  int num_elements() const { return static_cast<int>(spans_.size()); }
  int first_function(int element) const { return spans_[element] - degree_; }

  double max_span() const {
    double h = 0.0;
    for (size_t i = 1; i < breaks_.size(); ++i) h = std::max(h, breaks_[i] - breaks_[i - 1]);
    return h;
  }

  int find_element(double x) const {
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    int e = static_cast<int>(it - breaks_.begin()) - 1;
    return std::clamp(e, 0, num_elements() - 1);
  }

  double greville(int i) const {
    if (degree_ == 0) return 0.5 * (knots_[i] + knots_[i + 1]);
    double s = 0.0;
    for (int j = 1; j <= degree_; ++j) s += knots_[i + j];
    return s / degree_;
  }

  // elements (span indices) on which function i is nonzero
  std::pair<int, int> support(int i) const {
    const double a = knots_[i], b = knots_[i + degree_ + 1];
    int lo = static_cast<int>(std::lower_bound(breaks_.begin(), breaks_.end(), a) - breaks_.begin());
    int hi = static_cast<int>(std::lower_bound(breaks_.begin(), breaks_.end(), b) - breaks_.begin());
    return {lo, hi};  // [lo, hi)
  }

  // values and first derivatives of the p+1 functions nonzero on the element
  void eval(int element, double x, double* values, double* derivs) const {
    const int p = degree_;
    const double a = breaks_[element], b = breaks_[element + 1];
    const double tol = 1e-12 * (breaks_.back() - breaks_.front());
    if (x < a - tol || x > b + tol) {
      std::ostringstream msg;
      msg << "basis evaluation: point " << x << " outside element [" << a << ", " << b << "]";
      throw DomainError(msg.str());
    }
    x = std::clamp(x, a, b);
    if (p == 0) {
      values[0] = 1.0;
      derivs[0] = 0.0;
      return;
    }
    const int span = spans_[element];
    double ndu[8][8];
    double left[8], right[8];
    if (p > 7) throw DomainError("basis evaluation: degree above 7 not supported");
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
      left[j] = x - knots_[span + 1 - j];
      right[j] = knots_[span + j] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        ndu[j][r] = right[r + 1] + left[j - r];
        const double temp = ndu[r][j - 1] / ndu[j][r];
        ndu[r][j] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      ndu[j][j] = saved;
    }
    for (int r = 0; r <= p; ++r) {
      values[r] = ndu[r][p];
      double d = 0.0;
      if (r >= 1) d += ndu[r - 1][p - 1] / ndu[p][r - 1];
      if (r <= p - 1) d -= ndu[r][p - 1] / ndu[p][r];
      derivs[r] = p * d;
    }
  }

 private:
  int degree_ = 0;
  std::vector<double> knots_;
  std::vector<double> breaks_;
  std::vector<int> spans_;
};

template <int Dim>
struct BasisValues {
  std::vector<int> indices;
  std::vector<double> values;
  std::vector<Vec<Dim>> gradients;
};

template <int Dim>
class TensorBSplineSpace {
 public:
  TensorBSplineSpace() = default;
  explicit TensorBSplineSpace(std::array<KnotVector, Dim> kv) : kv_(std::move(kv)) {
    for (int d = 0; d < Dim; ++d) {
      nfun_[d] = kv_[d].num_functions();
      nel_[d] = kv_[d].num_elements();
      local_[d] = kv_[d].degree() + 1;
    }
  }

  static TensorBSplineSpace uniform(int degree, int spans) {
    std::array<KnotVector, Dim> kv;
    for (int d = 0; d < Dim; ++d) kv[d] = KnotVector::uniform(degree, spans);
    return TensorBSplineSpace(std::move(kv));
  }

  const KnotVector& knots(int d) const { return kv_[d]; }
  const MultiIndex<Dim>& dims() const { return nfun_; }
  const MultiIndex<Dim>& element_counts() const { return nel_; }
  int size() const { return product<Dim>(nfun_); }
  int num_elements() const { return product<Dim>(nel_); }
  int local_size() const { return product<Dim>(local_); }
  int degree(int d) const { return kv_[d].degree(); }

  Box<Dim> element_box(const MultiIndex<Dim>& e) const {
    Box<Dim> b;
    for (int d = 0; d < Dim; ++d) {
      b.lo[d] = kv_[d].breaks()[e[d]];
      b.hi[d] = kv_[d].breaks()[e[d] + 1];
    }
    return b;
  }

  MultiIndex<Dim> find_element(const Vec<Dim>& x) const {
    MultiIndex<Dim> e{};
    for (int d = 0; d < Dim; ++d) e[d] = kv_[d].find_element(x[d]);
    return e;
  }

  // flat global indices of the functions nonzero on element e, local lexicographic order
  void local_indices(const MultiIndex<Dim>& e, std::vector<int>& out) const {
    out.resize(local_size());
    MultiIndex<Dim> first{};
    for (int d = 0; d < Dim; ++d) first[d] = kv_[d].first_function(e[d]);
    for (int l = 0; l < local_size(); ++l) {
      MultiIndex<Dim> li = unflatten<Dim>(l, local_), gi{};
      for (int d = 0; d < Dim; ++d) gi[d] = first[d] + li[d];
      out[l] = flat_index<Dim>(gi, nfun_);
    }
  }

  void eval(const MultiIndex<Dim>& e, const Vec<Dim>& x, BasisValues<Dim>& out) const {
    double val[Dim][8], der[Dim][8];
    for (int d = 0; d < Dim; ++d) kv_[d].eval(e[d], x[d], val[d], der[d]);
    local_indices(e, out.indices);
    const int n = local_size();
    out.values.resize(n);
    out.gradients.resize(n);
    for (int l = 0; l < n; ++l) {
      MultiIndex<Dim> li = unflatten<Dim>(l, local_);
      double v = 1.0;
      Vec<Dim> g = Vec<Dim>::Ones();
      for (int d = 0; d < Dim; ++d) {
        v *= val[d][li[d]];
        for (int c = 0; c < Dim; ++c) g[c] *= (c == d) ? der[d][li[d]] : val[d][li[d]];
      }
      out.values[l] = v;
      out.gradients[l] = g;
    }
  }

  std::vector<MultiIndex<Dim>> support(int global) const {
    MultiIndex<Dim> gi = unflatten<Dim>(global, nfun_);
    MultiIndex<Dim> lo{}, cnt{};
    for (int d = 0; d < Dim; ++d) {
      auto [a, b] = kv_[d].support(gi[d]);
      lo[d] = a;
      cnt[d] = b - a;
    }
    std::vector<MultiIndex<Dim>> out;
    for (int l = 0; l < product<Dim>(cnt); ++l) {
      MultiIndex<Dim> li = unflatten<Dim>(l, cnt);
      for (int d = 0; d < Dim; ++d) li[d] += lo[d];
      out.push_back(li);
    }
    return out;
  }

 private:
  std::array<KnotVector, Dim> kv_;
  MultiIndex<Dim> nfun_{}, nel_{}, local_{};
};

template <int Dim>
BasisValues<Dim> eval_basis(const TensorBSplineSpace<Dim>& space, const MultiIndex<Dim>& element,
                            const Vec<Dim>& point) {
  BasisValues<Dim> out;
  space.eval(element, point, out);
  return out;
}

template <int Dim>
std::vector<MultiIndex<Dim>> active_elements_of_function(const TensorBSplineSpace<Dim>& space, int global) {
  if (global < 0 || global >= space.size()) throw DomainError("function index out of range");
  return space.support(global);
}

}  // namespace tiga
