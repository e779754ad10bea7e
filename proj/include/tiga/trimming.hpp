#pragma once

#include "geometry.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace tiga {

enum class KeepSide { Negative, Positive };
enum class Label : unsigned char { Interior, Cut, Exterior };

// phi is a signed-distance-like field in physical space
template <int Dim>
class TrimmingBoundary {
 public:
  using Fn = std::function<double(const Vec<Dim>&)>;
  using GradFn = std::function<Vec<Dim>(const Vec<Dim>&)>;

  TrimmingBoundary() = default;
  TrimmingBoundary(Fn phi, GradFn grad, KeepSide keep, double scale, double lipschitz = 0.0)
      : phi_(std::move(phi)), grad_(std::move(grad)), keep_(keep), scale_(scale), lipschitz_(lipschitz) {}

  static TrimmingBoundary none() { return TrimmingBoundary(); }

  static TrimmingBoundary ball(const Vec<Dim>& c, double R, KeepSide keep) {
    return TrimmingBoundary(
        [c, R](const Vec<Dim>& x) { return (x - c).norm() - R; },
        [c](const Vec<Dim>& x) {
          const Vec<Dim> d = x - c;
          const double n = d.norm();
          return n > 0.0 ? Vec<Dim>(d / n) : Vec<Dim>::Zero();
        },
        keep, R, 1.0);
  }
  static TrimmingBoundary circle(const Vec<Dim>& c, double R, KeepSide keep) {
    static_assert(Dim == 2);
    return ball(c, R, keep);
  }
  static TrimmingBoundary sphere(const Vec<Dim>& c, double R, KeepSide keep) {
    static_assert(Dim == 3);
    return ball(c, R, keep);
  }
  // phi = n.x - offset with n normalized
  static TrimmingBoundary plane(Vec<Dim> normal, double offset, KeepSide keep, double scale = 1.0) {
    const double len = normal.norm();
    normal /= len;
    offset /= len;
    return TrimmingBoundary([normal, offset](const Vec<Dim>& x) { return normal.dot(x) - offset; },
                            [normal](const Vec<Dim>&) { return normal; }, keep, scale, 1.0);
  }

  bool trivial() const { return !phi_; }
  KeepSide keep() const { return keep_; }
  double scale() const { return scale_; }
  double lipschitz() const { return lipschitz_; }
  double phi(const Vec<Dim>& x) const { return trivial() ? -1.0 : phi_(x); }
  Vec<Dim> grad(const Vec<Dim>& x) const { return trivial() ? Vec<Dim>::Zero() : grad_(x); }

  // negative inside the kept region
  double level(const Vec<Dim>& x) const { return keep_ == KeepSide::Negative ? phi(x) : -phi(x); }
  Vec<Dim> level_grad(const Vec<Dim>& x) const { return keep_ == KeepSide::Negative ? grad(x) : Vec<Dim>(-grad(x)); }

 private:
  Fn phi_;
  GradFn grad_;
  KeepSide keep_ = KeepSide::Negative;
  double scale_ = 1.0;
  double lipschitz_ = 0.0;
};

// the trimming level pulled back to the parametric domain
template <int Dim>
class ParamLevel {
 public:
  ParamLevel(const GeometryMap<Dim>& map, const TrimmingBoundary<Dim>& boundary) : map_(&map), boundary_(&boundary) {}

  double operator()(const Vec<Dim>& x) const { return boundary_->level(map_->point(x)); }
  Vec<Dim> grad(const Vec<Dim>& x) const {
    return map_->jacobian(x).J.transpose() * boundary_->level_grad(map_->point(x));
  }
  const GeometryMap<Dim>& map() const { return *map_; }
  const TrimmingBoundary<Dim>& boundary() const { return *boundary_; }

 private:
  const GeometryMap<Dim>* map_;
  const TrimmingBoundary<Dim>* boundary_;
};

struct ClassifyOptions {
  int samples = 5;        // per direction, including the box boundary
  int edge_intervals = 64;
  double eps_geo = -1.0;  // negative: 1e-12 * domain diameter
};

template <int Dim>
double default_eps_geo(const GeometryMap<Dim>& map) {
  return 1e-12 * map.diameter();
}

// safeguarded Newton on a bracket [a, b] with f(a) f(b) < 0
template <class F>
double polish_root(const F& f, double a, double b, double fa, double tol) {
  double x = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    const auto [fx, dfx] = f(x);
    if (std::abs(fx) <= tol) return x;
    if ((fx < 0) == (fa < 0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
    }
    double next = (dfx != 0.0) ? x - fx / dfx : 0.5 * (a + b);
    if (!(next > std::min(a, b) && next < std::max(a, b))) next = 0.5 * (a + b);
    if (std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(a) + std::abs(b) + 1e-300)) return next;
    x = next;
  }
  return x;
}

struct SegmentRoots {
  std::vector<double> roots;
  bool touches_start = false;
  bool touches_end = false;
};

template <int Dim, class Level>
SegmentRoots segment_roots(const Level& level, const Vec<Dim>& a, const Vec<Dim>& b, double tol, int intervals = 64) {
  SegmentRoots out;
  const Vec<Dim> d = b - a;
  auto f = [&](double t) {
    const Vec<Dim> x = a + t * d;
    return std::pair<double, double>(level(x), level.grad(x).dot(d));
  };
  std::vector<double> v(intervals + 1);
  for (int i = 0; i <= intervals; ++i) v[i] = level(Vec<Dim>(a + (static_cast<double>(i) / intervals) * d));
  out.touches_start = std::abs(v[0]) <= tol;
  out.touches_end = std::abs(v[intervals]) <= tol;
  for (int i = 0; i < intervals; ++i) {
    const double t0 = static_cast<double>(i) / intervals, t1 = static_cast<double>(i + 1) / intervals;
    if (i > 0 && std::abs(v[i]) <= tol) out.roots.push_back(t0);
    if (std::abs(v[i]) > tol && std::abs(v[i + 1]) > tol && (v[i] < 0) != (v[i + 1] < 0))
      out.roots.push_back(polish_root(f, t0, t1, v[i], tol));
  }
  return out;
}

template <int Dim>
SegmentRoots intersect_segment(const TrimmingBoundary<Dim>& boundary, const GeometryMap<Dim>& map, const Vec<Dim>& a,
                               const Vec<Dim>& b) {
  if (boundary.trivial()) return {};
  return segment_roots<Dim>(ParamLevel<Dim>(map, boundary), a, b, 1e-13 * boundary.scale());
}

// sign-uniformity certificate from the Lipschitz bound of the level field
template <int Dim>
int certified_sign(const ParamLevel<Dim>& level, const Box<Dim>& box, double eps) {
  const double lip = level.boundary().lipschitz();
  if (!(lip > 0.0)) return 0;
  const double radius = 0.5 * box.size().norm() * level.map().lipschitz_bound(box) * lip;
  const double v = level(box.center());
  if (v > radius + eps) return 1;
  if (v < -radius - eps) return -1;
  return 0;
}

// sign samples on a tensor grid plus root scans along every edge
template <int Dim, class Level>
Label sample_label(const Level& level, const Box<Dim>& box, const ClassifyOptions& opt, double eps) {
  const int n = std::max(opt.samples, 2);
  int total = 1;
  for (int d = 0; d < Dim; ++d) total *= n;
  bool neg = false, pos = false, near = false, all_near = true;
  for (int k = 0; k < total; ++k) {
    Vec<Dim> u;
    int r = k;
    for (int d = 0; d < Dim; ++d) {
      u[d] = static_cast<double>(r % n) / (n - 1);
      r /= n;
    }
    const double v = level(box.at(u));
    if (std::abs(v) <= eps) {
      near = true;
    } else {
      all_near = false;
      (v < 0 ? neg : pos) = true;
    }
  }
  if (all_near) throw TangentialCutError("classify: every sample of an element lies on the trimming boundary");
  if (near || (neg && pos)) return Label::Cut;

  // edges catch cuts passing between samples
  for (int c = 0; c < (1 << Dim); ++c) {
    for (int d = 0; d < Dim; ++d) {
      if ((c >> d) & 1) continue;
      Vec<Dim> u, w;
      for (int q = 0; q < Dim; ++q) u[q] = (c >> q) & 1;
      w = u;
      w[d] = 1.0;
      const SegmentRoots sr = segment_roots<Dim>(level, box.at(u), box.at(w), eps, opt.edge_intervals);
      if (!sr.roots.empty() || sr.touches_start || sr.touches_end) return Label::Cut;
    }
  }
  return neg ? Label::Interior : Label::Exterior;
}

template <int Dim>
Label classify_box(const ParamLevel<Dim>& level, const Box<Dim>& box, const ClassifyOptions& opt, double eps) {
  if (level.boundary().trivial()) return Label::Interior;
  const int certified = certified_sign(level, box, eps);
  if (certified != 0) return certified < 0 ? Label::Interior : Label::Exterior;
  return sample_label<Dim>(level, box, opt, eps);
}

struct ElementClassification {
  std::vector<Label> labels;

  int count(Label l) const { return static_cast<int>(std::count(labels.begin(), labels.end(), l)); }
};

template <int Dim>
ElementClassification classify(const BezierMesh<Dim>& mesh, const GeometryMap<Dim>& map,
                               const TrimmingBoundary<Dim>& boundary, const ClassifyOptions& opt = {}) {
  const ParamLevel<Dim> level(map, boundary);
  const double eps = opt.eps_geo >= 0.0 ? opt.eps_geo : default_eps_geo(map);
  ElementClassification out;
  out.labels.resize(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) out.labels[e] = classify_box(level, mesh.box(e), opt, eps);
  return out;
}

struct SliceResult {
  ElementClassification classification;
  int leaf_visits = 0;
  int box_visits = 0;
  int max_depth = 0;
};

namespace detail {

template <int Dim>
void slice_recurse(const BezierMesh<Dim>& mesh, const ParamLevel<Dim>& level, const ClassifyOptions& opt, double eps,
                   MultiIndex<Dim> lo, MultiIndex<Dim> hi, int depth, SliceResult& out) {
  ++out.box_visits;
  out.max_depth = std::max(out.max_depth, depth);
  MultiIndex<Dim> last{};
  int count = 1;
  for (int d = 0; d < Dim; ++d) {
    last[d] = hi[d] - 1;
    count *= hi[d] - lo[d];
  }
  auto fill = [&](Label l) {
    MultiIndex<Dim> cnt{};
    for (int d = 0; d < Dim; ++d) cnt[d] = hi[d] - lo[d];
    for (int k = 0; k < count; ++k) {
      MultiIndex<Dim> e = unflatten<Dim>(k, cnt);
      for (int d = 0; d < Dim; ++d) e[d] += lo[d];
      out.classification.labels[mesh.flat(e)] = l;
    }
  };
  if (level.boundary().trivial()) {
    fill(Label::Interior);
    return;
  }
  if (count == 1) {
    ++out.leaf_visits;
    out.classification.labels[mesh.flat(lo)] = classify_box(level, mesh.box(mesh.flat(lo)), opt, eps);
    return;
  }
  Box<Dim> box;
  box.lo = mesh.box(mesh.flat(lo)).lo;
  box.hi = mesh.box(mesh.flat(last)).hi;
  const int s = certified_sign(level, box, eps);
  if (s != 0) {
    fill(s < 0 ? Label::Interior : Label::Exterior);
    return;
  }
  int dir = -1;
  for (int d = 0; d < Dim; ++d)
    if (hi[d] - lo[d] > 1 && (dir < 0 || box.size()[d] > box.size()[dir])) dir = d;
  const int mid = (lo[dir] + hi[dir]) / 2;
  MultiIndex<Dim> h1 = hi, l2 = lo;
  h1[dir] = mid;
  l2[dir] = mid;
  slice_recurse<Dim>(mesh, level, opt, eps, lo, h1, depth + 1, out);
  slice_recurse<Dim>(mesh, level, opt, eps, l2, hi, depth + 1, out);
}

}  // namespace detail

// recursive bisection at middle knots with early exit on sign-uniform boxes
template <int Dim>
SliceResult slice(const BezierMesh<Dim>& mesh, const GeometryMap<Dim>& map, const TrimmingBoundary<Dim>& boundary,
                  const ClassifyOptions& opt = {}) {
  const ParamLevel<Dim> level(map, boundary);
  const double eps = opt.eps_geo >= 0.0 ? opt.eps_geo : default_eps_geo(map);
  SliceResult out;
  out.classification.labels.assign(mesh.num_elements(), Label::Exterior);
  MultiIndex<Dim> lo{};
  detail::slice_recurse<Dim>(mesh, level, opt, eps, lo, mesh.counts(), 0, out);
  return out;
}

template <int Dim>
std::vector<int> active_index_set(const TensorBSplineSpace<Dim>& space, const ElementClassification& cls) {
  std::vector<char> flag(space.size(), 0);
  std::vector<int> local;
  for (int e = 0; e < space.num_elements(); ++e) {
    if (cls.labels[e] == Label::Exterior) continue;
    space.local_indices(unflatten<Dim>(e, space.element_counts()), local);
    for (int i : local) flag[i] = 1;
  }
  std::vector<int> out;
  for (int i = 0; i < space.size(); ++i)
    if (flag[i]) out.push_back(i);
  return out;
}

}  // namespace tiga
