#pragma once

#include "quadrature.hpp"
#include "trimming.hpp"

#include <functional>
#include <optional>
#include <ostream>

namespace tiga {

struct ReparamOptions {
  int degree = 2;
  int ht_divisions = 1;
  int max_depth = 4;
  double geo_precision = 0.0;  // emulated kernel precision (physical length), 0: native
  std::uint64_t seed = 0;
  bool arc_length = true;      // curved 2D edges sampled at equal physical arc length
  int validation_points = 0;   // per direction, 0: degree + 3
  ClassifyOptions classify;
};

template <int Dim>
struct CutElementReparam {
  MultiIndex<Dim> element{};
  int flat = -1;
  Box<Dim> box;
  std::vector<Tile<Dim>> tiles;
  int subdivision_depth = 0;
};

// scalar field on a 2D local box
struct Level2 {
  std::function<double(const Vec<2>&)> f;
  std::function<Vec<2>(const Vec<2>&)> g;

  double operator()(const Vec<2>& x) const { return f(x); }
  Vec<2> grad(const Vec<2>& x) const { return g(x); }
};

namespace detail {

inline Vec<2> local_point(int s_axis, double t, double s) { return s_axis == 1 ? Vec<2>(t, s) : Vec<2>(s, t); }

// root of f on [s0, s1]; falls back to the endpoint of smaller residual
template <class F>
double root_on_line(const F& f, double s0, double s1, double tol, bool* found = nullptr) {
  const double f0 = f(s0).first, f1 = f(s1).first;
  bool ok = true;
  double r;
  if (std::abs(f0) <= tol) {
    r = s0;
  } else if (std::abs(f1) <= tol) {
    r = s1;
  } else if ((f0 < 0) == (f1 < 0)) {
    ok = false;
    r = std::abs(f0) < std::abs(f1) ? s0 : s1;
  } else {
    r = polish_root(f, s0, s1, f0, tol);
  }
  if (found) *found = ok;
  return r;
}

struct Bound {
  int level = -1;  // < 0: constant side
  double value = 0.0;
};

struct ColumnPiece {
  double t0, t1;
  Bound lower, upper;
  std::vector<int> signs;
};

struct ColumnPartition {
  Box<2> box;
  int s_axis = 1;
  double tol = 0.0;
  std::vector<const Level2*> levels;
  std::vector<ColumnPiece> pieces;

  double bound(const Bound& b, double t) const {
    if (b.level < 0) return b.value;
    const Level2& L = *levels[b.level];
    const int sa = s_axis;
    auto f = [&](double s) {
      const Vec<2> x = local_point(sa, t, s);
      return std::pair<double, double>(L(x), L.grad(x)[sa]);
    };
    return root_on_line(f, box.lo[sa], box.hi[sa], tol);
  }
};

// split a 2D box into columns along s_axis bounded by the zero sets of the levels;
// fails if an active level is not monotone along s
inline std::optional<ColumnPartition> column_partition(const Box<2>& box, int s_axis,
                                                       const std::vector<const Level2*>& levels, double tol,
                                                       double eps) {
  const int ta = 1 - s_axis;
  const double t0 = box.lo[ta], t1 = box.hi[ta], s0 = box.lo[s_axis], s1 = box.hi[s_axis];
  ColumnPartition part;
  part.box = box;
  part.s_axis = s_axis;
  part.tol = tol;
  part.levels = levels;

  const int nl = static_cast<int>(levels.size());
  std::vector<int> fixed_sign(nl, 0);
  std::vector<double> breaks = {t0, t1};
  const int n = 7;
  for (int l = 0; l < nl; ++l) {
    const Level2& L = *levels[l];
    bool neg = false, pos = false, near = false;
    double dmin = 1e300, dmax = -1e300, gmax = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const Vec<2> x = box.at(Vec<2>(static_cast<double>(i) / (n - 1), static_cast<double>(j) / (n - 1)));
        const double v = L(x);
        const Vec<2> g = L.grad(x);
        if (std::abs(v) <= eps) near = true;
        else (v < 0 ? neg : pos) = true;
        dmin = std::min(dmin, g[s_axis]);
        dmax = std::max(dmax, g[s_axis]);
        gmax = std::max(gmax, g.norm());
      }
    bool active = near || (neg && pos);
    std::vector<SegmentRoots> side(2);
    for (int q = 0; q < 2; ++q) {
      const double s = q == 0 ? s0 : s1;
      side[q] = segment_roots<2>(L, local_point(s_axis, t0, s), local_point(s_axis, t1, s), tol);
      if (!side[q].roots.empty()) active = true;
    }
    if (!active) {
      for (int q = 0; q < 2 && !active; ++q) {
        const double t = q == 0 ? t0 : t1;
        if (!segment_roots<2>(L, local_point(s_axis, t, s0), local_point(s_axis, t, s1), tol).roots.empty())
          active = true;
      }
    }
    if (!active) {
      fixed_sign[l] = neg ? -1 : 1;
      continue;
    }
    if (dmin < -1e-8 * gmax && dmax > 1e-8 * gmax) return std::nullopt;
    for (int q = 0; q < 2; ++q)
      for (double r : side[q].roots) breaks.push_back(t0 + r * (t1 - t0));
  }
  std::sort(breaks.begin(), breaks.end());
  const double tmin = 1e-12 * (t1 - t0);
  std::vector<double> bp;
  for (double b : breaks)
    if (bp.empty() || b - bp.back() > tmin) bp.push_back(b);
  if (bp.back() < t1) bp.back() = t1;

  for (size_t k = 0; k + 1 < bp.size(); ++k) {
    const double a = bp[k], b = bp[k + 1], tm = 0.5 * (a + b);
    std::vector<std::pair<double, int>> cuts;
    for (int l = 0; l < nl; ++l) {
      if (fixed_sign[l] != 0) continue;
      const Level2& L = *levels[l];
      auto f = [&](double s) {
        const Vec<2> x = local_point(s_axis, tm, s);
        return std::pair<double, double>(L(x), L.grad(x)[s_axis]);
      };
      const double f0 = f(s0).first, f1 = f(s1).first;
      if (std::abs(f0) <= tol || std::abs(f1) <= tol || (f0 < 0) == (f1 < 0)) continue;
      cuts.push_back({polish_root(f, s0, s1, f0, tol), l});
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<Bound> bounds;
    std::vector<double> at_mid;
    bounds.push_back({-1, s0});
    at_mid.push_back(s0);
    for (auto& c : cuts) {
      bounds.push_back({c.second, 0.0});
      at_mid.push_back(c.first);
    }
    bounds.push_back({-1, s1});
    at_mid.push_back(s1);
    for (size_t q = 0; q + 1 < bounds.size(); ++q) {
      if (at_mid[q + 1] - at_mid[q] <= 1e-14 * (s1 - s0)) continue;
      ColumnPiece piece{a, b, bounds[q], bounds[q + 1], std::vector<int>(nl)};
      const double sm = 0.5 * (at_mid[q] + at_mid[q + 1]);
      for (int l = 0; l < nl; ++l)
        piece.signs[l] = fixed_sign[l] != 0 ? fixed_sign[l] : ((*levels[l])(local_point(s_axis, tm, sm)) < 0 ? -1 : 1);
      part.pieces.push_back(std::move(piece));
    }
  }
  return part;
}

inline Tile<2> affine_quad(const Box<2>& b, int r) {
  Tile<2> t{TileKind::Quad, r, {}, {}};
  for (int j = 0; j <= r; ++j)
    for (int i = 0; i <= r; ++i)
      t.nodes.push_back(b.at(Vec<2>(static_cast<double>(i) / r, static_cast<double>(j) / r)));
  return t;
}

inline Tile<3> affine_hex(const Box<3>& b, int r) {
  Tile<3> t{TileKind::Hex, r, {}, {}};
  for (int k = 0; k <= r; ++k)
    for (int j = 0; j <= r; ++j)
      for (int i = 0; i <= r; ++i)
        t.nodes.push_back(b.at(Vec<3>(static_cast<double>(i) / r, static_cast<double>(j) / r, static_cast<double>(k) / r)));
  return t;
}

template <int Dim>
Vec<Dim> reference_center(TileKind kind) {
  if (kind == TileKind::Triangle) {
    Vec<Dim> c;
    c.setConstant(1.0 / 3.0);
    return c;
  }
  return Vec<Dim>::Constant(0.5);
}

// mark curved faces reversed when their natural normal points into the kept side
template <int Dim, class Level>
void orient_faces(Tile<Dim>& tile, const Level& level) {
  for (auto& f : tile.boundary_faces) {
    f.reversed = false;
    const SurfaceTile<Dim> s = make_surface(tile, f, -1);
    const SurfacePoint<Dim> sp = eval_surface(s, Eigen::Matrix<double, Dim - 1, 1>::Constant(0.5));
    const Vec<Dim> n = area_normal<Dim>(Mat<Dim>::Identity(), sp.T);
    f.reversed = n.dot(level.grad(sp.x)) < 0.0;
  }
}

template <int Dim>
bool tiles_valid(const std::vector<Tile<Dim>>& tiles, const Box<Dim>& box, int npts) {
  const double slack = 1e-12 * box.size().maxCoeff();
  for (const auto& t : tiles) {
    for (const auto& x : t.nodes)
      if (!box.contains(x, slack)) return false;
    const QuadratureRule<Dim> ref = reference_rule<Dim>(t.kind, npts);
    for (const auto& p : ref.points)
      if (!(eval_tile(t, p).J.determinant() > 0.0)) return false;
  }
  return true;
}

template <int Dim>
std::vector<Box<Dim>> dyadic_children(const Box<Dim>& b) {
  std::vector<Box<Dim>> out;
  const Vec<Dim> mid = b.center();
  for (int c = 0; c < (1 << Dim); ++c) {
    Box<Dim> q;
    for (int d = 0; d < Dim; ++d) {
      const bool upper = (c >> d) & 1;
      q.lo[d] = upper ? mid[d] : b.lo[d];
      q.hi[d] = upper ? b.hi[d] : mid[d];
    }
    out.push_back(q);
  }
  return out;
}

using SpeedFn = std::function<double(const Vec<2>& x, const Vec<2>& dx)>;

// outward shift of boundary nodes emulating a limited-precision kernel: the level at a
// shifted node lies in [0, g] and varies smoothly along the curve, like a fitted approximation
struct Jitter {
  double g = 0.0;
  std::uint64_t seed = 0;

  explicit operator bool() const { return g > 0.0; }

  // shift along a line through x on which the level has derivative dlevel
  template <int D>
  double operator()(const Vec<D>& x, double dlevel) const {
    std::uint64_t h = splitmix64(seed);
    double arg = pi * hash_unit(h);
    for (int d = 0; d < D; ++d) {
      h = splitmix64(h);
      arg += 2.0 * pi * (3.0 + hash_unit(h)) * x[d];
    }
    return g * (0.5 + 0.5 * std::sin(arg)) / dlevel;
  }
};

// tiles covering {level < 0} inside a 2D local box
class PlanarBuilder {
 public:
  PlanarBuilder(const Level2& level, SpeedFn speed, Jitter jitter, const ReparamOptions& opt, double eps,
                double root_tol)
      : level_(level), speed_(std::move(speed)), jitter_(jitter), opt_(opt), eps_(eps), tol_(root_tol) {}

  void build(const Box<2>& box, int depth, std::vector<Tile<2>>& out, int& depth_used) const {
    depth_used = std::max(depth_used, depth);
    const Label lab = sample_label<2>(level_, box, opt_.classify, eps_);
    if (lab == Label::Exterior) return;
    if (lab == Label::Interior) {
      out.push_back(affine_quad(box, opt_.degree));
      return;
    }
    if (crossings(box) <= 2) {
      const Vec<2> g = level_.grad(box.center());
      const int first = std::abs(g[1]) >= std::abs(g[0]) ? 1 : 0;
      for (int s_axis : {first, 1 - first}) {
        auto part = column_partition(box, s_axis, {&level_}, tol_, eps_);
        if (!part) continue;
        std::vector<Tile<2>> tiles;
        if (!make_tiles(*part, tiles)) continue;
        const int npts = opt_.validation_points > 0 ? opt_.validation_points : opt_.degree + 3;
        if (!tiles_valid<2>(tiles, box, npts)) continue;
        out.insert(out.end(), tiles.begin(), tiles.end());
        return;
      }
    }
    if (depth >= opt_.max_depth)
      throw DegenerateTopologyError("reparam: no valid local graph after maximal dyadic subdivision");
    for (const auto& child : dyadic_children<2>(box)) build(child, depth + 1, out, depth_used);
  }

 private:
  int crossings(const Box<2>& box) const {
    std::vector<Vec<2>> pts;
    const Vec<2> c[4] = {box.at(Vec<2>(0, 0)), box.at(Vec<2>(1, 0)), box.at(Vec<2>(1, 1)), box.at(Vec<2>(0, 1))};
    for (int e = 0; e < 4; ++e) {
      const Vec<2>& a = c[e];
      const Vec<2>& b = c[(e + 1) % 4];
      const SegmentRoots sr = segment_roots<2>(level_, a, b, tol_);
      for (double t : sr.roots) pts.push_back(a + t * (b - a));
      if (sr.touches_start) pts.push_back(a);
      if (sr.touches_end) pts.push_back(b);
    }
    const double d = 1e-12 * box.size().maxCoeff();
    std::vector<Vec<2>> uniq;
    for (const auto& p : pts) {
      bool dup = false;
      for (const auto& q : uniq) dup = dup || (p - q).norm() <= d;
      if (!dup) uniq.push_back(p);
    }
    return static_cast<int>(uniq.size());
  }

  double curve_speed(const ColumnPartition& part, const Bound& b, double t) const {
    const int sa = part.s_axis;
    const double s = part.bound(b, t);
    const Vec<2> x = local_point(sa, t, s);
    const Vec<2> g = level_.grad(x);
    const double dsdt = -g[1 - sa] / g[sa];
    return speed_(x, local_point(sa, 1.0, dsdt));
  }

  // arc length of the curved bound from a to t
  double arc(const ColumnPartition& part, const Bound& b, double a, double t) const {
    static const QuadratureRule<1> rule = gauss_legendre<1>(16);
    double s = 0.0;
    for (size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * curve_speed(part, b, a + (t - a) * rule.points[q][0]);
    return s * (t - a);
  }

  std::vector<double> node_params(const ColumnPartition& part, const ColumnPiece& pc, int m) const {
    const int r = opt_.degree;
    std::vector<double> ts(m * r + 1);
    const Bound* curved = pc.lower.level >= 0 ? &pc.lower : (pc.upper.level >= 0 ? &pc.upper : nullptr);
    for (int k = 0; k <= m * r; ++k) ts[k] = pc.t0 + (pc.t1 - pc.t0) * k / (m * r);
    if (!curved || !opt_.arc_length) return ts;
    const double total = arc(part, *curved, pc.t0, pc.t1);
    if (!(total > 0.0)) return ts;
    for (int k = 1; k < m * r; ++k) {
      const double target = total * k / (m * r);
      double t = ts[k];
      for (int it = 0; it < 12; ++it) {
        const double res = arc(part, *curved, pc.t0, t) - target;
        const double step = res / curve_speed(part, *curved, t);
        t = std::clamp(t - step, pc.t0, pc.t1);
        if (std::abs(step) <= 1e-15 * (pc.t1 - pc.t0)) break;
      }
      ts[k] = t;
    }
    return ts;
  }

  double bound_at(const ColumnPartition& part, const Bound& b, double t) const {
    if (b.level < 0) return b.value;
    const int sa = part.s_axis;
    const double s0 = part.box.lo[sa], s1 = part.box.hi[sa];
    double s = part.bound(b, t);
    const double near = 1e-12 * (s1 - s0);
    if (jitter_ && s - s0 > near && s1 - s > near) {
      const Vec<2> x = local_point(sa, t, s);
      s = std::clamp(s + jitter_(x, level_.grad(x)[sa]), s0, s1);
    }
    return s;
  }

  bool emit_piece(const ColumnPartition& part, const ColumnPiece& pc, int m, std::vector<Tile<2>>& out) const {
    const int r = opt_.degree;
    const int sa = part.s_axis;
    const double tolc = 1e-12 * (part.box.hi[sa] - part.box.lo[sa]);
    const std::vector<double> ts = node_params(part, pc, m);
    const int nt = static_cast<int>(ts.size());
    std::vector<double> lo(nt), hi(nt);
    for (int k = 0; k < nt; ++k) {
      lo[k] = bound_at(part, pc.lower, ts[k]);
      hi[k] = bound_at(part, pc.upper, ts[k]);
    }
    std::vector<Tile<2>> made;
    for (int k = 0; k < m; ++k) {
      const int base = k * r;
      const bool c0 = hi[base] - lo[base] <= tolc;
      const bool c1 = hi[base + r] - lo[base + r] <= tolc;
      if (c0 && c1) return false;
      Tile<2> tile;
      tile.degree = r;
      if (!c0 && !c1) {
        tile.kind = TileKind::Quad;
        for (int j = 0; j <= r; ++j)
          for (int i = 0; i <= r; ++i) {
            const int q = base + i;
            tile.nodes.push_back(local_point(sa, ts[q], lo[q] + (static_cast<double>(j) / r) * (hi[q] - lo[q])));
          }
      } else {
        tile.kind = TileKind::Triangle;
        for (const auto& ab : triangle_lattice(r)) {
          const int a = ab[0], b = ab[1], q = a + b;
          const int i = base + (c0 ? q : r - q);
          const double eta = q == 0 ? 0.0 : static_cast<double>(b) / q;
          tile.nodes.push_back(local_point(sa, ts[i], lo[i] + eta * (hi[i] - lo[i])));
        }
      }
      if (pc.lower.level >= 0) tile.boundary_faces.push_back({0, false});
      if (pc.upper.level >= 0) tile.boundary_faces.push_back({2, false});
      fix_orientation(tile);
      orient_faces<2>(tile, level_);
      made.push_back(std::move(tile));
    }
    out.insert(out.end(), made.begin(), made.end());
    return true;
  }

  static void fix_orientation(Tile<2>& tile) {
    const int r = tile.degree;
    if (eval_tile(tile, reference_center<2>(tile.kind)).J.determinant() >= 0.0) return;
    std::vector<Vec<2>> t(tile.nodes.size());
    if (tile.kind == TileKind::Quad) {
      for (int j = 0; j <= r; ++j)
        for (int i = 0; i <= r; ++i) t[i + (r + 1) * j] = tile.nodes[j + (r + 1) * i];
      for (auto& f : tile.boundary_faces) f.id = (f.id == 0) ? 3 : (f.id == 2 ? 1 : f.id);
    } else {
      for (const auto& ab : triangle_lattice(r)) t[triangle_node(r, ab[0], ab[1])] = tile.nodes[triangle_node(r, ab[1], ab[0])];
      for (auto& f : tile.boundary_faces) f.id = (f.id == 0) ? 2 : (f.id == 2 ? 0 : f.id);
    }
    tile.nodes = std::move(t);
  }

  bool make_tiles(const ColumnPartition& part, std::vector<Tile<2>>& out) const {
    for (const auto& pc : part.pieces) {
      if (pc.signs[0] > 0) continue;
      const bool curved = pc.lower.level >= 0 || pc.upper.level >= 0;
      int m = curved ? std::max(opt_.ht_divisions, 1) : 1;
      bool done = false;
      for (int attempt = 0; attempt < 3 && !done; ++attempt, m *= 2) done = emit_piece(part, pc, m, out);
      if (!done) return false;
    }
    return true;
  }

  const Level2& level_;
  SpeedFn speed_;
  Jitter jitter_;
  const ReparamOptions& opt_;
  double eps_, tol_;
};

inline Jitter make_jitter(const ReparamOptions& opt, double diameter) {
  if (!(opt.geo_precision > 1e-13 * diameter)) return {};
  return {opt.geo_precision, opt.seed};
}

// hex tiles covering {level < 0} inside a parametric box, built from column graphs
class SolidBuilder {
 public:
  SolidBuilder(const ParamLevel<3>& level, const ReparamOptions& opt, double eps, double root_tol)
      : level_(level), opt_(opt), eps_(eps), tol_(root_tol), jitter_(make_jitter(opt, level.map().diameter())) {}

  void build(const Box<3>& box, int depth, std::vector<Tile<3>>& out, int& depth_used) const {
    depth_used = std::max(depth_used, depth);
    const Label lab = classify_box(level_, box, opt_.classify, eps_);
    if (lab == Label::Exterior) return;
    if (lab == Label::Interior) {
      out.push_back(affine_hex(box, opt_.degree));
      return;
    }
    const Vec<3> g = level_.grad(box.center());
    std::array<int, 3> axes = {0, 1, 2};
    std::stable_sort(axes.begin(), axes.end(), [&](int a, int b) { return std::abs(g[a]) > std::abs(g[b]); });
    for (int k : axes) {
      if (!monotone(box, k)) continue;
      std::vector<Tile<3>> tiles;
      if (try_axis(box, k, tiles)) {
        out.insert(out.end(), tiles.begin(), tiles.end());
        return;
      }
    }
    if (depth >= opt_.max_depth)
      throw DegenerateTopologyError("reparam: no valid local graph after maximal dyadic subdivision");
    for (const auto& child : dyadic_children<3>(box)) build(child, depth + 1, out, depth_used);
  }

 private:
  bool monotone(const Box<3>& box, int k) const {
    const int n = 5;
    double dmin = 1e300, dmax = -1e300, gmax = 0.0;
    for (int q = 0; q < n * n * n; ++q) {
      const Vec<3> u(static_cast<double>(q % n) / (n - 1), static_cast<double>((q / n) % n) / (n - 1),
                     static_cast<double>(q / (n * n)) / (n - 1));
      const Vec<3> g = level_.grad(box.at(u));
      dmin = std::min(dmin, g[k]);
      dmax = std::max(dmax, g[k]);
      gmax = std::max(gmax, g.norm());
    }
    return !(dmin < -1e-8 * gmax && dmax > 1e-8 * gmax);
  }

  bool try_axis(const Box<3>& box, int k, std::vector<Tile<3>>& out) const {
    const int b0 = k == 0 ? 1 : 0, b1 = k == 2 ? 1 : 2;
    Box<2> base;
    base.lo = Vec<2>(box.lo[b0], box.lo[b1]);
    base.hi = Vec<2>(box.hi[b0], box.hi[b1]);
    auto embed = [=](const Vec<2>& p, double z) {
      Vec<3> x;
      x[b0] = p[0];
      x[b1] = p[1];
      x[k] = z;
      return x;
    };
    const double za = box.lo[k], zb = box.hi[k];
    Level2 floor{[&, za](const Vec<2>& p) { return level_(embed(p, za)); },
                 [&, za](const Vec<2>& p) {
                   const Vec<3> g = level_.grad(embed(p, za));
                   return Vec<2>(g[b0], g[b1]);
                 }};
    Level2 ceil{[&, zb](const Vec<2>& p) { return level_(embed(p, zb)); },
                [&, zb](const Vec<2>& p) {
                  const Vec<3> g = level_.grad(embed(p, zb));
                  return Vec<2>(g[b0], g[b1]);
                }};
    const Vec<3> gc = level_.grad(box.center());
    const int first = std::abs(gc[b1]) >= std::abs(gc[b0]) ? 1 : 0;
    for (int s_axis : {first, 1 - first}) {
      auto part = column_partition(base, s_axis, {&floor, &ceil}, tol_, eps_);
      if (!part) continue;
      std::vector<Tile<3>> tiles;
      bool ok = true;
      for (const auto& pc : part->pieces) {
        if (pc.signs[0] > 0 && pc.signs[1] > 0) continue;
        if (!emit_hex(*part, pc, k, embed, za, zb, tiles)) {
          ok = false;
          break;
        }
      }
      const int npts = opt_.validation_points > 0 ? opt_.validation_points : opt_.degree + 3;
      if (!ok || !tiles_valid<3>(tiles, box, npts)) continue;
      out.insert(out.end(), tiles.begin(), tiles.end());
      return true;
    }
    return false;
  }

  template <class Embed>
  bool emit_hex(const ColumnPartition& part, const ColumnPiece& pc, int k, const Embed& embed, double za, double zb,
                std::vector<Tile<3>>& out) const {
    const int r = opt_.degree, m = r + 1;
    const int sa = part.s_axis;
    // column type: 0 full, 1 [za, g], 2 [g, zb]
    const int type = (pc.signs[0] < 0 && pc.signs[1] < 0) ? 0 : (pc.signs[0] < 0 ? 1 : 2);
    Tile<3> tile{TileKind::Hex, r, std::vector<Vec<3>>(m * m * m), {}};
    const double near = 1e-12 * (zb - za);
    for (int i = 0; i <= r; ++i) {
      const double t = pc.t0 + (pc.t1 - pc.t0) * i / r;
      const double lo = part.bound(pc.lower, t), hi = part.bound(pc.upper, t);
      for (int j = 0; j <= r; ++j) {
        const Vec<2> p = local_point(sa, t, lo + (static_cast<double>(j) / r) * (hi - lo));
        double c0 = za, c1 = zb;
        if (type != 0) {
          auto f = [&](double z) {
            const Vec<3> x = embed(p, z);
            return std::pair<double, double>(level_(x), level_.grad(x)[k]);
          };
          double z = root_on_line(f, za, zb, tol_);
          if (jitter_ && z - za > near && zb - z > near) {
            const Vec<3> x = embed(p, z);
            z = std::clamp(z + jitter_(x, level_.grad(x)[k]), za, zb);
          }
          (type == 1 ? c1 : c0) = z;
        }
        for (int l = 0; l <= r; ++l) tile.nodes[i + m * (j + m * l)] = embed(p, c0 + (static_cast<double>(l) / r) * (c1 - c0));
      }
    }
    if (type == 1) tile.boundary_faces.push_back({1, false});
    if (type == 2) tile.boundary_faces.push_back({0, false});
    if (eval_tile(tile, reference_center<3>(TileKind::Hex)).J.determinant() < 0.0) {
      std::vector<Vec<3>> t(tile.nodes.size());
      for (int l = 0; l <= r; ++l)
        for (int j = 0; j <= r; ++j)
          for (int i = 0; i <= r; ++i) t[i + m * (j + m * l)] = tile.nodes[j + m * (i + m * l)];
      tile.nodes = std::move(t);
    }
    orient_faces<3>(tile, level_);
    out.push_back(std::move(tile));
    return true;
  }

  const ParamLevel<3>& level_;
  const ReparamOptions& opt_;
  double eps_, tol_;
  Jitter jitter_;
};

}  // namespace detail

template <int Dim>
double root_tolerance(const TrimmingBoundary<Dim>& boundary) {
  return 1e-14 * boundary.scale();
}

inline CutElementReparam<2> reparam_cut_element_2d(const Box<2>& box, const MultiIndex<2>& element,
                                                   const TrimmingBoundary<2>& boundary, const GeometryMap<2>& map,
                                                   const ReparamOptions& opt) {
  const ParamLevel<2> pl(map, boundary);
  const double eps = opt.classify.eps_geo >= 0.0 ? opt.classify.eps_geo : default_eps_geo(map);
  if (classify_box(pl, box, opt.classify, eps) != Label::Cut) throw DomainError("reparam: element is not cut");
  const Level2 level{[&](const Vec<2>& x) { return pl(x); }, [&](const Vec<2>& x) { return pl.grad(x); }};
  detail::SpeedFn speed = [&](const Vec<2>& x, const Vec<2>& dx) { return (map.jacobian(x).J * dx).norm(); };
  const detail::PlanarBuilder builder(level, speed, detail::make_jitter(opt, map.diameter()), opt, eps,
                                      root_tolerance(boundary));
  CutElementReparam<2> out;
  out.element = element;
  out.box = box;
  builder.build(box, 0, out.tiles, out.subdivision_depth);
  return out;
}

inline CutElementReparam<3> reparam_cut_element_3d(const Box<3>& box, const MultiIndex<3>& element,
                                                   const TrimmingBoundary<3>& boundary, const GeometryMap<3>& map,
                                                   const ReparamOptions& opt) {
  const ParamLevel<3> pl(map, boundary);
  const double eps = opt.classify.eps_geo >= 0.0 ? opt.classify.eps_geo : default_eps_geo(map);
  if (classify_box(pl, box, opt.classify, eps) != Label::Cut) throw DomainError("reparam: element is not cut");
  const detail::SolidBuilder builder(pl, opt, eps, root_tolerance(boundary));
  CutElementReparam<3> out;
  out.element = element;
  out.box = box;
  builder.build(box, 0, out.tiles, out.subdivision_depth);
  return out;
}

template <int Dim>
CutElementReparam<Dim> reparam_cut_element(const Box<Dim>& box, const MultiIndex<Dim>& element,
                                           const TrimmingBoundary<Dim>& boundary, const GeometryMap<Dim>& map,
                                           const ReparamOptions& opt) {
  if constexpr (Dim == 2) return reparam_cut_element_2d(box, element, boundary, map, opt);
  else return reparam_cut_element_3d(box, element, boundary, map, opt);
}

// tiles (in the face's own two coordinates, ascending axis order) covering the kept
// part of the face x[axis] = box bound of a 3D box
inline std::vector<Tile<2>> reparam_box_face(const ParamLevel<3>& pl, const Box<3>& box, int axis, int side,
                                             const ReparamOptions& opt) {
  const int a0 = axis == 0 ? 1 : 0, a1 = axis == 2 ? 1 : 2;
  const double z = side == 0 ? box.lo[axis] : box.hi[axis];
  auto embed = [=](const Vec<2>& p) {
    Vec<3> x;
    x[a0] = p[0];
    x[a1] = p[1];
    x[axis] = z;
    return x;
  };
  const Level2 level{[&](const Vec<2>& p) { return pl(embed(p)); },
                     [&](const Vec<2>& p) {
                       const Vec<3> g = pl.grad(embed(p));
                       return Vec<2>(g[a0], g[a1]);
                     }};
  detail::SpeedFn speed = [&](const Vec<2>& p, const Vec<2>& dp) {
    Vec<3> d = Vec<3>::Zero();
    d[a0] = dp[0];
    d[a1] = dp[1];
    return (pl.map().jacobian(embed(p)).J * d).norm();
  };
  Box<2> face;
  face.lo = Vec<2>(box.lo[a0], box.lo[a1]);
  face.hi = Vec<2>(box.hi[a0], box.hi[a1]);
  const double eps = opt.classify.eps_geo >= 0.0 ? opt.classify.eps_geo : default_eps_geo(pl.map());
  const detail::PlanarBuilder builder(level, speed, detail::Jitter{}, opt, eps, root_tolerance(pl.boundary()));
  std::vector<Tile<2>> tiles;
  int depth = 0;
  builder.build(face, 0, tiles, depth);
  return tiles;
}

struct ReparamReport {
  double min_detJ = 1e300;
  double max_phi_on_gamma = 0.0;
  bool contained = true;
};

template <int Dim>
ReparamReport validate(const CutElementReparam<Dim>& rp, const TrimmingBoundary<Dim>& boundary,
                       const GeometryMap<Dim>& map, int npts = 0) {
  ReparamReport rep;
  const double slack = 1e-12 * rp.box.size().maxCoeff();
  for (const auto& t : rp.tiles) {
    const QuadratureRule<Dim> ref = reference_rule<Dim>(t.kind, npts > 0 ? npts : t.degree + 3);
    for (const auto& p : ref.points) rep.min_detJ = std::min(rep.min_detJ, eval_tile(t, p).J.determinant());
    for (const auto& x : t.nodes) rep.contained = rep.contained && rp.box.contains(x, slack);
    for (const auto& f : t.boundary_faces)
      for (const auto& x : face_nodes(t, f.id))
        rep.max_phi_on_gamma = std::max(rep.max_phi_on_gamma, std::abs(boundary.phi(map.point(x))));
  }
  return rep;
}

template <int Dim>
std::vector<SurfaceTile<Dim>> boundary_faces(const CutElementReparam<Dim>& rp) {
  std::vector<SurfaceTile<Dim>> out;
  for (const auto& t : rp.tiles)
    for (const auto& f : t.boundary_faces) out.push_back(make_surface(t, f, rp.flat));
  return out;
}

// plain-text dump: one record per tile, nodes in parametric coordinates
template <int Dim>
void write_tiles(std::ostream& os, const std::vector<CutElementReparam<Dim>>& reparams) {
  for (const auto& rp : reparams)
    for (const auto& t : rp.tiles) {
      os << (t.kind == TileKind::Quad ? "quad" : t.kind == TileKind::Triangle ? "triangle" : "hex") << ' ' << rp.flat
         << ' ' << t.degree << ' ' << t.nodes.size();
      for (const auto& x : t.nodes)
        for (int d = 0; d < Dim; ++d) os << ' ' << x[d];
      os << '\n';
    }
}

}  // namespace tiga
