#pragma once

#include "parallel.hpp"
#include "reparam.hpp"

#include <Eigen/Sparse>

#include <map>
#include <optional>
#include <sstream>

namespace tiga {

enum class Pde { Poisson, Elasticity };
enum class BoundaryPart { Trimmed, Untrimmed };

template <int Dim>
struct DirichletCondition {
  int axis = 0;
  int side = 0;  // 0: x[axis] = 0, 1: x[axis] = 1 (parametric)
  int component = 0;
  std::function<double(const Vec<Dim>&)> trace;  // physical coordinates
};

// Poisson: Laplacian(u) = f.  Elasticity: div sigma(u) + f = 0.
// Neumann data receives the physical point and the unit outward normal of the discrete boundary.
template <int Dim>
struct ProblemDefinition {
  Pde pde = Pde::Poisson;
  std::function<Field(const Vec<Dim>&)> source;
  std::function<Field(const Vec<Dim>&, const Vec<Dim>&, BoundaryPart)> neumann;
  std::vector<DirichletCondition<Dim>> dirichlet;
  double E = 1.0;
  double nu = 0.3;
  std::function<double(const Vec<Dim>&)> mean_field;  // set for pure-Neumann problems

  int components() const { return pde == Pde::Poisson ? 1 : Dim; }
  double lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
  double mu() const { return E / (2.0 * (1.0 + nu)); }
};

template <int Dim>
struct Discretization {
  TensorBSplineSpace<Dim> space;
  GeometryMap<Dim> map;
  TrimmingBoundary<Dim> boundary;
  ReparamOptions options;
  BezierMesh<Dim> mesh;
  ElementClassification classification;
  std::vector<CutElementReparam<Dim>> reparams;
  std::vector<int> reparam_of;  // per element, -1 if none
  std::vector<int> active;      // sorted global indices
  std::vector<int> active_of;   // global -> position in active, -1 if inactive

  int degree() const {
    int p = 0;
    for (int d = 0; d < Dim; ++d) p = std::max(p, space.degree(d));
    return p;
  }
};

template <int Dim>
Discretization<Dim> discretize(TensorBSplineSpace<Dim> space, GeometryMap<Dim> map, TrimmingBoundary<Dim> boundary,
                               const ReparamOptions& opt, int threads = 1) {
  Discretization<Dim> d;
  d.space = std::move(space);
  d.map = std::move(map);
  d.boundary = std::move(boundary);
  d.options = opt;
  d.mesh = BezierMesh<Dim>(d.space, d.map);
  d.classification = classify(d.mesh, d.map, d.boundary, opt.classify);

  std::vector<int> cut;
  for (int e = 0; e < d.mesh.num_elements(); ++e)
    if (d.classification.labels[e] == Label::Cut) cut.push_back(e);
  std::vector<CutElementReparam<Dim>> built(cut.size());
  parallel_chunks(static_cast<int>(cut.size()), threads, [&](int b, int e, int) {
    for (int i = b; i < e; ++i) {
      const int el = cut[i];
      built[i] = reparam_cut_element<Dim>(d.mesh.box(el), d.mesh.multi_index(el), d.boundary, d.map, opt);
      built[i].flat = el;
    }
  });
  d.reparam_of.assign(d.mesh.num_elements(), -1);
  for (auto& rp : built) {
    // cut only within the tolerance band and without kept area
    if (rp.tiles.empty()) {
      d.classification.labels[rp.flat] = Label::Exterior;
      continue;
    }
    d.reparam_of[rp.flat] = static_cast<int>(d.reparams.size());
    d.reparams.push_back(std::move(rp));
  }
  d.active = active_index_set(d.space, d.classification);
  d.active_of.assign(d.space.size(), -1);
  for (size_t i = 0; i < d.active.size(); ++i) d.active_of[d.active[i]] = static_cast<int>(i);
  return d;
}

// parametric points with weights carrying tile and geometry Jacobians
template <int Dim>
void element_rule(const Discretization<Dim>& d, int e, const QuadratureRule<Dim>& gauss,
                  const QuadratureRule<Dim>& triangle, QuadratureRule<Dim>& out) {
  out.points.clear();
  out.weights.clear();
  auto push = [&](const Vec<Dim>& x, double w) {
    out.points.push_back(x);
    out.weights.push_back(w * d.map.jacobian(x).det);
  };
  const Label l = d.classification.labels[e];
  if (l == Label::Exterior) return;
  if (l == Label::Interior) {
    const Box<Dim>& b = d.mesh.box(e);
    const double vol = b.measure();
    for (size_t q = 0; q < gauss.size(); ++q) push(b.at(gauss.points[q]), gauss.weights[q] * vol);
    return;
  }
  const int ri = d.reparam_of[e];
  if (ri < 0) throw AssemblyError("assembly: cut element without re-parameterization");
  for (const auto& tile : d.reparams[ri].tiles) {
    const QuadratureRule<Dim> mapped = map_through_tile(tile, tile.kind == TileKind::Triangle ? triangle : gauss);
    for (size_t q = 0; q < mapped.size(); ++q) push(mapped.points[q], mapped.weights[q]);
  }
}

template <int Dim>
struct RuleSet {
  QuadratureRule<Dim> gauss;
  QuadratureRule<Dim> triangle;
  int n;

  explicit RuleSet(int n_) : gauss(gauss_legendre<Dim>(n_)), triangle(reference_rule<Dim>(TileKind::Triangle, n_)), n(n_) {}
};

template <int Dim>
struct FacePoint {
  Vec<Dim> x;       // parametric
  double w;         // physical surface measure
  Vec<Dim> normal;  // physical unit outward normal
};

// points on the kept part of the box face x[axis] = side of element e
template <int Dim>
void untrimmed_face_rule(const Discretization<Dim>& d, int e, int axis, int side, int n, std::vector<FacePoint<Dim>>& out) {
  out.clear();
  const Box<Dim>& b = d.mesh.box(e);
  const Label l = d.classification.labels[e];
  if (l == Label::Exterior) return;
  const double z = side == 0 ? b.lo[axis] : b.hi[axis];
  auto push = [&](const Vec<Dim>& x, double wparam) {
    const Jacobian<Dim> jac = d.map.jacobian(x);
    Vec<Dim> nh = Vec<Dim>::Zero();
    nh[axis] = side == 0 ? -1.0 : 1.0;
    const Vec<Dim> cof = jac.det * jac.J.transpose().inverse() * nh;  // Nanson
    const double m = cof.norm();
    out.push_back({x, wparam * m, cof / m});
  };
  std::vector<double> gx, gw;
  gauss_legendre_1d(n, gx, gw);
  if constexpr (Dim == 2) {
    const int t = 1 - axis;
    std::vector<double> cuts = {0.0, 1.0};
    Vec<2> a, c;
    a[axis] = c[axis] = z;
    a[t] = b.lo[t];
    c[t] = b.hi[t];
    if (l == Label::Cut) {
      const SegmentRoots sr = segment_roots<2>(ParamLevel<2>(d.map, d.boundary), a, c, root_tolerance(d.boundary));
      cuts.insert(cuts.end(), sr.roots.begin(), sr.roots.end());
      std::sort(cuts.begin(), cuts.end());
    }
    const ParamLevel<2> level(d.map, d.boundary);
    for (size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double t0 = cuts[k], t1 = cuts[k + 1];
      if (t1 - t0 <= 0.0) continue;
      if (l == Label::Cut && level(Vec<2>(a + 0.5 * (t0 + t1) * (c - a))) >= 0.0) continue;
      for (int q = 0; q < n; ++q)
        push(Vec<2>(a + (t0 + (t1 - t0) * gx[q]) * (c - a)), gw[q] * (t1 - t0) * (b.hi[t] - b.lo[t]));
    }
  } else {
    const int a0 = axis == 0 ? 1 : 0, a1 = axis == 2 ? 1 : 2;
    auto embed = [&](const Vec<2>& p) {
      Vec<3> x;
      x[a0] = p[0];
      x[a1] = p[1];
      x[axis] = z;
      return x;
    };
    if (l == Label::Interior) {
      const QuadratureRule<2> g = gauss_legendre<2>(n);
      Box<2> f;
      f.lo = Vec<2>(b.lo[a0], b.lo[a1]);
      f.hi = Vec<2>(b.hi[a0], b.hi[a1]);
      for (size_t q = 0; q < g.size(); ++q) push(embed(f.at(g.points[q])), g.weights[q] * f.measure());
      return;
    }
    const ParamLevel<3> level(d.map, d.boundary);
    for (const auto& tile : reparam_box_face(level, b, axis, side, d.options)) {
      const QuadratureRule<2> mapped = tile_rule(tile, n);
      for (size_t q = 0; q < mapped.size(); ++q) push(embed(mapped.points[q]), mapped.weights[q]);
    }
  }
}

struct LinearSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  std::optional<Eigen::VectorXd> constraint;  // c with c.x = target
  double target = 0.0;
  std::map<int, double> dirichlet;  // full dof -> value
  std::vector<int> free_dofs;       // reduced index -> full dof; empty when nothing was eliminated
  int components = 1;
  int num_active = 0;

  int full_size() const { return components * num_active; }

  Eigen::VectorXd expand(const Eigen::VectorXd& x) const {
    if (free_dofs.empty()) return x;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(full_size());
    for (size_t i = 0; i < free_dofs.size(); ++i) full[free_dofs[i]] = x[i];
    for (const auto& [dof, v] : dirichlet) full[dof] = v;
    return full;
  }
};

namespace detail {

template <int Dim>
Mat<Dim> inverse_transpose(const Mat<Dim>& J) {
  return J.inverse().transpose();
}

}  // namespace detail

// Galerkin matrix and load vector over the active functions (function-major layout)
template <int Dim>
LinearSystem assemble(const Discretization<Dim>& d, const ProblemDefinition<Dim>& problem, int quad_boost = 0,
                      int threads = 1) {
  const int k = problem.components();
  const int n = d.degree() + 1 + quad_boost;
  const int ne = d.mesh.num_elements();
  const RuleSet<Dim> rules(n);
  const double lam = problem.lambda(), mu = problem.mu();

  struct Chunk {
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<std::pair<int, double>> load;
  };
  const int nchunks = chunk_count(ne, threads);
  std::vector<Chunk> chunks(nchunks);

  parallel_chunks(ne, threads, [&](int eb, int ee, int c) {
    Chunk& out = chunks[c];
    QuadratureRule<Dim> rule;
    BasisValues<Dim> bv;
    std::vector<Vec<Dim>> grads;
    std::vector<FacePoint<Dim>> face;
    Eigen::MatrixXd Ke;
    Eigen::VectorXd Fe;
    for (int e = eb; e < ee; ++e) {
      if (d.classification.labels[e] == Label::Exterior) continue;
      const MultiIndex<Dim> mi = d.mesh.multi_index(e);
      element_rule(d, e, rules.gauss, rules.triangle, rule);
      const int nl = d.space.local_size();
      Ke.setZero(nl * k, nl * k);
      Fe.setZero(nl * k);
      for (size_t q = 0; q < rule.size(); ++q) {
        const Vec<Dim>& x = rule.points[q];
        const double w = rule.weights[q];
        d.space.eval(mi, x, bv);
        const Mat<Dim> Jit = detail::inverse_transpose<Dim>(d.map.jacobian(x).J);
        grads.resize(nl);
        for (int a = 0; a < nl; ++a) grads[a] = Jit * bv.gradients[a];
        if (problem.pde == Pde::Poisson) {
          for (int a = 0; a < nl; ++a)
            for (int bb = a; bb < nl; ++bb) Ke(a, bb) += w * grads[a].dot(grads[bb]);
        } else {
          for (int a = 0; a < nl; ++a)
            for (int bb = 0; bb < nl; ++bb) {
              const double gg = grads[a].dot(grads[bb]);
              for (int ci = 0; ci < Dim; ++ci)
                for (int di = 0; di < Dim; ++di)
                  Ke(a * k + ci, bb * k + di) += w * (lam * grads[a][ci] * grads[bb][di] + mu * grads[a][di] * grads[bb][ci] +
                                                      (ci == di ? mu * gg : 0.0));
            }
        }
        if (problem.source) {
          const Field f = problem.source(d.map.point(x));
          const double sign = problem.pde == Pde::Poisson ? -1.0 : 1.0;
          for (int a = 0; a < nl; ++a)
            for (int ci = 0; ci < k; ++ci) Fe[a * k + ci] += sign * w * f[ci] * bv.values[a];
        }
      }
      if (problem.pde == Pde::Poisson)
        for (int a = 0; a < nl; ++a)
          for (int bb = 0; bb < a; ++bb) Ke(a, bb) = Ke(bb, a);

      if (problem.neumann) {
        auto add_face = [&](const Vec<Dim>& x, double w, const Vec<Dim>& nrm, BoundaryPart part) {
          d.space.eval(mi, x, bv);
          const Field g = problem.neumann(d.map.point(x), nrm, part);
          for (int a = 0; a < nl; ++a)
            for (int ci = 0; ci < k; ++ci) Fe[a * k + ci] += w * g[ci] * bv.values[a];
        };
        if (d.reparam_of[e] >= 0) {
          for (const auto& sf : boundary_faces(d.reparams[d.reparam_of[e]])) {
            const BoundaryRule<Dim> br = boundary_rule(sf, n, d.map);
            for (size_t q = 0; q < br.size(); ++q) add_face(br.points[q], br.weights[q], br.normals[q], BoundaryPart::Trimmed);
          }
        }
        for (int axis = 0; axis < Dim; ++axis)
          for (int side = 0; side < 2; ++side) {
            if (mi[axis] != (side == 0 ? 0 : d.mesh.counts()[axis] - 1)) continue;
            untrimmed_face_rule(d, e, axis, side, n, face);
            for (const auto& fp : face) add_face(fp.x, fp.w, fp.normal, BoundaryPart::Untrimmed);
          }
      }

      for (int a = 0; a < nl; ++a) {
        const int ia = d.active_of[bv.indices[a]];
        for (int ci = 0; ci < k; ++ci) {
          const int row = ia * k + ci;
          out.load.push_back({row, Fe[a * k + ci]});
          for (int bb = 0; bb < nl; ++bb) {
            const int ib = d.active_of[bv.indices[bb]];
            for (int di = 0; di < k; ++di) {
              const double v = Ke(a * k + ci, bb * k + di);
              if (v != 0.0) out.trip.emplace_back(row, ib * k + di, v);
            }
          }
        }
      }
    }
  });

  LinearSystem sys;
  sys.components = k;
  sys.num_active = static_cast<int>(d.active.size());
  const int N = sys.full_size();
  std::vector<Eigen::Triplet<double>> trip;
  sys.b = Eigen::VectorXd::Zero(N);
  for (auto& c : chunks) {
    trip.insert(trip.end(), c.trip.begin(), c.trip.end());
    for (auto& [i, v] : c.load) sys.b[i] += v;
  }
  sys.A.resize(N, N);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

// c_j = integral of B_j over the discrete domain, target = integral of field with the same rule
template <int Dim>
std::pair<Eigen::VectorXd, double> mean_constraint_row(const Discretization<Dim>& d, int quad_boost,
                                                       const std::function<double(const Vec<Dim>&)>& field) {
  const RuleSet<Dim> rules(d.degree() + 1 + quad_boost);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<int>(d.active.size()));
  double target = 0.0;
  QuadratureRule<Dim> rule;
  BasisValues<Dim> bv;
  for (int e = 0; e < d.mesh.num_elements(); ++e) {
    element_rule(d, e, rules.gauss, rules.triangle, rule);
    const MultiIndex<Dim> mi = d.mesh.multi_index(e);
    for (size_t q = 0; q < rule.size(); ++q) {
      d.space.eval(mi, rule.points[q], bv);
      for (size_t a = 0; a < bv.values.size(); ++a) c[d.active_of[bv.indices[a]]] += rule.weights[q] * bv.values[a];
      if (field) target += rule.weights[q] * field(d.map.point(rule.points[q]));
    }
  }
  return {c, target};
}

inline LinearSystem apply_mean_constraint(LinearSystem sys, const Eigen::VectorXd& c, double target) {
  if (!sys.dirichlet.empty()) throw AssemblyError("mean constraint: redundant together with Dirichlet data");
  if (sys.components != 1) throw AssemblyError("mean constraint: scalar problems only");
  if (c.size() != sys.A.rows()) throw AssemblyError("mean constraint: row size does not match the system");
  sys.constraint = c;
  sys.target = target;
  return sys;
}

// coefficients of the functions on a face interpolating the trace at Greville points
template <int Dim>
std::vector<std::pair<int, double>> face_interpolation(const Discretization<Dim>& d, const DirichletCondition<Dim>& bc) {
  const auto& dims = d.space.dims();
  std::array<int, Dim - 1> dirs{};
  for (int q = 0, j = 0; q < Dim; ++q)
    if (q != bc.axis) dirs[j++] = q;
  MultiIndex<Dim - 1> tdims{};
  for (int j = 0; j < Dim - 1; ++j) tdims[j] = dims[dirs[j]];
  const int m = product<Dim - 1>(tdims);

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    const MultiIndex<Dim - 1> ti = unflatten<Dim - 1>(i, tdims);
    Vec<Dim> x;
    x[bc.axis] = bc.side == 0 ? 0.0 : 1.0;
    for (int j = 0; j < Dim - 1; ++j) x[dirs[j]] = d.space.knots(dirs[j]).greville(ti[j]);
    rhs[i] = bc.trace(d.map.point(x));
    double val[Dim - 1][8], der[Dim - 1][8];
    int first[Dim - 1];
    for (int j = 0; j < Dim - 1; ++j) {
      const KnotVector& kv = d.space.knots(dirs[j]);
      const int el = kv.find_element(x[dirs[j]]);
      kv.eval(el, x[dirs[j]], val[j], der[j]);
      first[j] = kv.first_function(el);
    }
    const int p0 = d.space.degree(dirs[0]) + 1;
    const int p1 = Dim == 3 ? d.space.degree(dirs[Dim - 2]) + 1 : 1;
    for (int b1 = 0; b1 < p1; ++b1)
      for (int b0 = 0; b0 < p0; ++b0) {
        MultiIndex<Dim - 1> tj{};
        tj[0] = first[0] + b0;
        double v = val[0][b0];
        if constexpr (Dim == 3) {
          tj[1] = first[1] + b1;
          v *= val[1][b1];
        }
        C(i, flat_index<Dim - 1>(tj, tdims)) += v;
      }
  }
  const Eigen::VectorXd coef = C.partialPivLu().solve(rhs);
  std::vector<std::pair<int, double>> out;
  for (int i = 0; i < m; ++i) {
    const MultiIndex<Dim - 1> ti = unflatten<Dim - 1>(i, tdims);
    MultiIndex<Dim> gi{};
    gi[bc.axis] = bc.side == 0 ? 0 : dims[bc.axis] - 1;
    for (int j = 0; j < Dim - 1; ++j) gi[dirs[j]] = ti[j];
    out.push_back({flat_index<Dim>(gi, dims), coef[i]});
  }
  return out;
}

// strong Dirichlet data on untrimmed faces by elimination
template <int Dim>
LinearSystem apply_dirichlet(LinearSystem sys, const Discretization<Dim>& d, const ProblemDefinition<Dim>& problem) {
  if (problem.dirichlet.empty()) return sys;
  if (sys.constraint) throw AssemblyError("Dirichlet data: redundant together with the mean constraint");
  const int k = sys.components;
  for (const auto& bc : problem.dirichlet) {
    if (bc.axis < 0 || bc.axis >= Dim || bc.side < 0 || bc.side > 1 || bc.component < 0 || bc.component >= k)
      throw AssemblyError("Dirichlet data: invalid face selector");
    bool touches = false;
    for (int e = 0; e < d.mesh.num_elements() && !touches; ++e) {
      const MultiIndex<Dim> mi = d.mesh.multi_index(e);
      touches = mi[bc.axis] == (bc.side == 0 ? 0 : d.mesh.counts()[bc.axis] - 1) &&
                d.classification.labels[e] != Label::Exterior;
    }
    if (!touches) throw AssemblyError("Dirichlet data: selected face is trimmed away");
    for (const auto& [g, v] : face_interpolation(d, bc)) {
      const int a = d.active_of[g];
      if (a < 0) continue;
      sys.dirichlet.emplace(a * k + bc.component, v);
    }
  }
  const int N = sys.full_size();
  std::vector<int> reduced(N, -1);
  sys.free_dofs.clear();
  for (int i = 0; i < N; ++i)
    if (!sys.dirichlet.count(i)) {
      reduced[i] = static_cast<int>(sys.free_dofs.size());
      sys.free_dofs.push_back(i);
    }
  Eigen::VectorXd xd = Eigen::VectorXd::Zero(N);
  for (const auto& [i, v] : sys.dirichlet) xd[i] = v;
  const Eigen::VectorXd corr = sys.A * xd;
  std::vector<Eigen::Triplet<double>> trip;
  for (int col = 0; col < sys.A.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, col); it; ++it) {
      const int r = reduced[it.row()], c = reduced[it.col()];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  const int nf = static_cast<int>(sys.free_dofs.size());
  Eigen::SparseMatrix<double> Af(nf, nf);
  Af.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd bf(nf);
  for (int i = 0; i < nf; ++i) bf[i] = sys.b[sys.free_dofs[i]] - corr[sys.free_dofs[i]];
  sys.A = std::move(Af);
  sys.b = std::move(bf);
  return sys;
}

}  // namespace tiga
