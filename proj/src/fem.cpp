#include "fembem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "fembem/quadrature.hpp"

namespace fembem {

namespace {

constexpr int kMaxBasis = 8;  // supports degrees up to 7

// 1D basis values and derivatives at the Gauss nodes of every element.
struct Line1D {
  struct Node {
    double x, w;  // parametric position, Gauss weight * element length
    int first;
    double val[kMaxBasis];
    double der[kMaxBasis];
  };
  std::vector<double> lo, hi;
  std::vector<std::vector<Node>> nodes;  // [element][gauss]
};

Line1D tabulate_line(const KnotVector& kv, const QuadratureRule& q) {
  Line1D line;
  const std::vector<double> bp = kv.breakpoints();
  const int nq = static_cast<int>(q.nodes.size());
  for (size_t e = 0; e + 1 < bp.size(); ++e) {
    line.lo.push_back(bp[e]);
    line.hi.push_back(bp[e + 1]);
    std::vector<Line1D::Node> row(nq);
    const double len = bp[e + 1] - bp[e];
    for (int a = 0; a < nq; ++a) {
      row[a].x = bp[e] + len * q.nodes[a];
      row[a].w = len * q.weights[a];
      eval_basis_all_derivs(kv, row[a].x, row[a].first, row[a].val, row[a].der);
    }
    line.nodes.push_back(std::move(row));
  }
  return line;
}

int gauss_order(const DomainDiscretization& d) {
  return d.n_gauss > 0 ? d.n_gauss : d.degree + 2;
}

// Shared element walk: visits every quadrature point of every element of
// every patch with physical point, Jacobian, and tabulated basis lines.
template <class Visit>
void for_each_quad_point(const DomainDiscretization& d, int nq, Visit&& visit) {
  const QuadratureRule q = gauss_legendre_01(nq);
  for (size_t pt = 0; pt < d.geom.patches.size(); ++pt) {
    const SplineSpace2D& s = d.space.patch_spaces[pt];
    const NurbsSurface& surf = d.geom.patches[pt];
    const Line1D lu = tabulate_line(s.knot_u, q);
    const Line1D lv = tabulate_line(s.knot_v, q);
    for (size_t ev = 0; ev < lv.nodes.size(); ++ev)
      for (size_t eu = 0; eu < lu.nodes.size(); ++eu)
        for (const auto& nv : lv.nodes[ev])
          for (const auto& nu : lu.nodes[eu]) {
            Vec2 x;
            Eigen::Matrix2d jac;
            surface_eval(surf, nu.x, nv.x, x, jac);
            const double det = jac.determinant();
            if (det <= 1e-14)
              throw std::runtime_error(
                  "assembly: Jacobian determinant not positive at a quadrature point");
            visit(static_cast<int>(pt), s, nu, nv, x, jac, det);
          }
  }
}

}  // namespace

MaterialModel material_identity() {
  MaterialModel m;
  m.is_linear = true;
  m.g = [](double t) {
    if (t < 0.0) throw std::invalid_argument("material: negative gradient norm");
    return 1.0;
  };
  return m;
}

MaterialModel material_ferromagnetic() {
  const double tc = 1.5 - 0.01;
  // Value and slope of atanh(2t/3)/(100 t) at the cutoff.
  const double gc = std::atanh(2.0 * tc / 3.0) / (100.0 * tc);
  const double dgc = (2.0 / 3.0) / (100.0 * tc * (1.0 - 4.0 * tc * tc / 9.0)) -
                     std::atanh(2.0 * tc / 3.0) / (100.0 * tc * tc);
  const double alpha = dgc / (1.0 - gc);
  const double beta = (gc - 1.0) * std::exp(alpha * tc);
  MaterialModel m;
  m.is_linear = false;
  m.g = [tc, alpha, beta](double t) {
    if (t < 0.0) throw std::invalid_argument("material: negative gradient norm");
    if (t > tc) return 1.0 + beta * std::exp(-alpha * t);
    const double x = 2.0 * t / 3.0;
    // atanh(x)/(150 x) with the series head where x underflows the quotient.
    if (x < 1e-4) return (1.0 + x * x / 3.0) / 150.0;
    return std::atanh(x) / (150.0 * x);
  };
  return m;
}

DomainDiscretization discretize_domain(const MultipatchDomain& geom, int degree,
                                       int level) {
  if (degree < 1 || degree + 1 > kMaxBasis)
    throw std::invalid_argument("discretize_domain: unsupported degree");
  if (level < 0) throw std::invalid_argument("discretize_domain: negative level");
  DomainDiscretization d;
  d.geom = geom;
  d.degree = degree;
  std::vector<SplineSpace2D> spaces;
  const KnotVector base = make_open_knots({0.0, 1.0}, degree);
  for (size_t pt = 0; pt < geom.patches.size(); ++pt)
    spaces.push_back(h_refine(SplineSpace2D{base, base}, level));
  d.space = build_domain_space(std::move(spaces), geom.interfaces,
                               geom.dirichlet_edges);
  return d;
}

Eigen::MatrixXd assemble_stiffness(const DomainDiscretization& d,
                                   const MaterialModel& material,
                                   const Eigen::VectorXd& u_current) {
  const int n = d.space.num_global;
  if (u_current.size() != n)
    throw std::invalid_argument("assemble_stiffness: coefficient size mismatch");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  const int nb = d.degree + 1;
  for_each_quad_point(
      d, gauss_order(d),
      [&](int pt, const SplineSpace2D& s, const Line1D::Node& nu,
          const Line1D::Node& nv, const Vec2&, const Eigen::Matrix2d& jac,
          double det) {
        const Eigen::Matrix2d jinv_t = jac.inverse().transpose();
        int gdof[kMaxBasis * kMaxBasis];
        Vec2 grad[kMaxBasis * kMaxBasis];
        Vec2 grad_u = Vec2::Zero();
        int k = 0;
        for (int j = 0; j < nb; ++j)
          for (int i = 0; i < nb; ++i, ++k) {
            const int loc = s.index(nu.first + i, nv.first + j);
            gdof[k] = d.space.global_index[pt][loc];
            grad[k] = jinv_t *
                      Vec2(nu.der[i] * nv.val[j], nu.val[i] * nv.der[j]);
            grad_u += u_current[gdof[k]] * grad[k];
          }
        const double coef = material.g(grad_u.norm());
        const double w = coef * nu.w * nv.w * det;
        for (int r = 0; r < k; ++r)
          for (int c = 0; c < k; ++c)
            a(gdof[r], gdof[c]) += w * grad[r].dot(grad[c]);
      });
  return a;
}

Eigen::VectorXd assemble_domain_load(const DomainDiscretization& d,
                                     const DomainFn& f) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(d.space.num_global);
  const int nb = d.degree + 1;
  for_each_quad_point(
      d, gauss_order(d),
      [&](int pt, const SplineSpace2D& s, const Line1D::Node& nu,
          const Line1D::Node& nv, const Vec2& x, const Eigen::Matrix2d&,
          double det) {
        const double w = f(x) * nu.w * nv.w * det;
        for (int j = 0; j < nb; ++j)
          for (int i = 0; i < nb; ++i) {
            const int loc = s.index(nu.first + i, nv.first + j);
            load[d.space.global_index[pt][loc]] += w * nu.val[i] * nv.val[j];
          }
      });
  return load;
}

TraceMap trace_map(const DomainDiscretization& d, const BoundaryCurve& arc) {
  const SplineSpace2D& s = d.space.patch_spaces[arc.fem_patch];
  const bool along_u =
      arc.fem_edge == PatchEdge::south || arc.fem_edge == PatchEdge::north;
  const KnotVector& kv = along_u ? s.knot_u : s.knot_v;
  std::vector<int> locals = edge_dof_indices(s, arc.fem_edge);
  TraceMap tm{SplineSpace1D{kv}, {}};
  if (arc.reversed) {
    // Mirror the knots so dof order follows the curve parameter.
    std::vector<double> mirrored(kv.knots().rbegin(), kv.knots().rend());
    for (double& t : mirrored) t = 1.0 - t;
    tm.space_on_curve = SplineSpace1D{KnotVector(mirrored, kv.degree())};
    std::reverse(locals.begin(), locals.end());
  }
  for (int loc : locals)
    tm.global.push_back(d.space.global_index[arc.fem_patch][loc]);
  return tm;
}

namespace {

// Walks the shared elements of one arc: flux and trace grids must agree.
template <class Visit>
void for_each_arc_point(const BoundaryCurve& arc, const SplineSpace1D* flux,
                        const TraceMap& tm, const QuadratureRule& q,
                        Visit&& visit) {
  const std::vector<double> bp = tm.space_on_curve.kv.breakpoints();
  if (flux) {
    const std::vector<double> fbp = flux->kv.breakpoints();
    if (fbp.size() != bp.size())
      throw std::invalid_argument("trace assembly: flux/trace grids differ");
    for (size_t i = 0; i < bp.size(); ++i)
      if (std::abs(fbp[i] - bp[i]) > 1e-12)
        throw std::invalid_argument("trace assembly: flux/trace grids differ");
  }
  for (size_t e = 0; e + 1 < bp.size(); ++e) {
    const double len = bp[e + 1] - bp[e];
    for (size_t a = 0; a < q.nodes.size(); ++a) {
      const double t = bp[e] + len * q.nodes[a];
      Vec2 x, tangent;
      curve_eval(arc.curve, t, x, tangent);
      visit(t, x, len * q.weights[a] * tangent.norm());
    }
  }
}

}  // namespace

Eigen::MatrixXd assemble_trace_mass(const std::vector<BoundaryCurve>& gamma,
                                    const BoundarySpace& flux_space,
                                    const std::vector<TraceMap>& traces,
                                    int n_domain_dofs, int n_gauss) {
  if (gamma.size() != traces.size() ||
      gamma.size() != flux_space.patch_spaces.size())
    throw std::invalid_argument("assemble_trace_mass: arc count mismatch");
  Eigen::MatrixXd t_mat =
      Eigen::MatrixXd::Zero(flux_space.total_dimension, n_domain_dofs);
  const QuadratureRule q = gauss_legendre_01(n_gauss);
  for (size_t c = 0; c < gamma.size(); ++c) {
    const SplineSpace1D& flux = flux_space.patch_spaces[c];
    const TraceMap& tm = traces[c];
    for_each_arc_point(
        gamma[c], &flux, tm, q, [&](double t, const Vec2&, double w) {
          int ffirst, tfirst;
          double fval[kMaxBasis], tval[kMaxBasis];
          eval_basis_all(flux.kv, t, ffirst, fval);
          eval_basis_all(tm.space_on_curve.kv, t, tfirst, tval);
          for (int j = 0; j <= flux.kv.degree(); ++j) {
            const int row = flux_space.global_of(static_cast<int>(c), ffirst + j);
            for (int i = 0; i <= tm.space_on_curve.kv.degree(); ++i)
              t_mat(row, tm.global[tfirst + i]) += w * fval[j] * tval[i];
          }
        });
  }
  return t_mat;
}

Eigen::VectorXd assemble_trace_load(const std::vector<BoundaryCurve>& gamma,
                                    const std::vector<TraceMap>& traces,
                                    int n_domain_dofs, const DomainFn& phi0,
                                    int n_gauss) {
  if (gamma.size() != traces.size())
    throw std::invalid_argument("assemble_trace_load: arc count mismatch");
  Eigen::VectorXd load = Eigen::VectorXd::Zero(n_domain_dofs);
  const QuadratureRule q = gauss_legendre_01(n_gauss);
  for (size_t c = 0; c < gamma.size(); ++c) {
    const TraceMap& tm = traces[c];
    for_each_arc_point(gamma[c], nullptr, tm, q,
                       [&](double t, const Vec2& x, double w) {
                         int tfirst;
                         double tval[kMaxBasis];
                         eval_basis_all(tm.space_on_curve.kv, t, tfirst, tval);
                         const double fw = phi0(x) * w;
                         for (int i = 0; i <= tm.space_on_curve.kv.degree(); ++i)
                           load[tm.global[tfirst + i]] += fw * tval[i];
                       });
  }
  return load;
}

Eigen::MatrixXd restrict_matrix(const DomainSpace& s, const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out(s.num_free, s.num_free);
  for (int i = 0; i < s.num_global; ++i) {
    if (s.free_index[i] < 0) continue;
    for (int j = 0; j < s.num_global; ++j)
      if (s.free_index[j] >= 0) out(s.free_index[i], s.free_index[j]) = a(i, j);
  }
  return out;
}

Eigen::MatrixXd restrict_cols(const DomainSpace& s, const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out(a.rows(), s.num_free);
  for (int j = 0; j < s.num_global; ++j)
    if (s.free_index[j] >= 0) out.col(s.free_index[j]) = a.col(j);
  return out;
}

Eigen::VectorXd restrict_vector(const DomainSpace& s, const Eigen::VectorXd& v) {
  Eigen::VectorXd out(s.num_free);
  for (int i = 0; i < s.num_global; ++i)
    if (s.free_index[i] >= 0) out[s.free_index[i]] = v[i];
  return out;
}

Eigen::VectorXd expand_free(const DomainSpace& s, const Eigen::VectorXd& v_free) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s.num_global);
  for (int i = 0; i < s.num_global; ++i)
    if (s.free_index[i] >= 0) out[i] = v_free[s.free_index[i]];
  return out;
}

MaterialConstants sample_material_constants(const MaterialModel& material,
                                            double ball_radius, int n_pairs,
                                            unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-ball_radius, ball_radius);
  MaterialConstants cs;
  cs.monotonicity = std::numeric_limits<double>::infinity();
  int done = 0;
  while (done < n_pairs) {
    const Vec2 x(unif(rng), unif(rng)), y(unif(rng), unif(rng));
    if (x.norm() > ball_radius || y.norm() > ball_radius) continue;
    const double d = (x - y).norm();
    if (d < 1e-10) continue;
    const Vec2 ux = material.g(x.norm()) * x, uy = material.g(y.norm()) * y;
    cs.lipschitz = std::max(cs.lipschitz, (ux - uy).norm() / d);
    cs.monotonicity = std::min(cs.monotonicity, (ux - uy).dot(x - y) / (d * d));
    ++done;
  }
  return cs;
}

}  // namespace fembem
