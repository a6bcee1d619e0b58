#include "fembem/bem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace fembem {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxBasis = 8;  // degree cap for the fixed-size eval buffers
}  // namespace

double kernel_G(const Vec2& x, const Vec2& y) {
  const double r2 = (x - y).squaredNorm();
  if (r2 == 0.0) throw std::domain_error("kernel evaluated at coincident points");
  return -std::log(r2) / (2.0 * kTwoPi);
}

double kernel_dG_dny(const Vec2& x, const Vec2& y, const Vec2& ny) {
  const Vec2 d = x - y;
  const double r2 = d.squaredNorm();
  if (r2 == 0.0) throw std::domain_error("kernel evaluated at coincident points");
  return d.dot(ny) / (kTwoPi * r2);
}

std::vector<int> bem_row_offsets(const std::vector<BemCurve>& curves) {
  std::vector<int> off(curves.size() + 1, 0);
  for (std::size_t c = 0; c < curves.size(); ++c)
    off[c + 1] = off[c] + curves[c].space.dimension();
  return off;
}

namespace {

// What the columns of the pair integral run over: the trace basis of the
// y-side curve, or a single scalar factor f(y) (for right-hand sides).
enum class YMode { trace, function };

// Per-element cache at the shared Gauss nodes. jacw folds the Gauss weight
// into the element Jacobian; yv holds either trace basis values (node-major
// blocks of y_count) or the single cached f value per node.
struct Elem {
  double lo = 0, hi = 0;
  Vec2 sample[3];
  double length = 0;
  int bem_first = 0, tr_first = 0;
  std::vector<Vec2> pt, nrm;
  std::vector<double> jacw;
  std::vector<double> bem;
  std::vector<double> yv;
};

struct CurveCtx {
  const BemCurve* c = nullptr;
  const BoundaryFn* f = nullptr;  // y-side data in function mode
  int row0 = 0;
  int pb = 0;       // bem space degree
  int y_count = 0;  // y-side values per node (0 when unused)
  std::vector<Elem> elems;
};

struct FreshEval {
  Vec2 x, n;
  double jac_global = 0;  // |r'(xi)|
  int bem_first = 0, tr_first = 0;
  double bem[kMaxBasis], yv[kMaxBasis];
};

void fresh_eval(const CurveCtx& ctx, double xi, bool want_bem, YMode mode, bool want_y,
                FreshEval& out) {
  Vec2 tan;
  curve_eval(ctx.c->geom.curve, xi, out.x, tan);
  const double len = tan.norm();
  out.jac_global = len;
  out.n = ctx.c->geom.normal_sign * Vec2(tan.y() / len, -tan.x() / len);
  if (want_bem) eval_basis_all(ctx.c->space.kv, xi, out.bem_first, out.bem);
  if (want_y) {
    if (mode == YMode::trace)
      eval_basis_all(ctx.c->trace_space.kv, xi, out.tr_first, out.yv);
    else {
      out.tr_first = 0;
      out.yv[0] = (*ctx.f)(out.x);
    }
  }
}

std::vector<CurveCtx> build_contexts(const std::vector<BemCurve>& curves, const QuadratureRule& q,
                                     bool want_y, YMode mode,
                                     const std::vector<BoundaryFn>* fns) {
  if (mode == YMode::function && want_y &&
      (!fns || fns->size() != curves.size()))
    throw std::invalid_argument("one boundary function per curve required");
  const std::vector<int> off = bem_row_offsets(curves);
  std::vector<CurveCtx> ctxs(curves.size());
  for (std::size_t c = 0; c < curves.size(); ++c) {
    CurveCtx& ctx = ctxs[c];
    ctx.c = &curves[c];
    if (fns) ctx.f = &(*fns)[c];
    ctx.row0 = off[c];
    ctx.pb = curves[c].space.kv.degree();
    if (ctx.pb + 1 > kMaxBasis) throw std::invalid_argument("boundary degree too large");
    const auto breaks = curves[c].space.kv.breakpoints();
    if (want_y && mode == YMode::trace) {
      ctx.y_count = curves[c].trace_space.kv.degree() + 1;
      if (ctx.y_count > kMaxBasis) throw std::invalid_argument("trace degree too large");
      const auto tb = curves[c].trace_space.kv.breakpoints();
      if (tb.size() != breaks.size())
        throw std::invalid_argument("trace and density spaces disagree on the element grid");
      for (std::size_t i = 0; i < tb.size(); ++i)
        if (std::abs(tb[i] - breaks[i]) > 1e-12)
          throw std::invalid_argument("trace and density spaces disagree on the element grid");
    } else if (want_y) {
      ctx.y_count = 1;
    }
    const int nq = static_cast<int>(q.nodes.size());
    for (std::size_t e = 0; e + 1 < breaks.size(); ++e) {
      Elem el;
      el.lo = breaks[e];
      el.hi = breaks[e + 1];
      el.pt.resize(nq);
      el.nrm.resize(nq);
      el.jacw.resize(nq);
      el.bem.resize(nq * (ctx.pb + 1));
      if (ctx.y_count > 0) el.yv.resize(nq * ctx.y_count);
      FreshEval fe;
      for (int i = 0; i < nq; ++i) {
        const double xi = el.lo + q.nodes[i] * (el.hi - el.lo);
        fresh_eval(ctx, xi, true, mode, ctx.y_count > 0, fe);
        el.pt[i] = fe.x;
        el.nrm[i] = fe.n;
        el.jacw[i] = q.weights[i] * (el.hi - el.lo) * fe.jac_global;
        el.length += el.jacw[i];
        if (i == 0) {
          el.bem_first = fe.bem_first;
          el.tr_first = fe.tr_first;
        }
        for (int k = 0; k <= ctx.pb; ++k) el.bem[i * (ctx.pb + 1) + k] = fe.bem[k];
        for (int k = 0; k < ctx.y_count; ++k) el.yv[i * ctx.y_count + k] = fe.yv[k];
      }
      el.sample[0] = map_point(curves[c].geom.curve, el.lo);
      el.sample[1] = map_point(curves[c].geom.curve, 0.5 * (el.lo + el.hi));
      el.sample[2] = map_point(curves[c].geom.curve, el.hi);
      ctx.elems.push_back(std::move(el));
    }
  }
  return ctxs;
}

struct PairKind {
  PairClass cls = PairClass::disjoint;
  bool vertex_at_hi_x = false, vertex_at_hi_y = false;
  double dist = 0.0;
};

PairKind classify(const CurveCtx& cx, std::size_t ix, const CurveCtx& cy, std::size_t iy) {
  PairKind k;
  if (&cx == &cy && ix == iy) {
    k.cls = PairClass::coincident;
    return k;
  }
  const Elem& ex = cx.elems[ix];
  const Elem& ey = cy.elems[iy];
  const double tol = 1e-9;
  if ((ex.sample[2] - ey.sample[0]).norm() < tol) {
    k.cls = PairClass::adjacent;
    k.vertex_at_hi_x = true;
    return k;
  }
  if ((ex.sample[0] - ey.sample[2]).norm() < tol) {
    k.cls = PairClass::adjacent;
    k.vertex_at_hi_y = true;
    return k;
  }
  if ((ex.sample[0] - ey.sample[0]).norm() < tol) {
    k.cls = PairClass::adjacent;
    return k;
  }
  if ((ex.sample[2] - ey.sample[2]).norm() < tol) {
    k.cls = PairClass::adjacent;
    k.vertex_at_hi_x = k.vertex_at_hi_y = true;
    return k;
  }
  double d = (ex.sample[0] - ey.sample[0]).norm();
  for (const Vec2& a : ex.sample)
    for (const Vec2& b : ey.sample) d = std::min(d, (a - b).norm());
  k.dist = d;
  return k;
}

double min_dist_to_samples(const NurbsCurve& curve, double a, double b, const Elem& other) {
  double d = std::numeric_limits<double>::infinity();
  for (double t : {a, 0.5 * (a + b), b}) {
    const Vec2 p = map_point(curve, t);
    for (const Vec2& s : other.sample) d = std::min(d, (p - s).norm());
  }
  return d;
}

// ---------------------------------------------------------------- V engine

void v_singular_block(const PairRule& rule, const CurveCtx& cx, const Elem& ex,
                      const CurveCtx& cy, const Elem& ey, bool hi_x, bool hi_y,
                      Eigen::MatrixXd& out) {
  out.setZero(cx.pb + 1, cy.pb + 1);
  FreshEval fx, fy;
  auto accumulate = [&](const PairNode& nd, bool with_kernel) {
    const double sx = hi_x ? 1.0 - nd.s : nd.s;
    const double ty = hi_y ? 1.0 - nd.t : nd.t;
    fresh_eval(cx, ex.lo + sx * (ex.hi - ex.lo), true, YMode::trace, false, fx);
    fresh_eval(cy, ey.lo + ty * (ey.hi - ey.lo), true, YMode::trace, false, fy);
    const double jac = (ex.hi - ex.lo) * fx.jac_global * (ey.hi - ey.lo) * fy.jac_global;
    // Log family: coefficient of -log(delta) only. Smooth family: the full
    // integrand plus the removed logarithm, i.e. the smooth remainder.
    const double factor =
        with_kernel ? nd.w * jac * (kernel_G(fx.x, fy.x) + std::log(nd.delta) / kTwoPi)
                    : nd.w * jac / kTwoPi;
    for (int i = 0; i <= cx.pb; ++i)
      for (int j = 0; j <= cy.pb; ++j) out(i, j) += factor * fx.bem[i] * fy.bem[j];
  };
  for (const PairNode& nd : rule.log_nodes) accumulate(nd, false);
  for (const PairNode& nd : rule.smooth_nodes) accumulate(nd, true);
}

void v_tensor_block(const CurveCtx& cx, const Elem& ex, const CurveCtx& cy, const Elem& ey,
                    Eigen::MatrixXd& out) {
  out.setZero(cx.pb + 1, cy.pb + 1);
  const std::size_t nx = ex.pt.size(), ny = ey.pt.size();
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const double g = kernel_G(ex.pt[i], ey.pt[j]) * ex.jacw[i] * ey.jacw[j];
      for (int a = 0; a <= cx.pb; ++a)
        for (int b = 0; b <= cy.pb; ++b)
          out(a, b) += g * ex.bem[i * (cx.pb + 1) + a] * ey.bem[j * (cy.pb + 1) + b];
    }
}

void v_graded_block(const QuadratureRule& q, const QuadConfig& cfg, const CurveCtx& cx,
                    const Elem& ex, const CurveCtx& cy, const Elem& ey, double dist,
                    Eigen::MatrixXd& out) {
  out.setZero(cx.pb + 1, cy.pb + 1);
  // Subdivide the larger element until each piece is separated by at least
  // its own size; the whole partner element is integrated with the cached
  // tensor nodes.
  const bool split_x = ex.length >= ey.length;
  const CurveCtx& cs = split_x ? cx : cy;
  const Elem& es = split_x ? ex : ey;
  const CurveCtx& co = split_x ? cy : cx;
  const Elem& eo = split_x ? ey : ex;
  std::vector<std::pair<double, double>> pieces;
  const double len_per_param = es.length / (es.hi - es.lo);
  graded_subdivide(es.lo, es.hi, cfg.near_depth,
                   [&](double a, double b) {
                     const double plen = (b - a) * len_per_param;
                     return min_dist_to_samples(cs.c->geom.curve, a, b, eo) < plen;
                   },
                   pieces);
  (void)dist;
  FreshEval fs;
  for (const auto& [a, b] : pieces) {
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      const double xi = a + q.nodes[i] * (b - a);
      fresh_eval(cs, xi, true, YMode::trace, false, fs);
      const double ws = q.weights[i] * (b - a) * fs.jac_global;
      for (std::size_t j = 0; j < eo.pt.size(); ++j) {
        const double g = kernel_G(fs.x, eo.pt[j]) * ws * eo.jacw[j];
        for (int s = 0; s <= cs.pb; ++s)
          for (int o = 0; o <= co.pb; ++o) {
            const double val = g * fs.bem[s] * eo.bem[j * (co.pb + 1) + o];
            if (split_x)
              out(s, o) += val;
            else
              out(o, s) += val;
          }
      }
    }
  }
}

void warn_if_large_diameter(const std::vector<CurveCtx>& ctxs) {
  double diam = 0.0;
  std::vector<Vec2> pts;
  for (const auto& c : ctxs)
    for (const auto& e : c.elems) pts.insert(pts.end(), {e.sample[0], e.sample[1], e.sample[2]});
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      diam = std::max(diam, (pts[i] - pts[j]).norm());
  if (diam >= 1.0)
    std::fprintf(stderr,
                 "warning: boundary diameter %.3f >= 1, single-layer operator may lose "
                 "definiteness\n",
                 diam);
}

}  // namespace

Eigen::MatrixXd assemble_V(const std::vector<BemCurve>& curves, const QuadConfig& cfg) {
  const QuadratureRule q = gauss_legendre_01(cfg.n_gauss);
  const std::vector<CurveCtx> ctxs = build_contexts(curves, q, false, YMode::trace, nullptr);
  warn_if_large_diameter(ctxs);
  const std::vector<int> off = bem_row_offsets(curves);
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(off.back(), off.back());
  const PairRule co_rule = singular_pair_rule(PairClass::coincident, cfg.n_gauss);
  const PairRule ad_rule = singular_pair_rule(PairClass::adjacent, cfg.n_gauss);
  Eigen::MatrixXd block;
  for (std::size_t a = 0; a < ctxs.size(); ++a)
    for (std::size_t b = a; b < ctxs.size(); ++b)
      for (std::size_t ea = 0; ea < ctxs[a].elems.size(); ++ea) {
        const std::size_t eb0 = (a == b) ? ea : 0;
        for (std::size_t eb = eb0; eb < ctxs[b].elems.size(); ++eb) {
          const PairKind kind = classify(ctxs[a], ea, ctxs[b], eb);
          const Elem& ex = ctxs[a].elems[ea];
          const Elem& ey = ctxs[b].elems[eb];
          if (kind.cls == PairClass::coincident) {
            v_singular_block(co_rule, ctxs[a], ex, ctxs[b], ey, false, false, block);
          } else if (kind.cls == PairClass::adjacent) {
            v_singular_block(ad_rule, ctxs[a], ex, ctxs[b], ey, kind.vertex_at_hi_x,
                             kind.vertex_at_hi_y, block);
          } else if (kind.dist >= std::max(ex.length, ey.length)) {
            v_tensor_block(ctxs[a], ex, ctxs[b], ey, block);
          } else {
            v_graded_block(q, cfg, ctxs[a], ex, ctxs[b], ey, kind.dist, block);
          }
          const int rx = ctxs[a].row0 + ex.bem_first;
          const int ry = ctxs[b].row0 + ey.bem_first;
          V.block(rx, ry, block.rows(), block.cols()) += block;
          if (a != b || ea != eb)
            V.block(ry, rx, block.cols(), block.rows()) += block.transpose();
        }
      }
  return V;
}

namespace {

// ---------------------------------------------------------------- K engine

void k_singular_block(const PairRule& rule, const CurveCtx& cx, const Elem& ex,
                      const CurveCtx& cy, const Elem& ey, bool hi_x, bool hi_y, YMode mode,
                      Eigen::MatrixXd& out) {
  // The double-layer kernel is bounded on smooth arcs and only weakly
  // singular at corners; the Duffy-type smooth family integrates both, so
  // the log family is unused here.
  out.setZero(cx.pb + 1, cy.y_count);
  FreshEval fx, fy;
  for (const PairNode& nd : rule.smooth_nodes) {
    const double sx = hi_x ? 1.0 - nd.s : nd.s;
    const double ty = hi_y ? 1.0 - nd.t : nd.t;
    fresh_eval(cx, ex.lo + sx * (ex.hi - ex.lo), true, mode, false, fx);
    fresh_eval(cy, ey.lo + ty * (ey.hi - ey.lo), false, mode, true, fy);
    const double jac = (ex.hi - ex.lo) * fx.jac_global * (ey.hi - ey.lo) * fy.jac_global;
    const double factor = nd.w * jac * kernel_dG_dny(fx.x, fy.x, fy.n);
    for (int i = 0; i <= cx.pb; ++i)
      for (int j = 0; j < cy.y_count; ++j) out(i, j) += factor * fx.bem[i] * fy.yv[j];
  }
}

void k_tensor_block(const CurveCtx& cx, const Elem& ex, const CurveCtx& cy, const Elem& ey,
                    Eigen::MatrixXd& out) {
  out.setZero(cx.pb + 1, cy.y_count);
  for (std::size_t i = 0; i < ex.pt.size(); ++i)
    for (std::size_t j = 0; j < ey.pt.size(); ++j) {
      const double g =
          kernel_dG_dny(ex.pt[i], ey.pt[j], ey.nrm[j]) * ex.jacw[i] * ey.jacw[j];
      for (int a = 0; a <= cx.pb; ++a)
        for (int b = 0; b < cy.y_count; ++b)
          out(a, b) += g * ex.bem[i * (cx.pb + 1) + a] * ey.yv[j * cy.y_count + b];
    }
}

void k_graded_block(const QuadratureRule& q, const QuadConfig& cfg, const CurveCtx& cx,
                    const Elem& ex, const CurveCtx& cy, const Elem& ey, YMode mode,
                    Eigen::MatrixXd& out) {
  out.setZero(cx.pb + 1, cy.y_count);
  const bool split_x = ex.length >= ey.length;
  const CurveCtx& cs = split_x ? cx : cy;
  const Elem& es = split_x ? ex : ey;
  const Elem& eo = split_x ? ey : ex;
  const CurveCtx& cother = split_x ? cy : cx;
  std::vector<std::pair<double, double>> pieces;
  const double len_per_param = es.length / (es.hi - es.lo);
  graded_subdivide(es.lo, es.hi, cfg.near_depth,
                   [&](double a, double b) {
                     const double plen = (b - a) * len_per_param;
                     return min_dist_to_samples(cs.c->geom.curve, a, b, eo) < plen;
                   },
                   pieces);
  FreshEval fs;
  for (const auto& [a, b] : pieces)
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      const double xi = a + q.nodes[i] * (b - a);
      fresh_eval(cs, xi, split_x, mode, !split_x, fs);
      const double ws = q.weights[i] * (b - a) * fs.jac_global;
      for (std::size_t j = 0; j < eo.pt.size(); ++j) {
        if (split_x) {
          // x side subdivided: kernel normal comes from the cached y nodes.
          const double g = kernel_dG_dny(fs.x, eo.pt[j], eo.nrm[j]) * ws * eo.jacw[j];
          for (int s = 0; s <= cx.pb; ++s)
            for (int o = 0; o < cy.y_count; ++o)
              out(s, o) += g * fs.bem[s] * eo.yv[j * cy.y_count + o];
        } else {
          const double g = kernel_dG_dny(eo.pt[j], fs.x, fs.n) * ws * eo.jacw[j];
          for (int o = 0; o <= cx.pb; ++o)
            for (int s = 0; s < cy.y_count; ++s)
              out(o, s) += g * eo.bem[j * (cother.pb + 1) + o] * fs.yv[s];
        }
      }
    }
}

Eigen::MatrixXd k_engine(const std::vector<BemCurve>& curves, int n_cols, const QuadConfig& cfg,
                         YMode mode, const std::vector<BoundaryFn>* fns) {
  const QuadratureRule q = gauss_legendre_01(cfg.n_gauss);
  const std::vector<CurveCtx> ctxs = build_contexts(curves, q, true, mode, fns);
  const std::vector<int> off = bem_row_offsets(curves);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(off.back(), n_cols);
  const PairRule co_rule = singular_pair_rule(PairClass::coincident, cfg.n_gauss);
  const PairRule ad_rule = singular_pair_rule(PairClass::adjacent, cfg.n_gauss);
  Eigen::MatrixXd block;
  for (std::size_t a = 0; a < ctxs.size(); ++a)
    for (std::size_t ea = 0; ea < ctxs[a].elems.size(); ++ea)
      for (std::size_t b = 0; b < ctxs.size(); ++b)
        for (std::size_t eb = 0; eb < ctxs[b].elems.size(); ++eb) {
          const PairKind kind = classify(ctxs[a], ea, ctxs[b], eb);
          const Elem& ex = ctxs[a].elems[ea];
          const Elem& ey = ctxs[b].elems[eb];
          if (kind.cls == PairClass::coincident)
            k_singular_block(co_rule, ctxs[a], ex, ctxs[b], ey, false, false, mode, block);
          else if (kind.cls == PairClass::adjacent)
            k_singular_block(ad_rule, ctxs[a], ex, ctxs[b], ey, kind.vertex_at_hi_x,
                             kind.vertex_at_hi_y, mode, block);
          else if (kind.dist >= std::max(ex.length, ey.length))
            k_tensor_block(ctxs[a], ex, ctxs[b], ey, block);
          else
            k_graded_block(q, cfg, ctxs[a], ex, ctxs[b], ey, mode, block);
          const int rx = ctxs[a].row0 + ex.bem_first;
          for (int i = 0; i <= ctxs[a].pb; ++i)
            for (int j = 0; j < ctxs[b].y_count; ++j) {
              const int col = (mode == YMode::trace)
                                  ? ctxs[b].c->trace_cols[ey.tr_first + j]
                                  : 0;
              if (col >= 0) K(rx + i, col) += block(i, j);
            }
        }
  return K;
}

}  // namespace

Eigen::MatrixXd assemble_K(const std::vector<BemCurve>& curves, int n_cols,
                           const QuadConfig& cfg) {
  return k_engine(curves, n_cols, cfg, YMode::trace, nullptr);
}

Eigen::VectorXd apply_K_to_function(const std::vector<BemCurve>& curves, const BoundaryFn& f,
                                    const QuadConfig& cfg) {
  const std::vector<BoundaryFn> fns(curves.size(), f);
  return k_engine(curves, 1, cfg, YMode::function, &fns).col(0);
}

Eigen::VectorXd apply_K_to_function(const std::vector<BemCurve>& curves,
                                    const std::vector<BoundaryFn>& per_curve,
                                    const QuadConfig& cfg) {
  return k_engine(curves, 1, cfg, YMode::function, &per_curve).col(0);
}

Eigen::MatrixXd assemble_M(const std::vector<BemCurve>& curves, int n_cols,
                           const QuadConfig& cfg) {
  const QuadratureRule q = gauss_legendre_01(cfg.n_gauss);
  const std::vector<CurveCtx> ctxs = build_contexts(curves, q, true, YMode::trace, nullptr);
  const std::vector<int> off = bem_row_offsets(curves);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(off.back(), n_cols);
  for (const CurveCtx& ctx : ctxs)
    for (const Elem& e : ctx.elems)
      for (std::size_t i = 0; i < e.pt.size(); ++i)
        for (int a = 0; a <= ctx.pb; ++a)
          for (int j = 0; j < ctx.y_count; ++j) {
            const int col = ctx.c->trace_cols[e.tr_first + j];
            if (col >= 0)
              M(ctx.row0 + e.bem_first + a, col) +=
                  e.jacw[i] * e.bem[i * (ctx.pb + 1) + a] * e.yv[i * ctx.y_count + j];
          }
  return M;
}

Eigen::VectorXd apply_M_to_function(const std::vector<BemCurve>& curves,
                                    const std::vector<BoundaryFn>& per_curve,
                                    const QuadConfig& cfg) {
  const QuadratureRule q = gauss_legendre_01(cfg.n_gauss);
  const std::vector<CurveCtx> ctxs =
      build_contexts(curves, q, true, YMode::function, &per_curve);
  const std::vector<int> off = bem_row_offsets(curves);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(off.back());
  for (const CurveCtx& ctx : ctxs)
    for (const Elem& e : ctx.elems)
      for (std::size_t i = 0; i < e.pt.size(); ++i)
        for (int a = 0; a <= ctx.pb; ++a)
          out(ctx.row0 + e.bem_first + a) += e.jacw[i] * e.bem[i * (ctx.pb + 1) + a] * e.yv[i];
  return out;
}

Eigen::VectorXd apply_M_to_function(const std::vector<BemCurve>& curves, const BoundaryFn& f,
                                    const QuadConfig& cfg) {
  const std::vector<BoundaryFn> fns(curves.size(), f);
  return apply_M_to_function(curves, fns, cfg);
}

double v_norm_sq(const Eigen::VectorXd& psi, const Eigen::MatrixXd& V) {
  if (psi.size() != V.rows()) throw std::invalid_argument("density/matrix size mismatch");
  const double val = psi.dot(V * psi);
  if (val < -1e-12)
    throw std::runtime_error("single-layer quadratic form is negative: definiteness violated");
  return std::max(val, 0.0);
}

}  // namespace fembem
