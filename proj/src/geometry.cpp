#include "fembem/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fembem {

namespace {

// Rational evaluation helpers. Basis values come from the compact
// (p+1)-support evaluators, so cost per point is O(p^2), not O(dim).

void curve_point_and_tangent(const NurbsCurve& c, double t, Vec2* point, Vec2* tangent) {
  const int p = c.space.kv.degree();
  std::vector<double> vals(p + 1), ders(p + 1);
  int first = 0;
  eval_basis_all_derivs(c.space.kv, t, first, vals.data(), ders.data());
  Vec2 num = Vec2::Zero(), dnum = Vec2::Zero();
  double den = 0.0, dden = 0.0;
  for (int k = 0; k <= p; ++k) {
    const int i = first + k;
    const double wv = c.weight[i] * vals[k];
    const double wd = c.weight[i] * ders[k];
    num += wv * c.control[i];
    den += wv;
    dnum += wd * c.control[i];
    dden += wd;
  }
  if (point) *point = num / den;
  if (tangent) *tangent = (dnum * den - num * dden) / (den * den);
}

void surface_point_and_jacobian(const NurbsSurface& s, double u, double v, Vec2* point,
                                Eigen::Matrix2d* jac) {
  const int pu = s.space.knot_u.degree(), pv = s.space.knot_v.degree();
  std::vector<double> bu(pu + 1), du(pu + 1), bv(pv + 1), dv(pv + 1);
  int fu = 0, fv = 0;
  eval_basis_all_derivs(s.space.knot_u, u, fu, bu.data(), du.data());
  eval_basis_all_derivs(s.space.knot_v, v, fv, bv.data(), dv.data());
  Vec2 num = Vec2::Zero(), num_u = Vec2::Zero(), num_v = Vec2::Zero();
  double den = 0.0, den_u = 0.0, den_v = 0.0;
  for (int kv = 0; kv <= pv; ++kv) {
    for (int ku = 0; ku <= pu; ++ku) {
      const int i = (fv + kv) * s.space.dim_u() + (fu + ku);
      const double w = s.weight[i];
      const Vec2& c = s.control[i];
      const double b = w * bu[ku] * bv[kv];
      const double b_u = w * du[ku] * bv[kv];
      const double b_v = w * bu[ku] * dv[kv];
      num += b * c;
      den += b;
      num_u += b_u * c;
      den_u += b_u;
      num_v += b_v * c;
      den_v += b_v;
    }
  }
  if (point) *point = num / den;
  if (jac) {
    jac->col(0) = (num_u * den - num * den_u) / (den * den);
    jac->col(1) = (num_v * den - num * den_v) / (den * den);
  }
}

}  // namespace

Vec2 map_point(const NurbsCurve& c, double t) {
  Vec2 p;
  curve_point_and_tangent(c, t, &p, nullptr);
  return p;
}

void curve_eval(const NurbsCurve& c, double t, Vec2& point, Vec2& tangent) {
  curve_point_and_tangent(c, t, &point, &tangent);
}

Vec2 curve_tangent(const NurbsCurve& c, double t) {
  Vec2 tan;
  curve_point_and_tangent(c, t, nullptr, &tan);
  return tan;
}

Vec2 map_point(const NurbsSurface& s, double u, double v) {
  Vec2 p;
  surface_point_and_jacobian(s, u, v, &p, nullptr);
  return p;
}

Eigen::Matrix2d jacobian(const NurbsSurface& s, double u, double v) {
  Eigen::Matrix2d J;
  surface_point_and_jacobian(s, u, v, nullptr, &J);
  return J;
}

void surface_eval(const NurbsSurface& s, double u, double v, Vec2& point,
                  Eigen::Matrix2d& jac) {
  surface_point_and_jacobian(s, u, v, &point, &jac);
}

void check_regular(const NurbsCurve& c, double tol) {
  if (static_cast<int>(c.control.size()) != c.space.dimension() ||
      c.weight.size() != c.control.size())
    throw std::runtime_error("curve control net does not match its spline space");
  for (double w : c.weight)
    if (!(w > 0.0)) throw std::runtime_error("curve has a non-positive weight");
  const auto bp = c.space.kv.breakpoints();
  for (std::size_t e = 0; e + 1 < bp.size(); ++e)
    for (int q = 0; q < 5; ++q) {
      const double t = bp[e] + (bp[e + 1] - bp[e]) * (q + 0.5) / 5.0;
      if (curve_tangent(c, t).norm() < tol)
        throw std::runtime_error("degenerate boundary patch: vanishing tangent");
    }
}

void check_regular(const NurbsSurface& s, double tol) {
  if (static_cast<int>(s.control.size()) != s.space.dimension() || s.weight.size() != s.control.size())
    throw std::runtime_error("surface control net does not match its spline space");
  for (double w : s.weight)
    if (!(w > 0.0)) throw std::runtime_error("surface has a non-positive weight");
  const auto bu = s.space.knot_u.breakpoints();
  const auto bv = s.space.knot_v.breakpoints();
  for (std::size_t eu = 0; eu + 1 < bu.size(); ++eu)
    for (std::size_t ev = 0; ev + 1 < bv.size(); ++ev)
      for (int qu = 0; qu < 4; ++qu)
        for (int qv = 0; qv < 4; ++qv) {
          const double u = bu[eu] + (bu[eu + 1] - bu[eu]) * (qu + 0.5) / 4.0;
          const double v = bv[ev] + (bv[ev + 1] - bv[ev]) * (qv + 0.5) / 4.0;
          if (jacobian(s, u, v).determinant() < tol)
            throw std::runtime_error("degenerate patch: Jacobian determinant not positive");
        }
}

NurbsCurve reverse_curve(const NurbsCurve& c) {
  const auto& old = c.space.kv.knots();
  std::vector<double> knots(old.size());
  for (std::size_t i = 0; i < old.size(); ++i) knots[i] = 1.0 - old[old.size() - 1 - i];
  NurbsCurve r{SplineSpace1D{KnotVector(knots, c.space.kv.degree())},
               {c.control.rbegin(), c.control.rend()},
               {c.weight.rbegin(), c.weight.rend()}};
  return r;
}

NurbsCurve extract_edge_curve(const NurbsSurface& s, PatchEdge edge, bool reversed) {
  const int nu = s.space.dim_u(), nv = s.space.dim_v();
  NurbsCurve c{SplineSpace1D{(edge == PatchEdge::south || edge == PatchEdge::north) ? s.space.knot_u
                                                                                    : s.space.knot_v},
               {},
               {}};
  const int n = c.space.dimension();
  c.control.resize(n);
  c.weight.resize(n);
  for (int k = 0; k < n; ++k) {
    int i = 0;
    switch (edge) {
      case PatchEdge::south: i = k; break;
      case PatchEdge::north: i = (nv - 1) * nu + k; break;
      case PatchEdge::west: i = k * nu; break;
      case PatchEdge::east: i = k * nu + (nu - 1); break;
    }
    c.control[k] = s.control[i];
    c.weight[k] = s.weight[i];
  }
  return reversed ? reverse_curve(c) : c;
}

Vec2 outward_normal(const BoundaryCurve& b, double t) {
  const Vec2 tan = curve_tangent(b.curve, t);
  const double len = tan.norm();
  if (len < 1e-14) throw std::runtime_error("degenerate boundary patch: vanishing tangent");
  return b.normal_sign * Vec2(tan.y() / len, -tan.x() / len);
}

SquareGeometry build_square_geometry() {
  const double a = 0.25;
  NurbsSurface patch{SplineSpace2D{KnotVector({0.0, 0.0, 1.0, 1.0}, 1),
                                   KnotVector({0.0, 0.0, 1.0, 1.0}, 1)},
                     {Vec2(-a, -a), Vec2(a, -a), Vec2(-a, a), Vec2(a, a)},
                     {1.0, 1.0, 1.0, 1.0}};
  check_regular(patch);
  SquareGeometry g;
  g.domain.patches = {patch};
  const PatchEdge loop[4] = {PatchEdge::south, PatchEdge::east, PatchEdge::north, PatchEdge::west};
  for (int k = 0; k < 4; ++k) {
    const bool rev = (loop[k] == PatchEdge::north || loop[k] == PatchEdge::west);
    BoundaryCurve bc{extract_edge_curve(patch, loop[k], rev), 0, 0, loop[k], rev, 1.0};
    check_regular(bc.curve);
    g.gamma.push_back(bc);
  }
  return g;
}

namespace {

// Quarter-annulus patch: u runs radially from r_in to r_out, v runs
// counterclockwise over the angle quarter [k*pi/2, (k+1)*pi/2]; this
// ordering keeps the Jacobian determinant positive. Quadratic in both
// directions: the standard three-point rational arc in v and a degree-
// elevated straight segment in u, so |map(u,v)| is exactly linear in u and
// the angle depends on v only.
NurbsSurface quarter_annulus(int quarter, double r_in, double r_out) {
  static const double s = std::numbers::sqrt2 / 2.0;
  // Unit-circle arc control polygon for quarter 0, rotated by quarter*90deg.
  const Vec2 base[3] = {Vec2(1.0, 0.0), Vec2(1.0, 1.0), Vec2(0.0, 1.0)};
  Eigen::Matrix2d rot;
  const double ang = quarter * std::numbers::pi / 2.0;
  rot << std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang);
  const double radii[3] = {r_in, 0.5 * (r_in + r_out), r_out};
  const double arc_w[3] = {1.0, s, 1.0};
  NurbsSurface patch{SplineSpace2D{KnotVector({0, 0, 0, 1, 1, 1}, 2),
                                   KnotVector({0, 0, 0, 1, 1, 1}, 2)},
                     std::vector<Vec2>(9), std::vector<double>(9)};
  for (int iv = 0; iv < 3; ++iv)
    for (int iu = 0; iu < 3; ++iu) {
      patch.control[iv * 3 + iu] = radii[iu] * (rot * base[iv]);
      patch.weight[iv * 3 + iu] = arc_w[iv];
    }
  check_regular(patch);
  return patch;
}

MultipatchDomain make_annulus(double r_in, double r_out) {
  MultipatchDomain d;
  for (int k = 0; k < 4; ++k) d.patches.push_back(quarter_annulus(k, r_in, r_out));
  for (int k = 0; k < 4; ++k)
    d.interfaces.push_back({k, PatchEdge::north, (k + 1) % 4, PatchEdge::south, false});
  return d;
}

}  // namespace

MachineGeometry build_machine_geometry() {
  MachineGeometry g;
  g.ring_inner = make_annulus(0.1, 0.39);
  g.ring_outer = make_annulus(0.4, 0.6);
  g.gap = make_annulus(0.39, 0.4);
  for (int k = 0; k < 4; ++k)
    g.ring_inner.dirichlet_edges.push_back({k, PatchEdge::west});  // r = 0.1
  for (int k = 0; k < 4; ++k)
    g.ring_outer.dirichlet_edges.push_back({k, PatchEdge::east});  // r = 0.6
  // Gap boundary: inner circle r=0.39 (out of the gap means toward the
  // origin, sign -1), outer circle r=0.4 (sign +1). Both circles keep the
  // counterclockwise arc parameter, which coincides with the edge parameter
  // of the neighbouring ring patch, so reversed stays false.
  for (int k = 0; k < 4; ++k) {
    BoundaryCurve bc{extract_edge_curve(g.gap.patches[k], PatchEdge::west, false),
                     0, k, PatchEdge::east, false, -1.0};
    g.gamma.push_back(bc);
  }
  for (int k = 0; k < 4; ++k) {
    BoundaryCurve bc{extract_edge_curve(g.gap.patches[k], PatchEdge::east, false),
                     1, k, PatchEdge::west, false, +1.0};
    g.gamma.push_back(bc);
  }
  for (const auto& bc : g.gamma) check_regular(bc.curve);
  return g;
}

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_multipatch(const std::string& path, const MultipatchDomain& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open geometry file for writing: " + path);
  out << "multipatch 1\n";
  out << "patches " << d.patches.size() << "\n";
  for (const auto& p : d.patches) {
    out << "degrees " << p.space.knot_u.degree() << " " << p.space.knot_v.degree() << "\n";
    out << "knots_u";
    for (double k : p.space.knot_u.knots()) out << " " << fmt17(k);
    out << "\nknots_v";
    for (double k : p.space.knot_v.knots()) out << " " << fmt17(k);
    out << "\ncontrol " << p.control.size() << "\n";
    for (std::size_t i = 0; i < p.control.size(); ++i)
      out << fmt17(p.control[i].x()) << " " << fmt17(p.control[i].y()) << " "
          << fmt17(p.weight[i]) << "\n";
  }
  out << "interfaces " << d.interfaces.size() << "\n";
  for (const auto& f : d.interfaces)
    out << f.patch_a << " " << static_cast<int>(f.edge_a) << " " << f.patch_b << " "
        << static_cast<int>(f.edge_b) << " " << (f.reversed ? 1 : 0) << "\n";
  out << "dirichlet " << d.dirichlet_edges.size() << "\n";
  for (const auto& e : d.dirichlet_edges)
    out << e.patch << " " << static_cast<int>(e.edge) << "\n";
}

MultipatchDomain read_multipatch(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open geometry file: " + path);
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (!in || tag != "multipatch" || version != 1)
    throw std::runtime_error("not a multipatch geometry file: " + path);
  auto expect = [&](const char* want) {
    in >> tag;
    if (!in || tag != want)
      throw std::runtime_error(std::string("geometry file: expected '") + want + "'");
  };
  MultipatchDomain d;
  std::size_t n_patches = 0;
  expect("patches");
  in >> n_patches;
  for (std::size_t p = 0; p < n_patches; ++p) {
    int pu = 0, pv = 0;
    expect("degrees");
    in >> pu >> pv;
    if (!in || pu < 0 || pv < 0) throw std::runtime_error("geometry file: bad degrees");
    auto read_knots = [&](int degree) {
      // Knot counts are implied: read until the next keyword would start.
      // Knot vectors are written on one line, so consume the rest of it.
      std::string line;
      std::getline(in, line);
      std::istringstream ls(line);
      std::vector<double> knots;
      double x = 0.0;
      while (ls >> x) knots.push_back(x);
      return KnotVector(knots, degree);
    };
    expect("knots_u");
    KnotVector ku = read_knots(pu);
    expect("knots_v");
    KnotVector kv = read_knots(pv);
    expect("control");
    std::size_t n = 0;
    in >> n;
    NurbsSurface s{SplineSpace2D{ku, kv}, std::vector<Vec2>(n), std::vector<double>(n)};
    if (static_cast<int>(n) != s.space.dimension())
      throw std::runtime_error("geometry file: control count does not match knots");
    for (std::size_t i = 0; i < n; ++i) {
      double x = 0.0, y = 0.0, w = 0.0;
      in >> x >> y >> w;
      if (!in) throw std::runtime_error("geometry file: truncated control net");
      s.control[i] = Vec2(x, y);
      s.weight[i] = w;
    }
    check_regular(s);
    d.patches.push_back(std::move(s));
  }
  expect("interfaces");
  std::size_t n_if = 0;
  in >> n_if;
  for (std::size_t i = 0; i < n_if; ++i) {
    int pa = 0, ea = 0, pb = 0, eb = 0, rev = 0;
    in >> pa >> ea >> pb >> eb >> rev;
    if (!in) throw std::runtime_error("geometry file: truncated interface list");
    d.interfaces.push_back(
        {pa, static_cast<PatchEdge>(ea), pb, static_cast<PatchEdge>(eb), rev != 0});
  }
  expect("dirichlet");
  std::size_t n_dir = 0;
  in >> n_dir;
  for (std::size_t i = 0; i < n_dir; ++i) {
    int p = 0, e = 0;
    in >> p >> e;
    if (!in) throw std::runtime_error("geometry file: truncated dirichlet list");
    d.dirichlet_edges.push_back({p, static_cast<PatchEdge>(e)});
  }
  return d;
}

}  // namespace fembem
