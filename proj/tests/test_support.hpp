#pragma once

// Helpers shared by the unit tests and the acceptance runner: standalone
// boundary discretizations and brute-force quadrature oracles that avoid
// the library's own singular-pair machinery.

#include <cmath>
#include <numbers>
#include <vector>

#include "fembem/bem.hpp"
#include "fembem/geometry.hpp"
#include "fembem/quadrature.hpp"
#include "fembem/splines.hpp"

namespace testsup {

// Density space of degree p-1 and trace space of degree p on each curve at
// the given refinement level; trace columns numbered curve by curve with no
// cross-curve identification (fine for representing constants).
inline std::vector<fembem::BemCurve> bem_curves_for(
    const std::vector<fembem::BoundaryCurve>& gamma, int p, int level, int* n_cols_out) {
  std::vector<fembem::BemCurve> out;
  int col = 0;
  for (const auto& bc : gamma) {
    fembem::BemCurve c{bc,
                       fembem::h_refine(
                           fembem::SplineSpace1D{fembem::make_open_knots({0.0, 1.0}, p - 1)},
                           level),
                       fembem::h_refine(
                           fembem::SplineSpace1D{fembem::make_open_knots({0.0, 1.0}, p)}, level),
                       {}};
    for (int i = 0; i < c.trace_space.dimension(); ++i) c.trace_cols.push_back(col++);
    out.push_back(std::move(c));
  }
  if (n_cols_out) *n_cols_out = col;
  return out;
}

// Brute-force value of the double integral of -(1/2pi) log|x-y| over the
// circle of radius R against itself (equals -2 pi R^2 log R analytically).
// Plain midpoint sweep in the outer angle; the inner angle integral is done
// with dyadically graded Gauss panels toward the singularity, written out
// directly so it shares nothing with the library quadrature code.
inline double circle_log_pair_integral(double R) {
  constexpr double pi = std::numbers::pi;
  // 20-point Gauss-Legendre nodes/weights on [-1,1] (symmetric halves).
  static const double gx[10] = {0.076526521133497333755, 0.227785851141645078080,
                                0.373706088715419560673, 0.510867001950827098004,
                                0.636053680726515025453, 0.746331906460150792614,
                                0.839116971822218823395, 0.912234428251325905868,
                                0.963971927277913791268, 0.993128599185094924786};
  static const double gw[10] = {0.152753387130725850698, 0.149172986472603746788,
                                0.142096109318382051329, 0.131688638449176626898,
                                0.118194531961518417312, 0.101930119817240435037,
                                0.083276741576704748725, 0.062672048334109063570,
                                0.040601429800386941331, 0.017614007139152118312};
  auto inner = [&](double theta) {
    // integrate f(u) + f(2pi - u) over u in (0, pi], f(u) = -(1/2pi) log|x-y|
    double acc = 0.0;
    const double cx = R * std::cos(theta), cy = R * std::sin(theta);
    auto f = [&](double u) {
      const double yx = R * std::cos(theta + u), yy = R * std::sin(theta + u);
      const double r = std::hypot(cx - yx, cy - yy);
      return -std::log(r) / (2.0 * pi);
    };
    double hi = pi;
    for (int k = 0; k < 52; ++k) {
      const double lo = hi / 2.0;
      const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
      for (int i = 0; i < 10; ++i)
        acc += gw[i] * h * (f(c - h * gx[i]) + f(2.0 * pi - (c - h * gx[i])) +
                            f(c + h * gx[i]) + f(2.0 * pi - (c + h * gx[i])));
      hi = lo;
    }
    return acc * R;  // ds along the inner circle parameter
  };
  // Outer midpoint sweep (the integrand is actually constant in theta).
  const int n_outer = 64;
  double total = 0.0;
  for (int i = 0; i < n_outer; ++i) {
    const double theta = (i + 0.5) * 2.0 * pi / n_outer;
    total += inner(theta) * (2.0 * pi / n_outer) * R;
  }
  return total;
}

// Single bilinear patch over [0,1]^2, no interfaces, no Dirichlet edges.
inline fembem::MultipatchDomain unit_square_domain() {
  const fembem::KnotVector line({0.0, 0.0, 1.0, 1.0}, 1);
  fembem::NurbsSurface patch{
      fembem::SplineSpace2D{line, line},
      {fembem::Vec2(0, 0), fembem::Vec2(1, 0), fembem::Vec2(0, 1),
       fembem::Vec2(1, 1)},
      {1.0, 1.0, 1.0, 1.0}};
  fembem::MultipatchDomain d;
  d.patches = {patch};
  return d;
}

}  // namespace testsup
