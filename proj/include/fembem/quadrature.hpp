#pragma once

#include <cmath>
#include <utility>
#include <vector>

namespace fembem {

// Nodes and weights on a reference interval. gauss_legendre lives on [-1,1],
// log_gauss and the [0,1]-mapped variants on [0,1]. Weights are positive and
// sum to the measure of the weight function over the interval.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Exact for polynomials of degree <= 2n-1 on [-1,1].
QuadratureRule gauss_legendre(int n);

// gauss_legendre mapped to [0,1]; exact for degree <= 2n-1.
QuadratureRule gauss_legendre_01(int n);

// Weight -log(x) on [0,1]; exact for p(x)*(-log x) with deg p <= 2n-1.
// Built by the modified Chebyshev algorithm with shifted-Legendre modified
// moments followed by a Golub-Welsch eigensolve.
QuadratureRule log_gauss(int n);

enum class PairClass { disjoint, adjacent, coincident };

struct PairNode {
  double s, t, w;
  double delta;  // singularity distance in the local parametrization, > 0
};

// Rule on [0,1]^2 for Galerkin double integrals whose integrand splits as
//   F(s,t) = a(s,t) * (-log delta(s,t)) + S(s,t),  S smooth,
// where delta = |s-t| for coincident elements and delta = max(s,t) for
// adjacent ones (both parameters measured from the shared vertex).
// log_nodes approximate the a*(-log delta) part with delta folded into the
// weights; smooth_nodes approximate S, reconstructed pointwise from F and a
// since delta > 0 at every stored node. Disjoint pairs carry only smooth
// nodes with delta = 1, reducing to plain tensor Gauss.
struct PairRule {
  PairClass pair_class = PairClass::disjoint;
  std::vector<PairNode> log_nodes;
  std::vector<PairNode> smooth_nodes;
};

PairRule singular_pair_rule(PairClass cls, int n);

// full(s,t) evaluates F away from the singularity, log_coef(s,t) evaluates a.
template <class Full, class LogCoef>
double integrate_pair(const PairRule& rule, Full&& full, LogCoef&& log_coef) {
  double acc_log = 0.0;
  for (const PairNode& q : rule.log_nodes) acc_log += q.w * log_coef(q.s, q.t);
  double acc_smooth = 0.0;
  for (const PairNode& q : rule.smooth_nodes)
    acc_smooth += q.w * (full(q.s, q.t) + log_coef(q.s, q.t) * std::log(q.delta));
  return acc_log + acc_smooth;
}

struct QuadConfig {
  int n_gauss = 25;     // points per element per direction for boundary integrals
  int near_depth = 4;   // recursive bisection depth for close disjoint pairs
};

// Bisects [a,b] while too_close(lo,hi) holds, up to max_depth levels, and
// appends the leaf intervals in left-to-right order. too_close receives the
// candidate piece and decides from physical distances and sizes.
template <class CloseFn>
void graded_subdivide(double a, double b, int max_depth, CloseFn&& too_close,
                      std::vector<std::pair<double, double>>& out) {
  if (max_depth > 0 && too_close(a, b)) {
    const double mid = 0.5 * (a + b);
    graded_subdivide(a, mid, max_depth - 1, too_close, out);
    graded_subdivide(mid, b, max_depth - 1, too_close, out);
  } else {
    out.emplace_back(a, b);
  }
}

}  // namespace fembem
