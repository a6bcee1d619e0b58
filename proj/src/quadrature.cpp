#include "fembem/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fembem {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  constexpr long double pi = std::numbers::pi_v<long double>;
  for (int i = 0; i < m; ++i) {
    long double x = std::cos(pi * (i + 0.75L) / (n + 0.5L));
    long double pp = 0.0L;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1.0L, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0L);
      const long double dx = -p1 / pp;
      x += dx;
      if (std::abs(dx) < 1e-19L) break;
    }
    const long double w = 2.0L / ((1.0L - x * x) * pp * pp);
    rule.nodes[i] = static_cast<double>(-x);
    rule.nodes[n - 1 - i] = static_cast<double>(x);
    rule.weights[i] = static_cast<double>(w);
    rule.weights[n - 1 - i] = static_cast<double>(w);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_legendre_01(int n) {
  QuadratureRule rule = gauss_legendre(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = 0.5 * (rule.nodes[i] + 1.0);
    rule.weights[i] *= 0.5;
  }
  return rule;
}

QuadratureRule log_gauss(int n) {
  if (n < 1) throw std::invalid_argument("log_gauss: n must be positive");
  const int m = 2 * n;

  // Modified moments of -log(x) against monic shifted Legendre polynomials:
  //   nu_0 = 1,  nu_k = (-1)^k / (k (k+1) binom(2k,k)).
  std::vector<long double> nu(m);
  nu[0] = 1.0L;
  long double binom = 1.0L;  // binom(2k, k)
  for (int k = 1; k < m; ++k) {
    binom *= (2.0L * k - 1.0L) * (2.0L * k) / (static_cast<long double>(k) * k);
    const long double mag = 1.0L / (static_cast<long double>(k) * (k + 1) * binom);
    nu[k] = (k % 2 == 0) ? mag : -mag;
  }

  // Monic shifted-Legendre recurrence coefficients on [0,1].
  std::vector<long double> a(m), b(m);
  for (int k = 0; k < m; ++k) {
    a[k] = 0.5L;
    b[k] = (k == 0) ? 0.0L
                    : (static_cast<long double>(k) * k) / (16.0L * k * k - 4.0L);
  }

  // Wheeler's modified Chebyshev algorithm for the target coefficients.
  std::vector<long double> alpha(n), beta(n);
  std::vector<std::vector<long double>> sigma(2, std::vector<long double>(m + 1, 0.0L));
  auto& prev = sigma[0];
  auto& curr = sigma[1];
  for (int l = 0; l < m; ++l) curr[l] = nu[l];
  alpha[0] = a[0] + nu[1] / nu[0];
  beta[0] = nu[0];
  std::vector<long double> next(m + 1, 0.0L);
  for (int k = 1; k < n; ++k) {
    for (int l = k; l <= m - 1 - k; ++l) {
      next[l] = curr[l + 1] - (alpha[k - 1] - a[l]) * curr[l] + b[l] * curr[l - 1] -
                (k >= 2 ? beta[k - 1] * prev[l] : 0.0L);
    }
    alpha[k] = a[k] + next[k + 1] / next[k] - curr[k] / curr[k - 1];
    beta[k] = next[k] / curr[k - 1];
    prev = curr;
    curr = next;
  }

  // Golub-Welsch on the symmetric tridiagonal Jacobi matrix.
  Eigen::VectorXd diag(n), subdiag(n > 1 ? n - 1 : 0);
  for (int k = 0; k < n; ++k) diag[k] = static_cast<double>(alpha[k]);
  for (int k = 1; k < n; ++k)
    subdiag[k - 1] = std::sqrt(static_cast<double>(beta[k]));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, subdiag, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("log_gauss: eigensolve failed");

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double beta0 = static_cast<double>(beta[0]);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = es.eigenvalues()[k];
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[k] = beta0 * v0 * v0;
  }
  return rule;
}

namespace {

// Appends the image of one triangle of the coincident split; mirrored=false
// covers {t < s}. Substitution s = w + (1-w)*q, t = (1-w)*q with w = s-t.
void coincident_triangle(const QuadratureRule& rule_w, const QuadratureRule& rule_q,
                         bool mirrored, std::vector<PairNode>& out) {
  for (std::size_t i = 0; i < rule_w.nodes.size(); ++i) {
    const double w = rule_w.nodes[i];
    for (std::size_t j = 0; j < rule_q.nodes.size(); ++j) {
      const double q = rule_q.nodes[j];
      const double s = w + (1.0 - w) * q;
      const double t = (1.0 - w) * q;
      const double weight = rule_w.weights[i] * rule_q.weights[j] * (1.0 - w);
      out.push_back(mirrored ? PairNode{t, s, weight, w} : PairNode{s, t, weight, w});
    }
  }
}

// One Duffy triangle of the adjacent split, parameters measured from the
// shared vertex; mirrored=false covers {t < s} via s = xi, t = xi*eta.
void adjacent_triangle(const QuadratureRule& rule_xi, const QuadratureRule& rule_eta,
                       bool mirrored, std::vector<PairNode>& out) {
  for (std::size_t i = 0; i < rule_xi.nodes.size(); ++i) {
    const double xi = rule_xi.nodes[i];
    for (std::size_t j = 0; j < rule_eta.nodes.size(); ++j) {
      const double eta = rule_eta.nodes[j];
      const double s = xi;
      const double t = xi * eta;
      const double weight = rule_xi.weights[i] * rule_eta.weights[j] * xi;
      out.push_back(mirrored ? PairNode{t, s, weight, xi} : PairNode{s, t, weight, xi});
    }
  }
}

}  // namespace

PairRule singular_pair_rule(PairClass cls, int n) {
  if (n < 1) throw std::invalid_argument("singular_pair_rule: n must be positive");
  PairRule rule;
  rule.pair_class = cls;
  const QuadratureRule g = gauss_legendre_01(n);
  if (cls == PairClass::disjoint) {
    rule.smooth_nodes.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        rule.smooth_nodes.push_back(
            {g.nodes[i], g.nodes[j], g.weights[i] * g.weights[j], 1.0});
    return rule;
  }
  const QuadratureRule lg = log_gauss(n);
  if (cls == PairClass::coincident) {
    coincident_triangle(lg, g, false, rule.log_nodes);
    coincident_triangle(lg, g, true, rule.log_nodes);
    coincident_triangle(g, g, false, rule.smooth_nodes);
    coincident_triangle(g, g, true, rule.smooth_nodes);
  } else {
    adjacent_triangle(lg, g, false, rule.log_nodes);
    adjacent_triangle(lg, g, true, rule.log_nodes);
    adjacent_triangle(g, g, false, rule.smooth_nodes);
    adjacent_triangle(g, g, true, rule.smooth_nodes);
  }
  return rule;
}

}  // namespace fembem
