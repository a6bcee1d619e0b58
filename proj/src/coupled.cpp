#include "fembem/coupled.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace fembem {

namespace {

DomainFn or_zero(const DomainFn& f) {
  if (f) return f;
  return [](const Vec2&) { return 0.0; };
}

// Relative nonlinear residual loop. blocks(x) returns the full square system
// matrix with the stiffness frozen at x; since the nonlinear operator acts as
// A(u)u on the domain rows and linearly elsewhere, B(x)x - rhs is the exact
// algebraic residual. One assembly per iteration: the matrix built for the
// residual check becomes the next linearization.
PicardState picard_loop(
    const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& blocks,
    const Eigen::VectorXd& rhs, Eigen::VectorXd& x, const PicardConfig& cfg) {
  if (cfg.tol <= 0.0) throw std::invalid_argument("picard: tolerance must be positive");
  if (x.size() != rhs.size()) throw std::invalid_argument("picard: initial guess size");
  PicardState st;
  const double denom = rhs.norm() > 0.0 ? rhs.norm() : 1.0;
  Eigen::MatrixXd b = blocks(x);
  for (int k = 0; k < cfg.max_iter; ++k) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    const Eigen::VectorXd x_next = lu.solve(rhs);
    if ((b * x_next - rhs).norm() > 1e-8 * denom)
      throw std::runtime_error("coupled system: linear solve failed (singular block matrix)");
    Eigen::MatrixXd b_next = blocks(x_next);
    const double rel = (b_next * x_next - rhs).norm() / denom;
    st.residual_history.push_back(rel);
    st.iterations = k + 1;
    x = x_next;
    b = std::move(b_next);
    if (rel <= cfg.tol) {
      st.converged = true;
      return st;
    }
  }
  throw PicardFailure(std::move(st));
}

}  // namespace

CouplingFabric build_coupling_fabric(
    const std::vector<const DomainDiscretization*>& domains, int domain_id,
    const std::vector<BoundaryCurve>& gamma, int level) {
  CouplingFabric fb;
  fb.gamma = gamma;
  std::vector<SplineSpace1D> flux_spaces;
  for (const BoundaryCurve& arc : gamma) {
    if (arc.fem_domain < 0 || arc.fem_domain >= static_cast<int>(domains.size()))
      throw std::invalid_argument("coupling fabric: arc references unknown domain");
    const int p = domains[arc.fem_domain]->degree;
    flux_spaces.push_back(
        h_refine(SplineSpace1D{make_open_knots({0.0, 1.0}, p - 1)}, level));
  }
  fb.flux_space = build_boundary_space(std::move(flux_spaces));
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    const BoundaryCurve& arc = gamma[i];
    const DomainDiscretization& dom = *domains[arc.fem_domain];
    TraceMap tm = trace_map(dom, arc);
    BemCurve bc{arc, fb.flux_space.patch_spaces[i], tm.space_on_curve, {}};
    if (arc.fem_domain == domain_id) {
      for (int g : tm.global) bc.trace_cols.push_back(dom.space.free_index[g]);
      fb.own_arcs.push_back(arc);
      fb.own_pos.push_back(static_cast<int>(i));
      fb.own_traces.push_back(std::move(tm));
    } else {
      bc.trace_cols.assign(tm.global.size(), -1);
    }
    fb.bem_curves.push_back(std::move(bc));
  }
  return fb;
}

namespace {

// T over the fabric's own arcs, embedded into full flux rows and restricted
// to free domain columns.
Eigen::MatrixXd coupling_t_free(const CouplingFabric& fb,
                                const DomainDiscretization& d, int n_gauss) {
  std::vector<SplineSpace1D> own_flux;
  for (int pos : fb.own_pos) own_flux.push_back(fb.flux_space.patch_spaces[pos]);
  const BoundarySpace sub = build_boundary_space(std::move(own_flux));
  const Eigen::MatrixXd t_sub = assemble_trace_mass(
      fb.own_arcs, sub, fb.own_traces, d.space.num_global, n_gauss);
  Eigen::MatrixXd t_full =
      Eigen::MatrixXd::Zero(fb.flux_space.total_dimension, d.space.num_global);
  for (std::size_t k = 0; k < fb.own_pos.size(); ++k) {
    const int rows = sub.patch_spaces[k].dimension();
    t_full.middleRows(fb.flux_space.offset[fb.own_pos[k]], rows) =
        t_sub.middleRows(sub.offset[k], rows);
  }
  return restrict_cols(d.space, t_full);
}

Eigen::VectorXd domain_rhs(const DomainDiscretization& d, const CouplingFabric& fb,
                           const CoupledData& data, int n_gauss, double* f_mass,
                           double* phi0_mass) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(d.space.num_global);
  if (f_mass) *f_mass = 0.0;
  if (phi0_mass) *phi0_mass = 0.0;
  if (data.f) {
    const Eigen::VectorXd lf = assemble_domain_load(d, data.f);
    if (f_mass) *f_mass = lf.sum();
    load += lf;
  }
  if (data.phi0) {
    const Eigen::VectorXd lp = assemble_trace_load(
        fb.own_arcs, fb.own_traces, d.space.num_global, data.phi0, n_gauss);
    if (phi0_mass) *phi0_mass = lp.sum();
    load += lp;
  }
  return restrict_vector(d.space, load);
}

}  // namespace

InterfaceSystem build_interface_system(const DomainDiscretization& d,
                                       const std::vector<BoundaryCurve>& gamma,
                                       int level, const CoupledData& data,
                                       const QuadConfig& quad) {
  InterfaceSystem sys;
  sys.fabric = build_coupling_fabric({&d}, 0, gamma, level);
  sys.n_free = d.space.num_free;
  sys.n_flux = sys.fabric.flux_space.total_dimension;
  sys.t_free = coupling_t_free(sys.fabric, d, quad.n_gauss);
  sys.v_mat = assemble_V(sys.fabric.bem_curves, quad);
  const Eigen::MatrixXd k_free = assemble_K(sys.fabric.bem_curves, sys.n_free, quad);
  const Eigen::MatrixXd m_free = assemble_M(sys.fabric.bem_curves, sys.n_free, quad);
  sys.half_m_minus_k = 0.5 * m_free - k_free;

  double f_mass = 0.0, phi0_mass = 0.0;
  const Eigen::VectorXd f_free =
      domain_rhs(d, sys.fabric, data, quad.n_gauss, &f_mass, &phi0_mass);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(sys.n_flux);
  if (data.u0)
    g = 0.5 * apply_M_to_function(sys.fabric.bem_curves, data.u0, quad) -
        apply_K_to_function(sys.fabric.bem_curves, data.u0, quad);
  sys.rhs.resize(sys.n_free + sys.n_flux);
  sys.rhs << f_free, g;

  // Radiation condition bookkeeping: the data should carry zero total mass;
  // a violation only means the exterior part grows like C log|x|.
  sys.compatibility = f_mass + phi0_mass;
  sys.radiation_constant = -sys.compatibility / (2.0 * std::numbers::pi);
  const double scale = std::max(1.0, std::abs(f_mass) + std::abs(phi0_mass));
  if (std::abs(sys.compatibility) > 1e-8 * scale)
    std::fprintf(stderr,
                 "warning: data violate the compatibility condition "
                 "((f,1)+<phi0,1> = %.3e); exterior solution grows like "
                 "C log|x| with C = %.3e\n",
                 sys.compatibility, sys.radiation_constant);
  return sys;
}

InterfaceSolution solve_interface(const DomainDiscretization& d,
                                  const InterfaceSystem& sys,
                                  const MaterialModel& material,
                                  const PicardConfig& picard,
                                  const Eigen::VectorXd* initial) {
  const int n = sys.n_free + sys.n_flux;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (initial) {
    if (initial->size() != n)
      throw std::invalid_argument("solve_interface: initial guess size");
    x = *initial;
  }
  const auto blocks = [&](const Eigen::VectorXd& xk) {
    const Eigen::VectorXd u_glob = expand_free(d.space, xk.head(sys.n_free));
    const Eigen::MatrixXd a_free =
        restrict_matrix(d.space, assemble_stiffness(d, material, u_glob));
    Eigen::MatrixXd b(n, n);
    b.topLeftCorner(sys.n_free, sys.n_free) = a_free;
    b.topRightCorner(sys.n_free, sys.n_flux) = -sys.t_free.transpose();
    b.bottomLeftCorner(sys.n_flux, sys.n_free) = sys.half_m_minus_k;
    b.bottomRightCorner(sys.n_flux, sys.n_flux) = sys.v_mat;
    return b;
  };
  InterfaceSolution sol;
  sol.picard = picard_loop(blocks, sys.rhs, x, picard);
  sol.u = expand_free(d.space, x.head(sys.n_free));
  sol.phi = x.tail(sys.n_flux);
  return sol;
}

TwoDomainSystem build_two_domain_system(const DomainDiscretization& d1,
                                        const DomainDiscretization& d2,
                                        const std::vector<BoundaryCurve>& gamma,
                                        int level, const CoupledData& data1,
                                        const CoupledData& data2,
                                        const QuadConfig& quad) {
  TwoDomainSystem sys;
  const std::vector<const DomainDiscretization*> domains{&d1, &d2};
  sys.fabric1 = build_coupling_fabric(domains, 0, gamma, level);
  sys.fabric2 = build_coupling_fabric(domains, 1, gamma, level);
  sys.n1 = d1.space.num_free;
  sys.n2 = d2.space.num_free;
  sys.n_flux = sys.fabric1.flux_space.total_dimension;
  if (d1.space.num_free == d1.space.num_global ||
      d2.space.num_free == d2.space.num_global)
    throw std::invalid_argument(
        "two-domain coupling requires a Dirichlet part on each domain");

  sys.t1_free = coupling_t_free(sys.fabric1, d1, quad.n_gauss);
  sys.t2_free = coupling_t_free(sys.fabric2, d2, quad.n_gauss);
  sys.v_mat = assemble_V(sys.fabric1.bem_curves, quad);
  sys.c1 = 0.5 * assemble_M(sys.fabric1.bem_curves, sys.n1, quad) +
           assemble_K(sys.fabric1.bem_curves, sys.n1, quad);
  sys.c2 = 0.5 * assemble_M(sys.fabric2.bem_curves, sys.n2, quad) +
           assemble_K(sys.fabric2.bem_curves, sys.n2, quad);
  sys.constraint = apply_M_to_function(
      sys.fabric1.bem_curves, [](const Vec2&) { return 1.0; }, quad);

  const Eigen::VectorXd f1 =
      domain_rhs(d1, sys.fabric1, data1, quad.n_gauss, nullptr, nullptr);
  const Eigen::VectorXd f2 =
      domain_rhs(d2, sys.fabric2, data2, quad.n_gauss, nullptr, nullptr);
  // Jump data enter through (1/2 + K) applied per arc: arcs of each domain
  // carry that domain's u0, extended by zero on the other part.
  Eigen::VectorXd g = Eigen::VectorXd::Zero(sys.n_flux);
  if (data1.u0 || data2.u0) {
    std::vector<BoundaryFn> masked;
    for (const BoundaryCurve& arc : gamma)
      masked.push_back(arc.fem_domain == 0 ? or_zero(data1.u0) : or_zero(data2.u0));
    g = 0.5 * apply_M_to_function(sys.fabric1.bem_curves, masked, quad) +
        apply_K_to_function(sys.fabric1.bem_curves, masked, quad);
  }
  sys.rhs.resize(sys.n1 + sys.n2 + sys.n_flux + 1);
  sys.rhs << f1, f2, g, 0.0;
  return sys;
}

TwoDomainSolution solve_two_domain(const DomainDiscretization& d1,
                                   const DomainDiscretization& d2,
                                   const TwoDomainSystem& sys,
                                   const MaterialModel& m1,
                                   const MaterialModel& m2,
                                   const PicardConfig& picard,
                                   const Eigen::VectorXd* initial) {
  const int n = sys.n1 + sys.n2 + sys.n_flux + 1;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (initial) {
    if (initial->size() != n)
      throw std::invalid_argument("solve_two_domain: initial guess size");
    x = *initial;
  }
  const auto blocks = [&](const Eigen::VectorXd& xk) {
    const Eigen::MatrixXd a1 = restrict_matrix(
        d1.space,
        assemble_stiffness(d1, m1, expand_free(d1.space, xk.head(sys.n1))));
    const Eigen::MatrixXd a2 = restrict_matrix(
        d2.space, assemble_stiffness(
                      d2, m2, expand_free(d2.space, xk.segment(sys.n1, sys.n2))));
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    const int o_phi = sys.n1 + sys.n2;
    const int o_mu = o_phi + sys.n_flux;
    b.block(0, 0, sys.n1, sys.n1) = a1;
    b.block(0, o_phi, sys.n1, sys.n_flux) = sys.t1_free.transpose();
    b.block(sys.n1, sys.n1, sys.n2, sys.n2) = a2;
    b.block(sys.n1, o_phi, sys.n2, sys.n_flux) = sys.t2_free.transpose();
    b.block(o_phi, 0, sys.n_flux, sys.n1) = -sys.c1;
    b.block(o_phi, sys.n1, sys.n_flux, sys.n2) = -sys.c2;
    b.block(o_phi, o_phi, sys.n_flux, sys.n_flux) = sys.v_mat;
    b.block(o_phi, o_mu, sys.n_flux, 1) = sys.constraint;
    b.block(o_mu, o_phi, 1, sys.n_flux) = sys.constraint.transpose();
    return b;
  };
  TwoDomainSolution sol;
  sol.picard = picard_loop(blocks, sys.rhs, x, picard);
  sol.u1 = expand_free(d1.space, x.head(sys.n1));
  sol.u2 = expand_free(d2.space, x.segment(sys.n1, sys.n2));
  sol.phi = x.segment(sys.n1 + sys.n2, sys.n_flux);
  sol.multiplier = x[x.size() - 1];
  sol.flux_mean = sys.constraint.dot(sol.phi);
  return sol;
}

double stabilization_s(const Eigen::VectorXd& trace_coeffs,
                       const Eigen::VectorXd& psi_coeffs,
                       const Eigen::MatrixXd& half_m_minus_k,
                       const Eigen::MatrixXd& v_mat) {
  if (trace_coeffs.size() != half_m_minus_k.cols() ||
      psi_coeffs.size() != v_mat.cols() ||
      half_m_minus_k.rows() != v_mat.rows())
    throw std::invalid_argument("stabilization_s: dimension mismatch");
  // The flux basis forms a partition of unity per arc, so the constant test
  // density 1 is the all-ones coefficient vector.
  return (half_m_minus_k * trace_coeffs + v_mat * psi_coeffs).sum();
}

}  // namespace fembem
