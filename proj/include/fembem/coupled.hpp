#pragma once

#include <Eigen/Dense>

#include <vector>

#include "fembem/bem.hpp"
#include "fembem/fem.hpp"

namespace fembem {

struct PicardConfig {
  double tol = 1e-10;  // relative nonlinear residual target
  int max_iter = 100;
};

struct PicardState {
  std::vector<double> residual_history;  // relative residual after each solve
  int iterations = 0;
  bool converged = false;
};

// Thrown when the outer iteration exhausts max_iter; carries the history.
struct PicardFailure : std::runtime_error {
  PicardState state;
  explicit PicardFailure(PicardState s)
      : std::runtime_error("Picard iteration did not reach the tolerance"),
        state(std::move(s)) {}
};

// Coupling fabric of one domain against a (possibly larger) arc list: flux
// space blocks per arc, trace identifications for the arcs belonging to the
// addressed domain, and BEM curves whose trace columns address free domain
// dofs (-1 on foreign arcs and constrained dofs).
struct CouplingFabric {
  std::vector<BoundaryCurve> gamma;     // full arc list
  BoundarySpace flux_space;             // blocks per arc of gamma
  std::vector<BoundaryCurve> own_arcs;  // arcs with fem_domain == domain_id
  std::vector<int> own_pos;             // their positions in gamma
  std::vector<TraceMap> own_traces;     // aligned with own_arcs
  std::vector<BemCurve> bem_curves;
};

// Flux degree per arc is the arc's domain degree minus one; the shared
// refinement level makes the 1D element grids coincide with the traces.
CouplingFabric build_coupling_fabric(
    const std::vector<const DomainDiscretization*>& domains, int domain_id,
    const std::vector<BoundaryCurve>& gamma, int level);

// Problem data; any callable may be null meaning identically zero.
struct CoupledData {
  DomainFn f;     // volume source
  DomainFn u0;    // Dirichlet jump on the coupling boundary
  DomainFn phi0;  // Neumann jump
};

// Cached mesh-level pieces of the single-domain coupling
//   [ A(u_k)      -T^t ] [u]   [F]
//   [ M/2 - K       V  ] [p] = [G]
// in free domain numbering; rebuilt stiffness is the only iterate-dependent
// block.
struct InterfaceSystem {
  CouplingFabric fabric;
  Eigen::MatrixXd t_free;  // flux x free
  Eigen::MatrixXd v_mat;
  Eigen::MatrixXd half_m_minus_k;  // flux x free
  Eigen::VectorXd rhs;             // stacked [F; G]
  double compatibility = 0.0;      // (f,1) + <phi0,1>, reported not enforced
  double radiation_constant = 0.0;
  int n_free = 0;
  int n_flux = 0;
};

InterfaceSystem build_interface_system(const DomainDiscretization& d,
                                       const std::vector<BoundaryCurve>& gamma,
                                       int level, const CoupledData& data,
                                       const QuadConfig& quad);

struct InterfaceSolution {
  Eigen::VectorXd u;    // domain coefficients, global numbering
  Eigen::VectorXd phi;  // flux coefficients
  PicardState picard;
};

// initial (stacked unknowns) defaults to zero when null.
InterfaceSolution solve_interface(const DomainDiscretization& d,
                                  const InterfaceSystem& sys,
                                  const MaterialModel& material,
                                  const PicardConfig& picard,
                                  const Eigen::VectorXd* initial = nullptr);

// Two bounded domains coupled through the gap boundary, with the flux mean
// constrained to zero by a bordered scalar multiplier:
//   [ A1          0        +T1^t      0 ] [u1]   [F1]
//   [ 0           A2       +T2^t      0 ] [u2] = [F2]
//   [ -(M1/2+K1) -(M2/2+K2)   V       c ] [p ]   [G ]
//   [ 0           0         c^t       0 ] [mu]   [0 ]
struct TwoDomainSystem {
  CouplingFabric fabric1, fabric2;  // against the full gap arc list
  Eigen::MatrixXd t1_free, t2_free;
  Eigen::MatrixXd v_mat;
  Eigen::MatrixXd c1, c2;  // flux x free_i blocks M_i/2 + K_i
  Eigen::VectorXd constraint;  // <psi_j, 1>
  Eigen::VectorXd rhs;         // stacked [F1; F2; G; 0]
  int n1 = 0, n2 = 0, n_flux = 0;
};

TwoDomainSystem build_two_domain_system(const DomainDiscretization& d1,
                                        const DomainDiscretization& d2,
                                        const std::vector<BoundaryCurve>& gamma,
                                        int level, const CoupledData& data1,
                                        const CoupledData& data2,
                                        const QuadConfig& quad);

struct TwoDomainSolution {
  Eigen::VectorXd u1, u2;  // global numbering per domain
  Eigen::VectorXd phi;     // flux on the full gap boundary
  double multiplier = 0.0;
  double flux_mean = 0.0;  // <phi, 1> of the returned flux
  PicardState picard;
};

TwoDomainSolution solve_two_domain(const DomainDiscretization& d1,
                                   const DomainDiscretization& d2,
                                   const TwoDomainSystem& sys,
                                   const MaterialModel& m1,
                                   const MaterialModel& m2,
                                   const PicardConfig& picard,
                                   const Eigen::VectorXd* initial = nullptr);

// Diagnostic s(v) = <1, (1/2 - K) v|_Gamma> + <1, V psi> through assembled
// matrices; the constant test density is the all-ones coefficient vector.
double stabilization_s(const Eigen::VectorXd& trace_coeffs,
                       const Eigen::VectorXd& psi_coeffs,
                       const Eigen::MatrixXd& half_m_minus_k,
                       const Eigen::MatrixXd& v_mat);

}  // namespace fembem
