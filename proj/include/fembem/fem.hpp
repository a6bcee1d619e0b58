#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "fembem/geometry.hpp"
#include "fembem/splines.hpp"

namespace fembem {

// Scalar constitutive law: flux = g(|grad u|) * grad u. The coefficient g is
// evaluated at the Euclidean norm of the physical gradient.
struct MaterialModel {
  std::function<double(double)> g;
  bool is_linear = true;
};

// g identically 1 (plain Laplacian).
MaterialModel material_identity();

// Saturating reluctivity-style law: g(t) = atanh(2t/3)/(100 t) up to
// t_c = 3/2 - 1/100, continued by a C^1 exponential tail 1 + beta*exp(-alpha*t)
// with alpha = g'(t_c)/(1 - g(t_c)), beta = (g(t_c) - 1)*exp(alpha*t_c).
// g(0) = 1/150. Rejects negative arguments.
MaterialModel material_ferromagnetic();

using DomainFn = std::function<double(const Vec2&)>;

// One FEM subdomain: coarse geometry maps plus a refined discretization
// space on the same parametric domains. Patch grids refine uniformly; the
// geometry is never refined.
struct DomainDiscretization {
  MultipatchDomain geom;
  DomainSpace space;
  int degree = 1;
  int n_gauss = 0;  // element Gauss points per direction; 0 means degree + 2
};

DomainDiscretization discretize_domain(const MultipatchDomain& geom, int degree,
                                       int level);

// Stiffness with the coefficient frozen at the expansion u_current (global
// numbering, constrained coefficients ignored as zeros):
//   A[i][j] = int_Omega g(|grad u_k|) grad v_i . grad v_j dx.
// Symmetric; rows/columns of constrained dofs are kept (restrict later).
// Throws std::runtime_error on a non-positive Jacobian determinant at a
// quadrature point and std::invalid_argument on dimension mismatch.
Eigen::MatrixXd assemble_stiffness(const DomainDiscretization& d,
                                   const MaterialModel& material,
                                   const Eigen::VectorXd& u_current);

// Load entries (f, v_i)_Omega in global numbering.
Eigen::VectorXd assemble_domain_load(const DomainDiscretization& d,
                                     const DomainFn& f);

// Trace identification of one boundary arc: dof i of the 1D edge space, in
// curve parameter order, corresponds to the domain dof global[i]. The edge
// knots are mirrored when the arc runs opposite to the canonical edge.
struct TraceMap {
  SplineSpace1D space_on_curve;
  std::vector<int> global;
};

TraceMap trace_map(const DomainDiscretization& d, const BoundaryCurve& arc);

// T[j][i] = <psi_j, v_i|_Gamma> over the listed arcs; psi rows follow
// flux_space blocks (one block per arc), columns are domain global dofs.
// Element grids of flux and trace spaces must agree per arc.
Eigen::MatrixXd assemble_trace_mass(const std::vector<BoundaryCurve>& gamma,
                                    const BoundarySpace& flux_space,
                                    const std::vector<TraceMap>& traces,
                                    int n_domain_dofs, int n_gauss);

// Boundary load <phi0, v_i|_Gamma> accumulated into domain global numbering.
Eigen::VectorXd assemble_trace_load(const std::vector<BoundaryCurve>& gamma,
                                    const std::vector<TraceMap>& traces,
                                    int n_domain_dofs, const DomainFn& phi0,
                                    int n_gauss);

// Restriction to free dofs (Dirichlet rows/columns removed) and expansion
// back with zeros in the constrained slots.
Eigen::MatrixXd restrict_matrix(const DomainSpace& s, const Eigen::MatrixXd& a);
Eigen::MatrixXd restrict_cols(const DomainSpace& s, const Eigen::MatrixXd& a);
Eigen::VectorXd restrict_vector(const DomainSpace& s, const Eigen::VectorXd& v);
Eigen::VectorXd expand_free(const DomainSpace& s, const Eigen::VectorXd& v_free);

// Empirical Lipschitz and monotonicity constants of x -> g(|x|) x sampled
// over random pairs in the ball of the given radius.
struct MaterialConstants {
  double lipschitz = 0.0;
  double monotonicity = 0.0;
};

MaterialConstants sample_material_constants(const MaterialModel& material,
                                            double ball_radius, int n_pairs,
                                            unsigned seed);

}  // namespace fembem
