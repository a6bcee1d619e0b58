#pragma once

#include <Eigen/Dense>

#include <vector>

namespace fembem {

// p-open knot sequence on [0,1]: first and last knot repeated degree+1 times,
// interior knots strictly inside (0,1) with multiplicity <= degree. Stores the
// local quasi-uniformity bound theta (max ratio of neighboring nonempty
// element lengths, >= 1).
class KnotVector {
 public:
  KnotVector(std::vector<double> knots, int degree);

  int degree() const { return degree_; }
  const std::vector<double>& knots() const { return knots_; }
  int num_basis() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  double theta() const { return theta_; }

  // Knot-span index with half-open spans [xi_j, xi_{j+1}), the final
  // nonempty span closed at 1.
  int find_span(double x) const;

  // Unique knot values, including 0 and 1.
  std::vector<double> breakpoints() const;

 private:
  std::vector<double> knots_;
  int degree_;
  double theta_;
};

// p-open knots over the given breakpoints with simple interior knots.
KnotVector make_open_knots(const std::vector<double>& breakpoints, int degree);

// Splits every nonempty span into `pieces` equal parts.
KnotVector refine_spans(const KnotVector& kv, int pieces);

// One dyadic refinement: inserts the midpoint of every nonempty span.
KnotVector insert_midpoints(const KnotVector& kv);

struct SplineSpace1D {
  KnotVector kv;
  int dimension() const { return kv.num_basis(); }
};

// Cox-de Boor value of basis function i at x; 0/0 terms are zero.
double eval_basis(const SplineSpace1D& space, int i, double x);

// Derivative via the standard recursion; one-sided at knots following the
// half-open span convention (from the right, except at x=1).
double eval_basis_derivative(const SplineSpace1D& space, int i, double x);

// All degree+1 basis values that can be nonzero at x: values[k] is basis
// first+k. values must hold degree+1 doubles.
void eval_basis_all(const KnotVector& kv, double x, int& first, double* values);

// Same plus derivatives.
void eval_basis_all_derivs(const KnotVector& kv, double x, int& first,
                           double* values, double* derivs);

// Knot averages (xi_{i+1}+...+xi_{i+p})/p; for degree 0 the support
// midpoints, which is the natural interpolation grid for step functions.
std::vector<double> greville_points(const SplineSpace1D& space);

// Rectangular matrix P with coeffs_fine = P * coeffs_coarse representing the
// same spline after knot insertion; fine knots must contain the coarse ones.
Eigen::MatrixXd insertion_matrix(const KnotVector& coarse, const KnotVector& fine);

// The element size h = 1/(level+1) ladder: every span of the given space is
// split into level+1 equal parts. Geometry maps are unaffected because they
// keep their own coarse spaces.
SplineSpace1D h_refine(const SplineSpace1D& space, int level);

struct SplineSpace2D {
  KnotVector knot_u;
  KnotVector knot_v;
  int dim_u() const { return knot_u.num_basis(); }
  int dim_v() const { return knot_v.num_basis(); }
  int dimension() const { return dim_u() * dim_v(); }
  int index(int iu, int iv) const { return iv * dim_u() + iu; }
};

SplineSpace2D h_refine(const SplineSpace2D& space, int level);

// Patch edges in canonical order: the edge parameter is the surviving patch
// parameter, increasing.
enum class PatchEdge { south, east, north, west };  // v=0, u=1, v=1, u=0

struct InterfaceId {
  int patch_a;
  PatchEdge edge_a;
  int patch_b;
  PatchEdge edge_b;
  bool reversed = false;  // edge_b dofs run opposite to edge_a
};

struct BoundaryEdgeId {
  int patch;
  PatchEdge edge;
};

// Local indices of the edge row of a tensor space, in canonical edge order.
std::vector<int> edge_dof_indices(const SplineSpace2D& space, PatchEdge edge);

// H1-conforming multipatch space: per-patch tensor spaces with coefficients
// identified across declared interfaces (matching parametrizations assumed
// and knot compatibility verified), and dofs on Dirichlet edges constrained
// to zero.
struct DomainSpace {
  std::vector<SplineSpace2D> patch_spaces;
  std::vector<std::vector<int>> global_index;  // per patch: local -> global
  std::vector<char> dirichlet;                 // per global dof
  std::vector<int> free_index;                 // global -> free slot or -1
  int num_global = 0;
  int num_free = 0;
};

DomainSpace build_domain_space(std::vector<SplineSpace2D> spaces,
                               const std::vector<InterfaceId>& interfaces,
                               const std::vector<BoundaryEdgeId>& dirichlet_edges);

// Boundary flux space: independent per-patch 1D spaces, no continuity across
// patches; contains the constants on each patch by construction.
struct BoundarySpace {
  std::vector<SplineSpace1D> patch_spaces;
  std::vector<int> offset;  // patch start in the global numbering
  int total_dimension = 0;

  int global_of(int patch, int local) const { return offset[patch] + local; }
};

BoundarySpace build_boundary_space(std::vector<SplineSpace1D> spaces);

}  // namespace fembem
