#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fembem/geometry.hpp"
#include "fembem/quadrature.hpp"
#include "fembem/splines.hpp"

namespace fembem {

// Fundamental solution -(1/2pi) log|x-y| and its y-normal derivative
// (1/2pi) (x-y).ny / |x-y|^2. Both throw std::domain_error at x = y.
double kernel_G(const Vec2& x, const Vec2& y);
double kernel_dG_dny(const Vec2& x, const Vec2& y, const Vec2& ny);

// One boundary patch with its discrete spaces. `space` carries the density
// unknowns (rows); `trace_space` spans the traces of the volume basis
// functions in the curve parameter, and trace_cols maps its local indices
// to column indices of the assembled K and M (-1 drops a column). Both
// spaces must share one breakpoint grid, which defines the elements.
struct BemCurve {
  BoundaryCurve geom;
  SplineSpace1D space;
  SplineSpace1D trace_space;
  std::vector<int> trace_cols;
};

std::vector<int> bem_row_offsets(const std::vector<BemCurve>& curves);

// Galerkin matrix <psi_j, V psi_i> over all curves. Element pairs are
// classified coincident / adjacent (shared physical endpoint) / disjoint;
// the first two use the log-splitting pair rules, close disjoint pairs are
// integrated on a graded subdivision of the larger element. Warns once on
// stderr if the sampled boundary diameter reaches 1 (ellipticity of V is
// only guaranteed below that).
Eigen::MatrixXd assemble_V(const std::vector<BemCurve>& curves, const QuadConfig& cfg);

// <psi_j, K gamma v_i> and the trace pairing <psi_j, gamma v_i>; columns
// are indexed by trace_cols.
Eigen::MatrixXd assemble_K(const std::vector<BemCurve>& curves, int n_cols,
                           const QuadConfig& cfg);
Eigen::MatrixXd assemble_M(const std::vector<BemCurve>& curves, int n_cols,
                           const QuadConfig& cfg);

// RHS helpers for a boundary function f given in physical coordinates:
// entries <psi_j, K f> and <psi_j, f>. The per-curve overloads take one
// function per curve (e.g. data supported on a subset of the arcs).
using BoundaryFn = std::function<double(const Vec2&)>;
Eigen::VectorXd apply_K_to_function(const std::vector<BemCurve>& curves, const BoundaryFn& f,
                                    const QuadConfig& cfg);
Eigen::VectorXd apply_K_to_function(const std::vector<BemCurve>& curves,
                                    const std::vector<BoundaryFn>& per_curve,
                                    const QuadConfig& cfg);
Eigen::VectorXd apply_M_to_function(const std::vector<BemCurve>& curves, const BoundaryFn& f,
                                    const QuadConfig& cfg);
Eigen::VectorXd apply_M_to_function(const std::vector<BemCurve>& curves,
                                    const std::vector<BoundaryFn>& per_curve,
                                    const QuadConfig& cfg);

// psi^T V psi, the computable stand-in for the squared H^{-1/2} norm.
// Throws std::runtime_error below -1e-12 (definiteness violation); smaller
// negative round-off is clamped to zero.
double v_norm_sq(const Eigen::VectorXd& psi, const Eigen::MatrixXd& V);

}  // namespace fembem
