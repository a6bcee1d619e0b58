#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fembem/splines.hpp"

namespace fembem {

using Vec2 = Eigen::Vector2d;

// Rational B-spline curve [0,1] -> R^2. control/weight are indexed like the
// basis of `space`; all weights are positive.
struct NurbsCurve {
  SplineSpace1D space;
  std::vector<Vec2> control;
  std::vector<double> weight;
};

// Rational B-spline surface [0,1]^2 -> R^2 with index iv*dim_u + iu.
struct NurbsSurface {
  SplineSpace2D space;
  std::vector<Vec2> control;
  std::vector<double> weight;
};

Vec2 map_point(const NurbsCurve& c, double t);
Vec2 curve_tangent(const NurbsCurve& c, double t);
// Point and tangent in one evaluation (the assembly hot path).
void curve_eval(const NurbsCurve& c, double t, Vec2& point, Vec2& tangent);
Vec2 map_point(const NurbsSurface& s, double u, double v);
// Columns are dr/du and dr/dv.
Eigen::Matrix2d jacobian(const NurbsSurface& s, double u, double v);

// Point and Jacobian in one evaluation (assembly hot path).
void surface_eval(const NurbsSurface& s, double u, double v, Vec2& point,
                  Eigen::Matrix2d& jac);

// Throw std::runtime_error if the map degenerates (sampled Jacobian
// determinant or tangent norm below tol).
void check_regular(const NurbsCurve& c, double tol = 1e-10);
void check_regular(const NurbsSurface& s, double tol = 1e-10);

// Edge curve of a surface patch in the canonical edge parameter (the
// surviving coordinate, increasing). reversed=true flips the parameter
// to 1-t (control points reversed, knots mirrored).
NurbsCurve extract_edge_curve(const NurbsSurface& s, PatchEdge edge, bool reversed);
NurbsCurve reverse_curve(const NurbsCurve& c);

// One patch of a coupling or Dirichlet boundary. The trace pairing needs to
// know which volume patch edge the curve coincides with: curve parameter t
// corresponds to edge parameter (reversed ? 1-t : t) of fem_patch's fem_edge
// in FEM domain fem_domain.
struct BoundaryCurve {
  NurbsCurve curve;
  int fem_domain = 0;
  int fem_patch = 0;
  PatchEdge fem_edge = PatchEdge::south;
  bool reversed = false;
  // +1: normal is the unit tangent rotated by -90 degrees (outward for a
  // counterclockwise loop); -1 flips it. Set so the normal points out of
  // the domain the boundary belongs to.
  double normal_sign = 1.0;
};

Vec2 outward_normal(const BoundaryCurve& b, double t);

struct MultipatchDomain {
  std::vector<NurbsSurface> patches;
  std::vector<InterfaceId> interfaces;
  std::vector<BoundaryEdgeId> dirichlet_edges;
};

// Square (-0.25,0.25)^2 as one bilinear patch; gamma traverses the four
// edges counterclockwise so all normal signs are +1.
struct SquareGeometry {
  MultipatchDomain domain;
  std::vector<BoundaryCurve> gamma;
};
SquareGeometry build_square_geometry();

// Three concentric annuli, each four quadratic quarter-annulus patches:
// inner ring 0.1 <= r <= 0.39, outer ring 0.4 <= r <= 0.6, and the thin
// gap 0.39 <= r <= 0.4 between them. gamma is the gap boundary (eight
// quarter arcs) with normals pointing out of the gap; its FEM links refer
// to domain 0 = ring_inner (arcs at r=0.39) and 1 = ring_outer (r=0.4).
// The Dirichlet boundaries are r=0.1 and r=0.6.
struct MachineGeometry {
  MultipatchDomain ring_inner;
  MultipatchDomain ring_outer;
  MultipatchDomain gap;
  std::vector<BoundaryCurve> gamma;
};
MachineGeometry build_machine_geometry();

// Plain-text serialization: degrees, knot vectors, control rows (x y w),
// interface and Dirichlet-edge lists. Values printed with %.17g so a
// write/read round trip is exact.
void write_multipatch(const std::string& path, const MultipatchDomain& d);
MultipatchDomain read_multipatch(const std::string& path);

}  // namespace fembem
