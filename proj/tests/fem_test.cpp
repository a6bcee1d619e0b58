#include <doctest.h>

#include "fembem/fem.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fembem;

namespace {

constexpr double pi = std::numbers::pi;

// Second-order one-sided difference quotients around t.
double fd_left(const std::function<double(double)>& g, double t, double h) {
  return (3.0 * g(t) - 4.0 * g(t - h) + g(t - 2.0 * h)) / (2.0 * h);
}
double fd_right(const std::function<double(double)>& g, double t, double h) {
  return (-3.0 * g(t) + 4.0 * g(t + h) - g(t + 2.0 * h)) / (2.0 * h);
}

BoundarySpace flux_space_for(const std::vector<BoundaryCurve>& gamma, int degree,
                             int level) {
  std::vector<SplineSpace1D> spaces;
  for (size_t i = 0; i < gamma.size(); ++i)
    spaces.push_back(h_refine(SplineSpace1D{make_open_knots({0.0, 1.0}, degree)}, level));
  return build_boundary_space(std::move(spaces));
}

std::vector<TraceMap> traces_for(const DomainDiscretization& d,
                                 const std::vector<BoundaryCurve>& gamma) {
  std::vector<TraceMap> out;
  for (const auto& arc : gamma) out.push_back(trace_map(d, arc));
  return out;
}

double eval_domain_on_edge(const DomainDiscretization& d, const BoundaryCurve& arc,
                           double t, const Eigen::VectorXd& coeffs) {
  const double s = arc.reversed ? 1.0 - t : t;
  double u = 0.0, v = 0.0;
  switch (arc.fem_edge) {
    case PatchEdge::south: u = s; v = 0.0; break;
    case PatchEdge::north: u = s; v = 1.0; break;
    case PatchEdge::west: u = 0.0; v = s; break;
    case PatchEdge::east: u = 1.0; v = s; break;
  }
  const SplineSpace2D& sp = d.space.patch_spaces[arc.fem_patch];
  int fu = 0, fv = 0;
  double bu[8], bv[8];
  eval_basis_all(sp.knot_u, u, fu, bu);
  eval_basis_all(sp.knot_v, v, fv, bv);
  double acc = 0.0;
  for (int j = 0; j <= sp.knot_v.degree(); ++j)
    for (int i = 0; i <= sp.knot_u.degree(); ++i)
      acc += coeffs[d.space.global_index[arc.fem_patch][sp.index(fu + i, fv + j)]] *
             bu[i] * bv[j];
  return acc;
}

double eval_trace(const TraceMap& tm, double t, const Eigen::VectorXd& coeffs) {
  int first = 0;
  double val[8];
  eval_basis_all(tm.space_on_curve.kv, t, first, val);
  double acc = 0.0;
  for (int i = 0; i <= tm.space_on_curve.kv.degree(); ++i)
    acc += coeffs[tm.global[first + i]] * val[i];
  return acc;
}

}  // namespace

TEST_CASE("saturating material law: anchor values, smoothness, rejection") {
  const MaterialModel m = material_ferromagnetic();
  CHECK(m.is_linear == false);
  CHECK(m.g(0.0) == doctest::Approx(1.0 / 150.0).epsilon(1e-14));
  CHECK(std::abs(m.g(1e-8) - 1.0 / 150.0) <= 1e-10);
  const double tc = 1.5 - 0.01;
  // Continuity and matching one-sided slopes at the branch point.
  CHECK(std::abs(m.g(tc) - m.g(tc + 1e-13)) <= 1e-12);
  // h balances the second-order truncation (the inner branch has large
  // higher derivatives near the cutoff) against the round-off floor.
  const double h = 1e-6;
  const double dl = fd_left(m.g, tc, h);
  const double dr = fd_right(m.g, tc, h);
  CHECK(std::abs(dl - dr) <= 1e-8);
  // Tail approaches 1 from below and stays positive.
  CHECK(m.g(10.0) < 1.0);
  CHECK(m.g(10.0) > 0.9);
  CHECK(m.g(2.0) > m.g(1.6));  // monotone rise toward saturation
  CHECK_THROWS_AS(m.g(-0.1), std::invalid_argument);
}

TEST_CASE("material flux map: empirical Lipschitz and monotonicity constants") {
  const MaterialConstants id =
      sample_material_constants(material_identity(), 10.0, 2000, 7);
  CHECK(id.lipschitz == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(id.monotonicity == doctest::Approx(1.0).epsilon(1e-12));
  const MaterialConstants fe =
      sample_material_constants(material_ferromagnetic(), 10.0, 10000, 11);
  CHECK(fe.monotonicity > 0.0);
  CHECK(fe.lipschitz < 10.0);
  CHECK(fe.lipschitz >= fe.monotonicity);
  MESSAGE("flux map constants: Lipschitz ", fe.lipschitz, ", monotonicity ",
          fe.monotonicity);
}

TEST_CASE("bilinear stiffness on one unit-square element matches the closed form") {
  const DomainDiscretization d = discretize_domain(testsup::unit_square_domain(), 1, 0);
  REQUIRE(d.space.num_global == 4);
  const Eigen::MatrixXd a =
      assemble_stiffness(d, material_identity(), Eigen::VectorXd::Zero(4));
  for (int i = 0; i < 4; ++i) CHECK(a(i, i) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  // dofs in lexicographic order: 0=(0,0), 1=(1,0), 2=(0,1), 3=(1,1)
  CHECK(a(0, 3) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(a(1, 2) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 3}, {2, 3}})
    CHECK(a(i, j) == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("stiffness: zero row sums, symmetry, definiteness after constraints") {
  const MachineGeometry mg = build_machine_geometry();
  const DomainDiscretization d = discretize_domain(mg.ring_inner, 2, 3);
  CHECK(d.space.num_free < d.space.num_global);
  std::mt19937 rng(13);
  std::normal_distribution<double> gauss(0.0, 0.5);
  Eigen::VectorXd u(d.space.num_global);
  for (int i = 0; i < u.size(); ++i) u[i] = gauss(rng);
  const Eigen::MatrixXd a = assemble_stiffness(d, material_ferromagnetic(), u);
  CHECK((a * Eigen::VectorXd::Ones(a.cols())).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  const Eigen::MatrixXd a_free = restrict_matrix(d.space, a);
  Eigen::LLT<Eigen::MatrixXd> llt(a_free);
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("doubling the element Gauss order leaves polynomial entries unchanged") {
  DomainDiscretization d = discretize_domain(testsup::unit_square_domain(), 2, 1);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d.space.num_global);
  const Eigen::MatrixXd a1 = assemble_stiffness(d, material_identity(), zero);
  d.n_gauss = 8;
  const Eigen::MatrixXd a2 = assemble_stiffness(d, material_identity(), zero);
  CHECK((a1 - a2).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("domain load: zero data, unit mass, odd angular data on the full ring") {
  const DomainDiscretization sq = discretize_domain(testsup::unit_square_domain(), 2, 2);
  const Eigen::VectorXd zero_load =
      assemble_domain_load(sq, [](const Vec2&) { return 0.0; });
  CHECK(zero_load.cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd unit_load =
      assemble_domain_load(sq, [](const Vec2&) { return 1.0; });
  CHECK(unit_load.sum() == doctest::Approx(1.0).epsilon(1e-12));

  const MachineGeometry mg = build_machine_geometry();
  const DomainDiscretization ring = discretize_domain(mg.ring_outer, 2, 2);
  const Eigen::VectorXd sin_load = assemble_domain_load(
      ring, [](const Vec2& x) { return 100.0 * std::sin(std::atan2(x[1], x[0])); });
  CHECK(std::abs(sin_load.sum()) <= 1e-10);
}

TEST_CASE("stiffness guards: size mismatch and folded geometry") {
  const DomainDiscretization d = discretize_domain(testsup::unit_square_domain(), 1, 0);
  CHECK_THROWS_AS(
      assemble_stiffness(d, material_identity(), Eigen::VectorXd::Zero(5)),
      std::invalid_argument);
  MultipatchDomain folded = testsup::unit_square_domain();
  // Swap the top control row: the map folds and det J changes sign inside.
  std::swap(folded.patches[0].control[2], folded.patches[0].control[3]);
  const DomainDiscretization bad = discretize_domain(folded, 1, 1);
  CHECK_THROWS_AS(
      assemble_stiffness(bad, material_identity(), Eigen::VectorXd::Zero(bad.space.num_global)),
      std::runtime_error);
}

TEST_CASE("trace identification: edge expansions agree with the volume expansion") {
  std::mt19937 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const MachineGeometry mg = build_machine_geometry();
  struct Case {
    DomainDiscretization d;
    std::vector<BoundaryCurve> gamma;
  };
  std::vector<Case> cases;
  {
    const SquareGeometry sg = build_square_geometry();
    cases.push_back({discretize_domain(sg.domain, 2, 3), sg.gamma});
  }
  cases.push_back({discretize_domain(mg.ring_inner, 3, 2),
                   {mg.gamma.begin(), mg.gamma.begin() + 4}});
  cases.push_back({discretize_domain(mg.ring_outer, 2, 2),
                   {mg.gamma.begin() + 4, mg.gamma.end()}});
  for (const auto& cs : cases) {
    Eigen::VectorXd coeffs(cs.d.space.num_global);
    for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = gauss(rng);
    for (const auto& arc : cs.gamma) {
      const TraceMap tm = trace_map(cs.d, arc);
      for (int k = 0; k < 50; ++k) {
        const double t = (k + 0.5) / 50.0;
        CHECK(std::abs(eval_trace(tm, t, coeffs) -
                       eval_domain_on_edge(cs.d, arc, t, coeffs)) <= 1e-13);
      }
    }
  }
}

TEST_CASE("trace mass: total boundary measure and per-row flux integrals") {
  const SquareGeometry sg = build_square_geometry();
  const int p = 2, level = 3;
  const DomainDiscretization d = discretize_domain(sg.domain, p, level);
  const BoundarySpace flux = flux_space_for(sg.gamma, p - 1, level);
  const Eigen::MatrixXd t_mat = assemble_trace_mass(
      sg.gamma, flux, traces_for(d, sg.gamma), d.space.num_global, 25);
  CHECK(t_mat.sum() == doctest::Approx(2.0).epsilon(1e-12));  // perimeter
  // Row sums are <psi_j, 1>: hat integrals scaled by the side length 1/2.
  const Eigen::VectorXd row_sums = t_mat.rowwise().sum();
  for (int arc = 0; arc < 4; ++arc) {
    const int off = flux.offset[arc];
    CHECK(row_sums[off + 0] == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
    CHECK(row_sums[off + 4] == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
    for (int j = 1; j < 4; ++j)
      CHECK(row_sums[off + j] == doctest::Approx(1.0 / 8.0).epsilon(1e-12));
  }
  // Interior basis functions never meet the boundary: their columns vanish.
  int nonzero_cols = 0;
  for (int c = 0; c < t_mat.cols(); ++c)
    if (t_mat.col(c).cwiseAbs().maxCoeff() > 1e-14) ++nonzero_cols;
  const int n1d = level + 1 + p;
  CHECK(nonzero_cols == 4 * n1d - 4);
}

TEST_CASE("trace mass on the inner coupling circle carries its exact length") {
  const MachineGeometry mg = build_machine_geometry();
  const std::vector<BoundaryCurve> gamma(mg.gamma.begin(), mg.gamma.begin() + 4);
  const int p = 2, level = 3;
  const DomainDiscretization d = discretize_domain(mg.ring_inner, p, level);
  const BoundarySpace flux = flux_space_for(gamma, p - 1, level);
  const Eigen::MatrixXd t_mat = assemble_trace_mass(
      gamma, flux, traces_for(d, gamma), d.space.num_global, 25);
  CHECK(t_mat.sum() == doctest::Approx(2.0 * pi * 0.39).epsilon(1e-12));
}

TEST_CASE("trace load against a boundary density") {
  const SquareGeometry sg = build_square_geometry();
  const DomainDiscretization d = discretize_domain(sg.domain, 2, 3);
  const auto traces = traces_for(d, sg.gamma);
  const Eigen::VectorXd zero = assemble_trace_load(
      sg.gamma, traces, d.space.num_global, [](const Vec2&) { return 0.0; }, 25);
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd one = assemble_trace_load(
      sg.gamma, traces, d.space.num_global, [](const Vec2&) { return 1.0; }, 25);
  CHECK(one.sum() == doctest::Approx(2.0).epsilon(1e-12));
  // Linear boundary data x integrates to zero over the symmetric square.
  const Eigen::VectorXd odd = assemble_trace_load(
      sg.gamma, traces, d.space.num_global, [](const Vec2& x) { return x[0]; }, 25);
  CHECK(std::abs(odd.sum()) <= 1e-14);
}

TEST_CASE("mismatched flux and trace grids are rejected") {
  const SquareGeometry sg = build_square_geometry();
  const DomainDiscretization d = discretize_domain(sg.domain, 2, 3);
  const BoundarySpace flux = flux_space_for(sg.gamma, 1, 4);  // finer than traces
  CHECK_THROWS_AS(assemble_trace_mass(sg.gamma, flux, traces_for(d, sg.gamma),
                                      d.space.num_global, 25),
                  std::invalid_argument);
}

TEST_CASE("free-dof restriction and expansion round-trip") {
  const MachineGeometry mg = build_machine_geometry();
  const DomainDiscretization d = discretize_domain(mg.ring_inner, 2, 2);
  std::mt19937 rng(19);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd x_free(d.space.num_free);
  for (int i = 0; i < x_free.size(); ++i) x_free[i] = gauss(rng);
  const Eigen::VectorXd x_glob = expand_free(d.space, x_free);
  CHECK((restrict_vector(d.space, x_glob) - x_free).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < d.space.num_global; ++i)
    if (d.space.free_index[i] < 0) CHECK(x_glob[i] == 0.0);
  // Column restriction keeps free columns in slot order.
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(3, d.space.num_global);
  const Eigen::MatrixXd mc = restrict_cols(d.space, m);
  REQUIRE(mc.cols() == d.space.num_free);
  for (int i = 0; i < d.space.num_global; ++i)
    if (d.space.free_index[i] >= 0)
      CHECK((mc.col(d.space.free_index[i]) - m.col(i)).cwiseAbs().maxCoeff() == 0.0);
}
