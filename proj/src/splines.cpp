#include "fembem/splines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fembem {

KnotVector::KnotVector(std::vector<double> knots, int degree)
    : knots_(std::move(knots)), degree_(degree) {
  const int n = static_cast<int>(knots_.size());
  if (degree_ < 0) throw std::invalid_argument("KnotVector: negative degree");
  if (n < 2 * (degree_ + 1)) throw std::invalid_argument("KnotVector: too few knots");
  for (int i = 1; i < n; ++i)
    if (knots_[i] < knots_[i - 1]) throw std::invalid_argument("KnotVector: not non-decreasing");
  for (int i = 0; i <= degree_; ++i) {
    if (knots_[i] != 0.0) throw std::invalid_argument("KnotVector: not p-open at 0");
    if (knots_[n - 1 - i] != 1.0) throw std::invalid_argument("KnotVector: not p-open at 1");
  }
  const int max_mult = std::max(degree_, 1);
  int run = 1;
  for (int i = degree_ + 1; i <= n - degree_ - 2; ++i) {
    if (knots_[i] <= 0.0 || knots_[i] >= 1.0)
      throw std::invalid_argument("KnotVector: interior knot outside (0,1)");
    run = (i > degree_ + 1 && knots_[i] == knots_[i - 1]) ? run + 1 : 1;
    if (run > max_mult) throw std::invalid_argument("KnotVector: interior multiplicity too high");
  }
  theta_ = 1.0;
  const std::vector<double> bp = breakpoints();
  for (std::size_t i = 2; i < bp.size(); ++i) {
    const double left = bp[i - 1] - bp[i - 2];
    const double right = bp[i] - bp[i - 1];
    theta_ = std::max({theta_, left / right, right / left});
  }
}

int KnotVector::find_span(double x) const {
  const int n = static_cast<int>(knots_.size());
  const int lo = degree_;
  const int hi = n - degree_ - 2;
  if (x >= knots_[hi + 1]) return hi;
  if (x <= knots_[lo]) return lo;
  int a = lo, b = hi;
  while (a < b) {
    const int mid = (a + b + 1) / 2;
    if (knots_[mid] <= x)
      a = mid;
    else
      b = mid - 1;
  }
  return a;
}

std::vector<double> KnotVector::breakpoints() const {
  std::vector<double> bp;
  for (double k : knots_)
    if (bp.empty() || k > bp.back()) bp.push_back(k);
  return bp;
}

KnotVector make_open_knots(const std::vector<double>& breakpoints, int degree) {
  std::vector<double> knots(degree + 1, 0.0);
  for (std::size_t i = 1; i + 1 < breakpoints.size(); ++i) knots.push_back(breakpoints[i]);
  knots.insert(knots.end(), degree + 1, 1.0);
  return KnotVector(std::move(knots), degree);
}

KnotVector refine_spans(const KnotVector& kv, int pieces) {
  if (pieces < 1) throw std::invalid_argument("refine_spans: pieces must be positive");
  const std::vector<double> bp = kv.breakpoints();
  std::vector<double> knots;
  const std::vector<double>& old = kv.knots();
  std::size_t pos = 0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    while (pos < old.size() && old[pos] <= bp[i]) knots.push_back(old[pos++]);
    for (int j = 1; j < pieces; ++j)
      knots.push_back(bp[i] + (bp[i + 1] - bp[i]) * j / pieces);
  }
  while (pos < old.size()) knots.push_back(old[pos++]);
  return KnotVector(std::move(knots), kv.degree());
}

KnotVector insert_midpoints(const KnotVector& kv) { return refine_spans(kv, 2); }

namespace {

// Cox-de Boor value of b_i^q over the given knots; 0/0 terms are zero.
double cox_de_boor(const std::vector<double>& knots, int span, int q, int i, double x) {
  std::vector<double> N(q + 1);
  for (int r = 0; r <= q; ++r) N[r] = (i + r == span) ? 1.0 : 0.0;
  for (int d = 1; d <= q; ++d) {
    for (int r = 0; r <= q - d; ++r) {
      const double den1 = knots[i + r + d] - knots[i + r];
      const double den2 = knots[i + r + d + 1] - knots[i + r + 1];
      double v = 0.0;
      if (den1 > 0.0) v += (x - knots[i + r]) / den1 * N[r];
      if (den2 > 0.0) v += (knots[i + r + d + 1] - x) / den2 * N[r + 1];
      N[r] = v;
    }
  }
  return N[0];
}

void check_args(const SplineSpace1D& space, int i, double x) {
  if (i < 0 || i >= space.dimension()) throw std::out_of_range("basis index out of range");
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("parameter outside [0,1]");
}

}  // namespace

double eval_basis(const SplineSpace1D& space, int i, double x) {
  check_args(space, i, x);
  const KnotVector& kv = space.kv;
  return cox_de_boor(kv.knots(), kv.find_span(x), kv.degree(), i, x);
}

double eval_basis_derivative(const SplineSpace1D& space, int i, double x) {
  check_args(space, i, x);
  const KnotVector& kv = space.kv;
  const int p = kv.degree();
  if (p == 0) return 0.0;
  const std::vector<double>& knots = kv.knots();
  const int span = kv.find_span(x);
  const double den1 = knots[i + p] - knots[i];
  const double den2 = knots[i + p + 1] - knots[i + 1];
  double d = 0.0;
  if (den1 > 0.0) d += cox_de_boor(knots, span, p - 1, i, x) / den1;
  if (den2 > 0.0) d -= cox_de_boor(knots, span, p - 1, i + 1, x) / den2;
  return p * d;
}

void eval_basis_all(const KnotVector& kv, double x, int& first, double* values) {
  const int p = kv.degree();
  const std::vector<double>& knots = kv.knots();
  const int span = kv.find_span(x);
  first = span - p;
  values[0] = 1.0;
  std::vector<double> left(p + 1), right(p + 1);
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots[span + 1 - j];
    right[j] = knots[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = values[r] / (right[r + 1] + left[j - r]);
      values[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    values[j] = saved;
  }
}

void eval_basis_all_derivs(const KnotVector& kv, double x, int& first,
                           double* values, double* derivs) {
  const int p = kv.degree();
  const std::vector<double>& knots = kv.knots();
  const int span = kv.find_span(x);
  first = span - p;
  if (p == 0) {
    values[0] = 1.0;
    derivs[0] = 0.0;
    return;
  }
  // Degree p-1 values share the span; their first index is span-p+1.
  std::vector<double> lower(p);
  {
    lower[0] = 1.0;
    std::vector<double> left(p), right(p);
    for (int j = 1; j <= p - 1; ++j) {
      left[j] = x - knots[span + 1 - j];
      right[j] = knots[span + j] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double temp = lower[r] / (right[r + 1] + left[j - r]);
        lower[r] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      lower[j] = saved;
    }
  }
  for (int k = 0; k <= p; ++k) {
    const int j = first + k;
    double d = 0.0;
    const double den1 = knots[j + p] - knots[j];
    const double den2 = knots[j + p + 1] - knots[j + 1];
    if (k > 0 && den1 > 0.0) d += lower[k - 1] / den1;
    if (k < p && den2 > 0.0) d -= lower[k] / den2;
    derivs[k] = p * d;
  }
  eval_basis_all(kv, x, first, values);
}

std::vector<double> greville_points(const SplineSpace1D& space) {
  const KnotVector& kv = space.kv;
  const int p = kv.degree();
  const std::vector<double>& knots = kv.knots();
  std::vector<double> pts(space.dimension());
  for (int i = 0; i < space.dimension(); ++i) {
    if (p == 0) {
      pts[i] = 0.5 * (knots[i] + knots[i + 1]);
    } else {
      double acc = 0.0;
      for (int j = 1; j <= p; ++j) acc += knots[i + j];
      pts[i] = acc / p;
    }
  }
  return pts;
}

Eigen::MatrixXd insertion_matrix(const KnotVector& coarse, const KnotVector& fine) {
  if (coarse.degree() != fine.degree())
    throw std::invalid_argument("insertion_matrix: degree mismatch");
  const int p = coarse.degree();
  std::vector<double> current = coarse.knots();
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(coarse.num_basis(), coarse.num_basis());

  // Multiset difference fine \ coarse, taken in increasing order.
  std::vector<double> to_insert;
  {
    const std::vector<double>& f = fine.knots();
    std::size_t ci = 0;
    for (double u : f) {
      if (ci < current.size() && current[ci] == u)
        ++ci;
      else
        to_insert.push_back(u);
    }
    if (ci != current.size())
      throw std::invalid_argument("insertion_matrix: fine knots do not contain coarse knots");
  }

  for (double u : to_insert) {
    // Span with current[k] <= u < current[k+1].
    int k = static_cast<int>(std::upper_bound(current.begin(), current.end(), u) -
                             current.begin()) - 1;
    const int old_dim = static_cast<int>(M.rows());
    Eigen::MatrixXd next(old_dim + 1, M.cols());
    for (int i = 0; i <= old_dim; ++i) {
      if (i <= k - p) {
        next.row(i) = M.row(i);
      } else if (i <= k) {
        const double alpha = (u - current[i]) / (current[i + p] - current[i]);
        next.row(i) = alpha * M.row(i) + (1.0 - alpha) * M.row(i - 1);
      } else {
        next.row(i) = M.row(i - 1);
      }
    }
    M = std::move(next);
    current.insert(current.begin() + k + 1, u);
  }
  return M;
}

SplineSpace1D h_refine(const SplineSpace1D& space, int level) {
  if (level < 0) throw std::invalid_argument("h_refine: negative level");
  return SplineSpace1D{refine_spans(space.kv, level + 1)};
}

SplineSpace2D h_refine(const SplineSpace2D& space, int level) {
  if (level < 0) throw std::invalid_argument("h_refine: negative level");
  return SplineSpace2D{refine_spans(space.knot_u, level + 1),
                       refine_spans(space.knot_v, level + 1)};
}

std::vector<int> edge_dof_indices(const SplineSpace2D& space, PatchEdge edge) {
  const int nu = space.dim_u();
  const int nv = space.dim_v();
  std::vector<int> out;
  switch (edge) {
    case PatchEdge::south:
      for (int iu = 0; iu < nu; ++iu) out.push_back(space.index(iu, 0));
      break;
    case PatchEdge::north:
      for (int iu = 0; iu < nu; ++iu) out.push_back(space.index(iu, nv - 1));
      break;
    case PatchEdge::west:
      for (int iv = 0; iv < nv; ++iv) out.push_back(space.index(0, iv));
      break;
    case PatchEdge::east:
      for (int iv = 0; iv < nv; ++iv) out.push_back(space.index(nu - 1, iv));
      break;
  }
  return out;
}

namespace {

const KnotVector& edge_knots(const SplineSpace2D& space, PatchEdge edge) {
  return (edge == PatchEdge::south || edge == PatchEdge::north) ? space.knot_u
                                                                : space.knot_v;
}

bool knots_match(const KnotVector& a, const KnotVector& b) {
  if (a.degree() != b.degree() || a.knots().size() != b.knots().size()) return false;
  for (std::size_t i = 0; i < a.knots().size(); ++i)
    if (std::abs(a.knots()[i] - b.knots()[i]) > 1e-12) return false;
  return true;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

DomainSpace build_domain_space(std::vector<SplineSpace2D> spaces,
                               const std::vector<InterfaceId>& interfaces,
                               const std::vector<BoundaryEdgeId>& dirichlet_edges) {
  DomainSpace ds;
  ds.patch_spaces = std::move(spaces);
  const int np = static_cast<int>(ds.patch_spaces.size());
  std::vector<int> patch_offset(np + 1, 0);
  for (int p = 0; p < np; ++p)
    patch_offset[p + 1] = patch_offset[p] + ds.patch_spaces[p].dimension();
  UnionFind uf(patch_offset[np]);

  for (const InterfaceId& itf : interfaces) {
    const SplineSpace2D& sa = ds.patch_spaces[itf.patch_a];
    const SplineSpace2D& sb = ds.patch_spaces[itf.patch_b];
    if (!knots_match(edge_knots(sa, itf.edge_a), edge_knots(sb, itf.edge_b)))
      throw std::invalid_argument("build_domain_space: interface knot vectors differ");
    std::vector<int> da = edge_dof_indices(sa, itf.edge_a);
    std::vector<int> db = edge_dof_indices(sb, itf.edge_b);
    if (itf.reversed) std::reverse(db.begin(), db.end());
    for (std::size_t i = 0; i < da.size(); ++i)
      uf.unite(patch_offset[itf.patch_a] + da[i], patch_offset[itf.patch_b] + db[i]);
  }

  std::vector<int> root_to_global(patch_offset[np], -1);
  ds.global_index.resize(np);
  ds.num_global = 0;
  for (int p = 0; p < np; ++p) {
    const int dim = ds.patch_spaces[p].dimension();
    ds.global_index[p].resize(dim);
    for (int l = 0; l < dim; ++l) {
      const int root = uf.find(patch_offset[p] + l);
      if (root_to_global[root] < 0) root_to_global[root] = ds.num_global++;
      ds.global_index[p][l] = root_to_global[root];
    }
  }

  ds.dirichlet.assign(ds.num_global, 0);
  for (const BoundaryEdgeId& be : dirichlet_edges)
    for (int l : edge_dof_indices(ds.patch_spaces[be.patch], be.edge))
      ds.dirichlet[ds.global_index[be.patch][l]] = 1;

  ds.free_index.assign(ds.num_global, -1);
  ds.num_free = 0;
  for (int g = 0; g < ds.num_global; ++g)
    if (!ds.dirichlet[g]) ds.free_index[g] = ds.num_free++;
  return ds;
}

BoundarySpace build_boundary_space(std::vector<SplineSpace1D> spaces) {
  BoundarySpace bs;
  bs.patch_spaces = std::move(spaces);
  bs.offset.resize(bs.patch_spaces.size());
  bs.total_dimension = 0;
  for (std::size_t p = 0; p < bs.patch_spaces.size(); ++p) {
    bs.offset[p] = bs.total_dimension;
    bs.total_dimension += bs.patch_spaces[p].dimension();
  }
  return bs;
}

}  // namespace fembem
