#include "polyhedra.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace agv {

PolyhedronH::PolyhedronH(Matrix a_, Vector b_) : a(std::move(a_)), b(std::move(b_)) {
  if (a.rows() != b.size()) throw std::invalid_argument("PolyhedronH: row/offset mismatch");
  if (a.cols() < 1) throw std::invalid_argument("PolyhedronH: ambient dimension must be >= 1");
}

PolyhedronV::PolyhedronV(Matrix f_, Matrix g_) : f(std::move(f_)), g(std::move(g_)) {
  if (f.cols() < 1) throw std::invalid_argument("PolyhedronV: needs at least one vertex generator");
  if (g.size() == 0) g = Matrix(f.rows(), 0);
  if (g.rows() != f.rows()) throw std::invalid_argument("PolyhedronV: generator dimension mismatch");
}

ShiftOperators ShiftOperators::make(int block_size, int blocks) {
  if (block_size < 1 || blocks < 1) throw std::invalid_argument("ShiftOperators: bad sizes");
  const int n = block_size * blocks;
  ShiftOperators ops;
  ops.block_size = block_size;
  ops.blocks = blocks;
  ops.t_shift = Matrix::Zero(n, n);
  for (int blk = 0; blk + 1 < blocks; ++blk)
    ops.t_shift.block(blk * block_size, (blk + 1) * block_size, block_size, block_size)
        .setIdentity();
  ops.k_embed = Matrix::Zero(n, block_size);
  ops.k_embed.bottomRows(block_size).setIdentity();
  return ops;
}

bool contains_point(const PolyhedronH& p, const Vector& z, double tol) {
  if (z.size() != p.dim()) throw std::invalid_argument("contains_point: dimension mismatch");
  if (p.rows() == 0) return true;
  return ((p.a * z - p.b).array() <= tol).all();
}

static LinearProgram feasibility_lp(const PolyhedronH& p) {
  LinearProgram lp;
  lp.num_vars = p.dim();
  lp.objective = Vector::Zero(p.dim());
  lp.a_ub = p.a;
  lp.b_ub = p.b;
  lp.a_eq = Matrix(0, p.dim());
  lp.b_eq = Vector(0);
  return lp;
}

bool is_empty(const PolyhedronH& p, const Tolerances& tol) {
  if (p.rows() == 0) return false;
  const LpOutcome r = lp_solve(feasibility_lp(p), tol);
  if (r.status == LpStatus::NumericalFailure)
    throw SolverError("emptiness check failed: " + r.detail);
  return r.status == LpStatus::Infeasible;
}

LpOutcome maximize_over(const PolyhedronH& p, const Vector& c, const Tolerances& tol) {
  LinearProgram lp = feasibility_lp(p);
  lp.objective = c;
  LpOutcome r = lp_solve(lp, tol);
  if (r.status == LpStatus::NumericalFailure)
    throw SolverError("polyhedron LP failed: " + r.detail);
  return r;
}

bool inclusion_h(const PolyhedronH& s1, const PolyhedronH& s2, const Tolerances& tol) {
  if (s1.dim() != s2.dim()) throw std::invalid_argument("inclusion_h: dimension mismatch");
  if (is_empty(s1, tol)) return true;
  if (s2.rows() == 0) return true;

  std::vector<Vector> objectives;
  objectives.reserve(s2.rows());
  for (int j = 0; j < s2.rows(); ++j) objectives.push_back(s2.a.row(j).transpose());
  const auto results = lp_solve_family(feasibility_lp(s1), objectives, tol);
  for (int j = 0; j < s2.rows(); ++j) {
    const LpOutcome& r = results[j];
    if (r.status == LpStatus::Unbounded) return false;
    if (r.status == LpStatus::NumericalFailure)
      throw SolverError("inclusion_h: solver failure on row " + std::to_string(j) + ": " +
                        r.detail);
    if (r.status == LpStatus::Infeasible)
      throw SolverError("inclusion_h: inconsistent feasibility on row " + std::to_string(j));
    if (r.value - s2.b(j) > tol.lp_tol) return false;
  }
  return true;
}

bool inclusion_v(const PolyhedronV& s1, const PolyhedronV& s2, const Tolerances& tol) {
  if (s1.dim() != s2.dim()) throw std::invalid_argument("inclusion_v: dimension mismatch");
  const int d = s1.dim();
  const int n2v = static_cast<int>(s2.f.cols());
  const int n2r = static_cast<int>(s2.g.cols());

  // Columns of F1 must be expressible as F2 lambda + G2 theta with a convex
  // lambda; columns of G1 must lie in the cone of G2.
  for (int c = 0; c < s1.f.cols(); ++c) {
    LinearProgram lp;
    lp.num_vars = n2v + n2r;
    lp.objective = Vector::Zero(lp.num_vars);
    lp.a_ub = Matrix(0, lp.num_vars);
    lp.b_ub = Vector(0);
    lp.a_eq = Matrix(d + 1, lp.num_vars);
    lp.a_eq.setZero();
    lp.a_eq.block(0, 0, d, n2v) = s2.f;
    if (n2r > 0) lp.a_eq.block(0, n2v, d, n2r) = s2.g;
    lp.a_eq.row(d).head(n2v).setOnes();
    lp.b_eq = Vector(d + 1);
    lp.b_eq.head(d) = s1.f.col(c);
    lp.b_eq(d) = 1.0;
    lp.lower.assign(lp.num_vars, 0.0);
    const LpOutcome r = lp_solve(lp, tol);
    if (r.status == LpStatus::NumericalFailure)
      throw SolverError("inclusion_v: solver failure on vertex " + std::to_string(c));
    if (r.status != LpStatus::Optimal) return false;
  }
  for (int c = 0; c < s1.g.cols(); ++c) {
    const Vector ray = s1.g.col(c);
    if (ray.norm() <= tol.lp_tol) continue;
    if (n2r == 0) return false;
    LinearProgram lp;
    lp.num_vars = n2r;
    lp.objective = Vector::Zero(n2r);
    lp.a_ub = Matrix(0, n2r);
    lp.b_ub = Vector(0);
    lp.a_eq = s2.g;
    lp.b_eq = ray;
    lp.lower.assign(n2r, 0.0);
    const LpOutcome r = lp_solve(lp, tol);
    if (r.status == LpStatus::NumericalFailure)
      throw SolverError("inclusion_v: solver failure on ray " + std::to_string(c));
    if (r.status != LpStatus::Optimal) return false;
  }
  return true;
}

namespace {

// Drops rows that are trivially satisfied and normalizes row scales.
// A row 0'z <= b with b < 0 encodes emptiness and is kept.
void tidy_rows(std::vector<Vector>& rows, std::vector<double>& off, double tol) {
  std::vector<Vector> nr;
  std::vector<double> nb;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double amax = rows[i].size() ? rows[i].cwiseAbs().maxCoeff() : 0.0;
    if (amax <= tol) {
      if (off[i] < -tol) {
        nr.push_back(rows[i]);
        nb.push_back(off[i]);
      }
      continue;
    }
    nr.push_back(rows[i] / amax);
    nb.push_back(off[i] / amax);
  }
  rows.swap(nr);
  off.swap(nb);
}

// Removes rows implied by the others (per-row LP check).
void prune_redundant(std::vector<Vector>& rows, std::vector<double>& off, const Tolerances& tol) {
  if (rows.size() <= 1) return;
  std::vector<bool> keep(rows.size(), true);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<Vector> others;
    std::vector<double> ob;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (j == i || !keep[j]) continue;
      others.push_back(rows[j]);
      ob.push_back(off[j]);
    }
    if (others.empty()) break;
    // relax row i by one unit so duplicates of it still get detected
    others.push_back(rows[i]);
    ob.push_back(off[i] + 1.0);
    LinearProgram lp;
    lp.num_vars = static_cast<int>(rows[i].size());
    lp.objective = rows[i];
    lp.a_ub = Matrix(others.size(), lp.num_vars);
    lp.b_ub = Vector(others.size());
    for (std::size_t j = 0; j < others.size(); ++j) {
      lp.a_ub.row(j) = others[j].transpose();
      lp.b_ub(j) = ob[j];
    }
    lp.a_eq = Matrix(0, lp.num_vars);
    lp.b_eq = Vector(0);
    const LpOutcome r = lp_solve(lp, tol);
    if (r.status == LpStatus::Optimal && r.value <= off[i] + tol.lp_tol) keep[i] = false;
  }
  std::vector<Vector> nr;
  std::vector<double> nb;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (keep[i]) {
      nr.push_back(rows[i]);
      nb.push_back(off[i]);
    }
  rows.swap(nr);
  off.swap(nb);
}

}  // namespace

PolyhedronH fm_eliminate(const PolyhedronH& p, const std::vector<int>& drop,
                         const Tolerances& tol) {
  const int d = p.dim();
  std::set<int> dropset(drop.begin(), drop.end());
  for (int j : drop)
    if (j < 0 || j >= d) throw std::invalid_argument("fm_eliminate: column index out of range");

  std::vector<Vector> rows;
  std::vector<double> off;
  for (int i = 0; i < p.rows(); ++i) {
    rows.push_back(p.a.row(i).transpose());
    off.push_back(p.b(i));
  }
  tidy_rows(rows, off, tol.lp_tol);

  const std::size_t start_rows = std::max<std::size_t>(rows.size(), 8);
  for (int j : dropset) {
    std::vector<std::size_t> pos, neg, zero;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double a = rows[i](j);
      if (a > tol.lp_tol)
        pos.push_back(i);
      else if (a < -tol.lp_tol)
        neg.push_back(i);
      else
        zero.push_back(i);
    }
    std::vector<Vector> next;
    std::vector<double> nb;
    for (std::size_t i : zero) {
      next.push_back(rows[i]);
      nb.push_back(off[i]);
    }
    for (std::size_t ip : pos)
      for (std::size_t in : neg) {
        const double ap = rows[ip](j);
        const double an = -rows[in](j);
        Vector r = an * rows[ip] + ap * rows[in];
        r(j) = 0.0;
        next.push_back(r);
        nb.push_back(an * off[ip] + ap * off[in]);
      }
    rows.swap(next);
    off.swap(nb);
    tidy_rows(rows, off, tol.lp_tol);
    // prune only when growth would make the next elimination expensive
    if (rows.size() > std::max<std::size_t>(2 * start_rows, 64)) prune_redundant(rows, off, tol);
  }

  std::vector<int> kept;
  for (int j = 0; j < d; ++j)
    if (!dropset.count(j)) kept.push_back(j);
  if (kept.empty()) throw std::invalid_argument("fm_eliminate: cannot drop every coordinate");

  prune_redundant(rows, off, tol);
  Matrix A(rows.size(), kept.size());
  Vector b(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < kept.size(); ++c) A(i, c) = rows[i](kept[c]);
    b(i) = off[i];
  }
  return PolyhedronH(std::move(A), std::move(b));
}

PolyhedronH sum_with_column_span(const PolyhedronH& p, const Matrix& k, const Tolerances& tol) {
  if (k.rows() != p.dim()) throw std::invalid_argument("sum_with_column_span: K row mismatch");
  if (k.cols() == 0) return fm_eliminate(p, {}, tol);
  const int d = p.dim();
  const int kc = static_cast<int>(k.cols());
  Matrix lifted(p.rows(), d + kc);
  lifted.leftCols(d) = p.a;
  lifted.rightCols(kc) = -p.a * k;
  std::vector<int> drop;
  for (int j = 0; j < kc; ++j) drop.push_back(d + j);
  return fm_eliminate(PolyhedronH(std::move(lifted), p.b), drop, tol);
}

static PolyhedronH window_set(const std::vector<Matrix>& blocks, const Vector& rhs) {
  const int m1 = static_cast<int>(blocks.size());
  if (m1 < 1) throw std::invalid_argument("window_set: no blocks");
  const int nd = static_cast<int>(blocks[0].cols());
  const int na = static_cast<int>(blocks[0].rows());
  for (const auto& blk : blocks)
    if (blk.rows() != na || blk.cols() != nd)
      throw std::invalid_argument("window_set: inconsistent block shapes");
  if (rhs.size() != na) throw std::invalid_argument("window_set: rhs size mismatch");
  Matrix A(na, m1 * nd);
  for (int r = 0; r < m1; ++r) A.middleCols(r * nd, nd) = blocks[r];
  return PolyhedronH(std::move(A), rhs);
}

bool extendability_check(const std::vector<Matrix>& assumption_blocks, const Vector& a0,
                         const Tolerances& tol) {
  const PolyhedronH s_minus = window_set(assumption_blocks, a0);
  const int m = static_cast<int>(assumption_blocks.size()) - 1;
  const int nd = static_cast<int>(assumption_blocks[0].cols());
  if (m < 0) throw std::invalid_argument("extendability_check: no blocks");
  if (is_empty(s_minus, tol)) return true;

  // Sufficient witness first: repeating the newest sample stays feasible.
  // One inclusion test, no projection.
  {
    std::vector<Matrix> shifted(m + 1, Matrix::Zero(a0.size(), nd));
    for (int r = 0; r + 1 <= m; ++r) shifted[r + 1] = assumption_blocks[r];
    shifted[m] += assumption_blocks[m];
    if (inclusion_h(s_minus, window_set(shifted, a0), tol)) return true;
  }

  const int dim = (m + 1) * nd;
  if (dim > 24)
    throw SolverError("extendability_check: exact projection intractable at window dimension " +
                      std::to_string(dim) + " and the constant-extension witness failed");

  // Exact test via the shift-operator characterization: T S_- must be
  // contained in S_- + Im K.  T S_- is the projection of S_- onto blocks
  // 1..m padded with a zero last block.
  std::vector<int> drop_first;
  for (int j = 0; j < nd; ++j) drop_first.push_back(j);
  const PolyhedronH proj = fm_eliminate(s_minus, drop_first, tol);  // over (u_1..u_m)

  Matrix A = Matrix::Zero(proj.rows() + 2 * nd, dim);
  Vector b(proj.rows() + 2 * nd);
  A.block(0, 0, proj.rows(), m * nd) = proj.a;
  b.head(proj.rows()) = proj.b;
  A.block(proj.rows(), m * nd, nd, nd).setIdentity();
  A.block(proj.rows() + nd, m * nd, nd, nd) = -Matrix::Identity(nd, nd);
  b.tail(2 * nd).setZero();
  const PolyhedronH t_image(std::move(A), std::move(b));

  const ShiftOperators ops = ShiftOperators::make(nd, m + 1);
  const PolyhedronH target = sum_with_column_span(s_minus, ops.k_embed, tol);
  return inclusion_h(t_image, target, tol);
}

double interior_ball_radius_at_origin(const PolyhedronH& p) {
  if (p.rows() == 0) return std::numeric_limits<double>::infinity();
  double r = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.rows(); ++i) {
    const double an = p.a.row(i).norm();
    if (an <= 0) {
      if (p.b(i) < 0) return -std::numeric_limits<double>::infinity();
      continue;
    }
    r = std::min(r, p.b(i) / an);
  }
  return r;
}

bool h_polyhedron_bounded(const PolyhedronH& p, const Tolerances& tol) {
  const int d = p.dim();
  if (p.rows() == 0) return false;
  for (int j = 0; j < d; ++j) {
    for (double sgn : {1.0, -1.0}) {
      LinearProgram lp;
      lp.num_vars = d;
      lp.objective = Vector::Zero(d);
      lp.objective(j) = sgn;
      lp.a_ub = p.a;
      lp.b_ub = Vector::Zero(p.rows());
      lp.a_eq = Matrix(0, d);
      lp.b_eq = Vector(0);
      lp.lower.assign(d, -1.0);
      lp.upper.assign(d, 1.0);
      const LpOutcome r = lp_solve(lp, tol);
      if (r.status == LpStatus::NumericalFailure)
        throw SolverError("boundedness check failed: " + r.detail);
      if (r.status == LpStatus::Optimal && r.value > 1e-7) return false;
    }
  }
  return true;
}

}  // namespace agv
