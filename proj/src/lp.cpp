#include "lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace agv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The pivot loop works on rows; keep them contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Canonical form: every structural variable is split x_j = x+_j - x-_j,
// finite bounds become inequality rows, every inequality row gets a slack.
// Rows are sign-normalized so the right-hand side is nonnegative; rows that
// lose their +1 slack in the process (and all equality rows) get an
// artificial variable for phase 1.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const Tolerances& tol, bool bland_from_start)
      : tol_(tol), bland_always_(bland_from_start) {
    build(lp);
  }

  // Phase 1.  Returns false when the region is empty.
  bool make_feasible() {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (int j : artificials_) cost_[j] = -1.0;
    recompute_cost_row();
    const Iterate it = iterate(/*phase1=*/true);
    if (it == Iterate::IterationLimit) {
      fail_detail_ = "phase 1 iteration limit";
      feasible_ = false;
      failed_ = true;
      return false;
    }
    // Optimal phase-1 value is -(sum of artificials); zero means feasible.
    const double infeas = -objective_value();
    if (infeas > 1e-7 * (1.0 + rhs_scale_)) {
      feasible_ = false;
      return false;
    }
    pivot_out_artificials();
    for (int j : artificials_) allowed_[j] = false;
    feasible_ = true;
    return true;
  }

  // Phase 2 for the given structural objective (maximize).
  LpStatus optimize(const Vector& objective) {
    if (failed_) return LpStatus::NumericalFailure;
    if (!feasible_) return LpStatus::Infeasible;
    std::fill(cost_.begin(), cost_.end(), 0.0);
    double cmax = 0.0;
    for (int j = 0; j < nvars_; ++j) cmax = std::max(cmax, std::abs(objective(j)));
    const double cscale = cmax > 0 ? 1.0 / cmax : 1.0;
    for (int j = 0; j < nvars_; ++j) {
      cost_[2 * j] = objective(j) * cscale;
      cost_[2 * j + 1] = -objective(j) * cscale;
    }
    recompute_cost_row();
    switch (iterate(/*phase1=*/false)) {
      case Iterate::Optimal: return LpStatus::Optimal;
      case Iterate::Unbounded: return LpStatus::Unbounded;
      case Iterate::IterationLimit:
        fail_detail_ = "phase 2 iteration limit";
        failed_ = true;
        return LpStatus::NumericalFailure;
    }
    return LpStatus::NumericalFailure;
  }

  Vector extract_point() const {
    Vector x = Vector::Zero(nvars_);
    for (int r = 0; r < m_; ++r) {
      const int j = basis_[r];
      if (j < 2 * nvars_) {
        const double v = tableau_(r, rhs_col_);
        if (j % 2 == 0)
          x(j / 2) += v;
        else
          x(j / 2) -= v;
      }
    }
    return x;
  }

  const std::string& fail_detail() const { return fail_detail_; }

 private:
  enum class Iterate { Optimal, Unbounded, IterationLimit };

  void build(const LinearProgram& lp) {
    nvars_ = lp.num_vars;
    // Collect rows: inequalities (incl. finite bounds), then equalities.
    std::vector<Vector> rows;
    std::vector<double> rhs;
    std::vector<bool> is_eq;
    auto add_row = [&](const Vector& a, double b, bool eq) {
      rows.push_back(a);
      rhs.push_back(b);
      is_eq.push_back(eq);
    };
    for (Eigen::Index i = 0; i < lp.a_ub.rows(); ++i)
      add_row(lp.a_ub.row(i).transpose(), lp.b_ub(i), false);
    if (!lp.lower.empty())
      for (int j = 0; j < nvars_; ++j)
        if (lp.lower[j] > -kInf) {
          Vector a = Vector::Zero(nvars_);
          a(j) = -1.0;
          add_row(a, -lp.lower[j], false);
        }
    if (!lp.upper.empty())
      for (int j = 0; j < nvars_; ++j)
        if (lp.upper[j] < kInf) {
          Vector a = Vector::Zero(nvars_);
          a(j) = 1.0;
          add_row(a, lp.upper[j], false);
        }
    for (Eigen::Index i = 0; i < lp.a_eq.rows(); ++i)
      add_row(lp.a_eq.row(i).transpose(), lp.b_eq(i), true);

    m_ = static_cast<int>(rows.size());
    const int n_ineq = m_ - static_cast<int>(lp.a_eq.rows());
    // Column layout: [x+ x- | slacks | artificials | rhs].
    slack_col0_ = 2 * nvars_;
    art_col0_ = slack_col0_ + n_ineq;

    // First pass: which rows need artificials?
    std::vector<int> art_rows;
    for (int r = 0; r < m_; ++r)
      if (is_eq[r] || rhs[r] < 0) art_rows.push_back(r);
    ncols_ = art_col0_ + static_cast<int>(art_rows.size());
    rhs_col_ = ncols_;

    tableau_ = RowMatrix::Zero(m_, ncols_ + 1);
    basis_.assign(m_, -1);
    allowed_.assign(ncols_, true);
    rhs_scale_ = 0.0;

    int slack = slack_col0_, art = art_col0_;
    for (int r = 0; r < m_; ++r) {
      double rmax = rows[r].size() > 0 ? rows[r].cwiseAbs().maxCoeff() : 0.0;
      rmax = std::max(rmax, std::abs(rhs[r]));
      const double s = rmax > 0 ? 1.0 / rmax : 1.0;
      double sign = 1.0;
      if (rhs[r] < 0) sign = -1.0;
      for (int j = 0; j < nvars_; ++j) {
        const double v = rows[r](j) * s * sign;
        tableau_(r, 2 * j) = v;
        tableau_(r, 2 * j + 1) = -v;
      }
      if (!is_eq[r]) tableau_(r, slack) = sign;  // slack rescaled along with the row
      tableau_(r, rhs_col_) = rhs[r] * s * sign;
      rhs_scale_ = std::max(rhs_scale_, tableau_(r, rhs_col_));
      if (is_eq[r] || sign < 0) {
        tableau_(r, art) = 1.0;
        basis_[r] = art;
        ++art;
      } else {
        basis_[r] = slack;
      }
      if (!is_eq[r]) ++slack;
    }
    for (int j = art_col0_; j < ncols_; ++j) artificials_.push_back(j);
    cost_.assign(ncols_, 0.0);
    cost_row_ = Eigen::RowVectorXd::Zero(ncols_ + 1);
    iteration_cap_ = std::max(5000, 8 * (m_ + ncols_));
  }

  void recompute_cost_row() {
    cost_row_.setZero();
    for (int j = 0; j < ncols_; ++j) cost_row_(j) = cost_[j];
    for (int r = 0; r < m_; ++r) {
      const double cb = cost_[basis_[r]];
      if (cb != 0.0) cost_row_ -= cb * tableau_.row(r);
    }
  }

  double objective_value() const { return -cost_row_(rhs_col_); }

  void pivot(int row, int col) {
    tableau_.row(row) /= tableau_(row, col);
    for (int r = 0; r < m_; ++r) {
      if (r == row) continue;
      const double f = tableau_(r, col);
      if (f != 0.0) tableau_.row(r) -= f * tableau_.row(row);
    }
    const double fc = cost_row_(col);
    if (fc != 0.0) cost_row_ -= fc * tableau_.row(row);
    basis_[row] = col;
  }

  int choose_entering(bool bland) const {
    const double rc_tol = 1e-9;
    if (bland) {
      for (int j = 0; j < ncols_; ++j)
        if (allowed_[j] && cost_row_(j) > rc_tol) return j;
      return -1;
    }
    int best = -1;
    double best_rc = rc_tol;
    for (int j = 0; j < ncols_; ++j)
      if (allowed_[j] && cost_row_(j) > best_rc) {
        best_rc = cost_row_(j);
        best = j;
      }
    return best;
  }

  // Min-ratio row; among near-ties prefers the largest pivot magnitude.
  int choose_leaving(int col, bool bland) const {
    const double piv_tol = 1e-9;
    double best_ratio = kInf;
    int best_row = -1;
    double best_piv = 0.0;
    for (int r = 0; r < m_; ++r) {
      const double a = tableau_(r, col);
      if (a <= piv_tol) continue;
      const double ratio = tableau_(r, rhs_col_) / a;
      if (ratio < best_ratio - 1e-12) {
        best_ratio = ratio;
        best_row = r;
        best_piv = a;
      } else if (ratio <= best_ratio + 1e-12 && best_row >= 0) {
        if (bland ? basis_[r] < basis_[best_row] : a > best_piv) {
          best_row = r;
          best_piv = a;
        }
      }
    }
    return best_row;
  }

  Iterate iterate(bool phase1) {
    int iters = 0;
    int stall = 0;
    double last = objective_value();
    bool bland = bland_always_;
    while (true) {
      if (++iters > iteration_cap_) return Iterate::IterationLimit;
      const int col = choose_entering(bland);
      if (col < 0) return Iterate::Optimal;
      const int row = choose_leaving(col, bland);
      if (row < 0) {
        if (phase1) return Iterate::IterationLimit;  // phase 1 cannot be unbounded
        return Iterate::Unbounded;
      }
      pivot(row, col);
      const double z = objective_value();
      if (z > last + 1e-12 * (1.0 + std::abs(last))) {
        last = z;
        stall = 0;
        bland = bland_always_;
      } else if (++stall > 400) {
        bland = true;  // anti-cycling fallback on long degenerate runs
      }
    }
  }

  // Replace artificial basics (at value ~0) with structural/slack columns,
  // or detect redundant rows.
  void pivot_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < art_col0_) continue;
      int col = -1;
      double best = 1e-7;
      for (int j = 0; j < art_col0_; ++j)
        if (std::abs(tableau_(r, j)) > best) {
          best = std::abs(tableau_(r, j));
          col = j;
        }
      if (col >= 0) {
        pivot(r, col);
      } else {
        // Redundant row: neutralize it so it can never constrain a pivot.
        tableau_.row(r).setZero();
        tableau_(r, basis_[r]) = 1.0;
        tableau_(r, rhs_col_) = 0.0;
      }
    }
  }

  const Tolerances tol_;
  bool bland_always_ = false;
  int nvars_ = 0, m_ = 0, ncols_ = 0, slack_col0_ = 0, art_col0_ = 0, rhs_col_ = 0;
  int iteration_cap_ = 0;
  double rhs_scale_ = 0.0;
  RowMatrix tableau_;
  Eigen::RowVectorXd cost_row_;
  std::vector<double> cost_;
  std::vector<int> basis_;
  std::vector<bool> allowed_;
  std::vector<int> artificials_;
  bool feasible_ = false;
  bool failed_ = false;
  std::string fail_detail_;
};

// Gauss-Jordan elimination of the equality block: picks one pivot variable
// per independent equality row and substitutes it out of the whole program.
// The window LPs are equality-heavy (dynamics and observation rows), and the
// reduced programs start phase 1 almost feasible.
struct Reduction {
  bool infeasible = false;
  std::vector<int> kept;  // original indices of the surviving variables
  std::vector<int> elim;  // original indices of the substituted variables
  Matrix sub;             // x_elim = sub * x_kept + off
  Vector off;
  LinearProgram reduced;  // inequality-only program over the kept variables

  Vector reconstruct(const Vector& xk) const {
    Vector x(kept.size() + elim.size());
    for (std::size_t j = 0; j < kept.size(); ++j) x(kept[j]) = xk(j);
    if (!elim.empty()) {
      const Vector xe = sub * xk + off;
      for (std::size_t j = 0; j < elim.size(); ++j) x(elim[j]) = xe(j);
    }
    return x;
  }

  Vector reduce_objective(const Vector& c) const {
    Vector ck(kept.size());
    for (std::size_t j = 0; j < kept.size(); ++j) ck(j) = c(kept[j]);
    if (!elim.empty()) {
      Vector ce(elim.size());
      for (std::size_t j = 0; j < elim.size(); ++j) ce(j) = c(elim[j]);
      ck += sub.transpose() * ce;
    }
    return ck;
  }
};

Reduction reduce_equalities(const LinearProgram& lp) {
  Reduction red;
  const int n = lp.num_vars;
  const int m2 = static_cast<int>(lp.a_eq.rows());
  if (m2 == 0) {
    red.reduced = lp;
    red.kept.resize(n);
    for (int j = 0; j < n; ++j) red.kept[j] = j;
    red.sub = Matrix(0, n);
    red.off = Vector(0);
    return red;
  }

  Matrix eq = lp.a_eq;
  Vector rhs = lp.b_eq;
  const double scale = std::max(1.0, eq.size() > 0 ? eq.cwiseAbs().maxCoeff() : 0.0);
  const double piv_tol = 1e-9 * scale;

  std::vector<int> pivot_col_of_row(m2, -1);
  std::vector<bool> is_pivot_col(n, false);
  std::vector<bool> row_done(m2, false);
  for (int step = 0; step < m2; ++step) {
    int pr = -1, pc = -1;
    double best = piv_tol;
    for (int i = 0; i < m2; ++i) {
      if (row_done[i]) continue;
      for (int j = 0; j < n; ++j) {
        if (is_pivot_col[j]) continue;
        if (std::abs(eq(i, j)) > best) {
          best = std::abs(eq(i, j));
          pr = i;
          pc = j;
        }
      }
    }
    if (pr < 0) break;
    const double piv = eq(pr, pc);
    eq.row(pr) /= piv;
    rhs(pr) /= piv;
    for (int i = 0; i < m2; ++i) {
      if (i == pr) continue;
      const double f = eq(i, pc);
      if (f != 0.0) {
        eq.row(i) -= f * eq.row(pr);
        rhs(i) -= f * rhs(pr);
      }
    }
    row_done[pr] = true;
    pivot_col_of_row[pr] = pc;
    is_pivot_col[pc] = true;
  }
  // leftover rows must be 0 = 0
  for (int i = 0; i < m2; ++i)
    if (!row_done[i] && std::abs(rhs(i)) > 1e-7 * (1.0 + scale)) {
      red.infeasible = true;
      return red;
    }

  for (int j = 0; j < n; ++j)
    if (!is_pivot_col[j]) red.kept.push_back(j);
  for (int i = 0; i < m2; ++i)
    if (row_done[i]) red.elim.push_back(pivot_col_of_row[i]);
  std::sort(red.elim.begin(), red.elim.end());

  // x_pc = rhs(row) - sum_{kept j} eq(row, j) x_j for the row owning pc
  const int ne = static_cast<int>(red.elim.size());
  const int nk = static_cast<int>(red.kept.size());
  red.sub = Matrix::Zero(ne, nk);
  red.off = Vector::Zero(ne);
  for (int i = 0; i < m2; ++i) {
    if (!row_done[i]) continue;
    const int pc = pivot_col_of_row[i];
    const int e = static_cast<int>(std::lower_bound(red.elim.begin(), red.elim.end(), pc) -
                                   red.elim.begin());
    for (int j = 0; j < nk; ++j) red.sub(e, j) = -eq(i, red.kept[j]);
    red.off(e) = rhs(i);
  }

  // substitute into the inequality block
  LinearProgram& out = red.reduced;
  out.num_vars = nk;
  out.objective = Vector::Zero(nk);
  const int m1 = static_cast<int>(lp.a_ub.rows());
  Matrix a_kept(m1, nk), a_elim(m1, ne);
  for (int j = 0; j < nk; ++j) a_kept.col(j) = lp.a_ub.col(red.kept[j]);
  for (int j = 0; j < ne; ++j) a_elim.col(j) = lp.a_ub.col(red.elim[j]);
  out.a_ub = a_kept + a_elim * red.sub;
  out.b_ub = lp.b_ub - a_elim * red.off;
  out.a_eq = Matrix(0, nk);
  out.b_eq = Vector(0);

  // bounds on kept variables carry over; bounds on eliminated variables
  // become inequality rows on their substitution expression
  const bool has_lo = !lp.lower.empty(), has_hi = !lp.upper.empty();
  if (has_lo || has_hi) {
    out.lower.assign(nk, -kInf);
    out.upper.assign(nk, kInf);
    for (int j = 0; j < nk; ++j) {
      if (has_lo) out.lower[j] = lp.lower[red.kept[j]];
      if (has_hi) out.upper[j] = lp.upper[red.kept[j]];
    }
    std::vector<Vector> extra_rows;
    std::vector<double> extra_rhs;
    for (int e = 0; e < ne; ++e) {
      const int orig = red.elim[e];
      const double lo = has_lo ? lp.lower[orig] : -kInf;
      const double hi = has_hi ? lp.upper[orig] : kInf;
      if (lo > -kInf) {
        extra_rows.push_back(-red.sub.row(e).transpose());
        extra_rhs.push_back(red.off(e) - lo);
      }
      if (hi < kInf) {
        extra_rows.push_back(red.sub.row(e).transpose());
        extra_rhs.push_back(hi - red.off(e));
      }
    }
    if (!extra_rows.empty()) {
      const int base = static_cast<int>(out.a_ub.rows());
      Matrix a2(base + extra_rows.size(), nk);
      Vector b2(base + extra_rows.size());
      a2.topRows(base) = out.a_ub;
      b2.head(base) = out.b_ub;
      for (std::size_t i = 0; i < extra_rows.size(); ++i) {
        a2.row(base + i) = extra_rows[i].transpose();
        b2(base + i) = extra_rhs[i];
      }
      out.a_ub = std::move(a2);
      out.b_ub = std::move(b2);
    }
  }
  return red;
}

bool point_feasible(const LinearProgram& lp, const Vector& x, double viol_tol) {
  if (lp.a_ub.rows() > 0) {
    const Vector r = lp.a_ub * x - lp.b_ub;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double scale = 1.0 + std::abs(lp.b_ub(i)) + lp.a_ub.row(i).cwiseAbs().sum() * 0.01;
      if (r(i) > viol_tol * scale) return false;
    }
  }
  if (lp.a_eq.rows() > 0) {
    const Vector r = lp.a_eq * x - lp.b_eq;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double scale = 1.0 + std::abs(lp.b_eq(i)) + lp.a_eq.row(i).cwiseAbs().sum() * 0.01;
      if (std::abs(r(i)) > viol_tol * scale) return false;
    }
  }
  if (!lp.lower.empty())
    for (int j = 0; j < lp.num_vars; ++j)
      if (x(j) < lp.lower[j] - viol_tol * (1.0 + std::abs(lp.lower[j]))) return false;
  if (!lp.upper.empty())
    for (int j = 0; j < lp.num_vars; ++j)
      if (x(j) > lp.upper[j] + viol_tol * (1.0 + std::abs(lp.upper[j]))) return false;
  return true;
}

// Solves one objective through a reduction, validating the reconstructed
// point against the original program.
LpOutcome run_single(const LinearProgram& lp, const Reduction& red, const Vector& objective,
                     const Tolerances& tol, bool bland) {
  LpOutcome out;
  if (red.infeasible) {
    out.status = LpStatus::Infeasible;
    return out;
  }
  Simplex sx(red.reduced, tol, bland);
  if (!sx.make_feasible()) {
    out.status = sx.fail_detail().empty() ? LpStatus::Infeasible : LpStatus::NumericalFailure;
    out.detail = sx.fail_detail();
    return out;
  }
  out.status = sx.optimize(red.reduce_objective(objective));
  if (out.status == LpStatus::Optimal) {
    out.point = red.reconstruct(sx.extract_point());
    out.value = objective.dot(out.point);
    if (!point_feasible(lp, out.point, 1e-7)) {
      out.status = LpStatus::NumericalFailure;
      out.detail = "optimal point failed feasibility validation";
    }
  } else {
    out.detail = sx.fail_detail();
  }
  return out;
}

}  // namespace

void LinearProgram::check() const {
  if (num_vars < 0) throw std::invalid_argument("LinearProgram: negative num_vars");
  if (objective.size() != num_vars) throw std::invalid_argument("LinearProgram: objective size mismatch");
  if (a_ub.rows() != b_ub.size()) throw std::invalid_argument("LinearProgram: b_ub size mismatch");
  if (a_ub.rows() > 0 && a_ub.cols() != num_vars)
    throw std::invalid_argument("LinearProgram: a_ub column count mismatch");
  if (a_eq.rows() != b_eq.size()) throw std::invalid_argument("LinearProgram: b_eq size mismatch");
  if (a_eq.rows() > 0 && a_eq.cols() != num_vars)
    throw std::invalid_argument("LinearProgram: a_eq column count mismatch");
  if (!lower.empty() && static_cast<int>(lower.size()) != num_vars)
    throw std::invalid_argument("LinearProgram: lower bound size mismatch");
  if (!upper.empty() && static_cast<int>(upper.size()) != num_vars)
    throw std::invalid_argument("LinearProgram: upper bound size mismatch");
  if (!objective.allFinite()) throw std::invalid_argument("LinearProgram: non-finite objective");
  if ((a_ub.size() > 0 && !a_ub.allFinite()) || (b_ub.size() > 0 && !b_ub.allFinite()) ||
      (a_eq.size() > 0 && !a_eq.allFinite()) || (b_eq.size() > 0 && !b_eq.allFinite()))
    throw std::invalid_argument("LinearProgram: non-finite constraint data");
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

LpOutcome lp_solve(const LinearProgram& lp, const Tolerances& tol) {
  lp.check();
  const Reduction red = reduce_equalities(lp);
  LpOutcome out = run_single(lp, red, lp.objective, tol, /*bland=*/false);
  if (out.status == LpStatus::NumericalFailure)
    out = run_single(lp, red, lp.objective, tol, /*bland=*/true);
  return out;
}

std::vector<LpOutcome> lp_solve_family(const LinearProgram& base,
                                       const std::vector<Vector>& objectives,
                                       const Tolerances& tol) {
  base.check();
  for (const auto& c : objectives)
    if (c.size() != base.num_vars)
      throw std::invalid_argument("lp_solve_family: objective size mismatch");

  std::vector<LpOutcome> results(objectives.size());
  const Reduction red = reduce_equalities(base);
  if (red.infeasible) {
    for (auto& out : results) out.status = LpStatus::Infeasible;
    return results;
  }
  Simplex sx(red.reduced, tol, /*bland_from_start=*/false);
  const bool feasible = sx.make_feasible();
  for (std::size_t k = 0; k < objectives.size(); ++k) {
    LpOutcome& out = results[k];
    if (!feasible) {
      out.status = sx.fail_detail().empty() ? LpStatus::Infeasible : LpStatus::NumericalFailure;
      out.detail = sx.fail_detail();
      continue;
    }
    out.status = sx.optimize(red.reduce_objective(objectives[k]));
    if (out.status == LpStatus::Optimal) {
      out.point = red.reconstruct(sx.extract_point());
      out.value = objectives[k].dot(out.point);
      if (!point_feasible(base, out.point, 1e-7)) out.status = LpStatus::NumericalFailure;
    }
    if (out.status == LpStatus::NumericalFailure) {
      // Cold restart for this objective only.
      out = run_single(base, red, objectives[k], tol, /*bland=*/true);
    }
  }
  return results;
}

}  // namespace agv
