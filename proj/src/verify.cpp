#include "verify.hpp"

#include <chrono>
#include <cstdlib>
#include <future>
#include <map>

namespace agv {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Verified: return "verified";
    case Verdict::NotVerified: return "not_verified";
    case Verdict::Unknown: return "unknown";
  }
  return "unknown";
}

std::vector<std::tuple<int, int, double>> VerificationReport::group_values() const {
  std::map<std::pair<int, int>, double> worst;
  for (const auto& rec : theta_records) {
    auto key = std::make_pair(rec.n, rec.ell);
    auto it = worst.find(key);
    if (it == worst.end())
      worst[key] = rec.value;
    else
      it->second = std::max(it->second, rec.value);
  }
  std::vector<std::tuple<int, int, double>> out;
  for (const auto& [key, val] : worst) out.emplace_back(key.first, key.second, val);
  return out;
}

namespace {

struct WindowLayout {
  int p, n, points, nd, nx, ny, num_vars;
  int d0, x0, y0;  // column offsets of the three variable groups

  int d_at(int k) const { return d0 + (k - p) * nd; }
  int x_at(int k) const { return x0 + (k - p) * nx; }
  int y_at(int k) const { return y0 + (k - p) * ny; }
};

WindowLayout layout_for(const UnperturbedLtiSystem& sys, const LtiContract& c, int n, int ell) {
  WindowLayout L;
  L.p = n - ell;
  L.n = n;
  L.points = ell + 2;  // time points p..n+1
  L.nd = sys.nd();
  L.nx = sys.nx();
  L.ny = sys.ny();
  L.d0 = 0;
  L.x0 = L.points * L.nd;
  L.y0 = L.points * (L.nd + L.nx);
  L.num_vars = L.points * (L.nd + L.nx + L.ny);
  return L;
}

Vector objective_row(const WindowLayout& L, const LtiContract& c, int row) {
  Vector obj = Vector::Zero(L.num_vars);
  for (int r = 0; r <= c.m; ++r) {
    const int t = L.n + 1 - c.m + r;
    obj.segment(L.d_at(t), L.nd) += c.guarantee_blocks[r].row(row).head(L.nd).transpose();
    obj.segment(L.y_at(t), L.ny) += c.guarantee_blocks[r].row(row).tail(L.ny).transpose();
  }
  return obj;
}

LinearProgram window_lp(const UnperturbedLtiSystem& sys, const LtiContract& c, int n, int ell) {
  const WindowLayout L = layout_for(sys, c, n, ell);
  const int p = L.p;
  const int m = c.m;
  const int guar_windows = std::max(0, n - (m + p) + 1);
  const int assum_windows = std::max(0, n + 1 - (m + p) + 1);
  const int init_rows = (p == 0) ? sys.x0.rows() : 0;
  const int n_ub = guar_windows * c.ng() + assum_windows * c.na() + init_rows;
  const int n_eq = (ell + 1) * L.nx + L.points * L.ny;

  LinearProgram lp;
  lp.num_vars = L.num_vars;
  lp.objective = Vector::Zero(L.num_vars);
  lp.a_ub = Matrix::Zero(n_ub, L.num_vars);
  lp.b_ub = Vector::Zero(n_ub);
  lp.a_eq = Matrix::Zero(n_eq, L.num_vars);
  lp.b_eq = Vector::Zero(n_eq);

  int row = 0;
  for (int k = m + p; k <= n; ++k) {  // guarantee history
    for (int r = 0; r <= m; ++r) {
      const int t = k - m + r;
      lp.a_ub.block(row, L.d_at(t), c.ng(), L.nd) += c.guarantee_blocks[r].leftCols(L.nd);
      lp.a_ub.block(row, L.y_at(t), c.ng(), L.ny) += c.guarantee_blocks[r].rightCols(L.ny);
    }
    lp.b_ub.segment(row, c.ng()) = c.g0;
    row += c.ng();
  }
  for (int k = m + p; k <= n + 1; ++k) {  // assumptions
    for (int r = 0; r <= m; ++r) {
      const int t = k - m + r;
      lp.a_ub.block(row, L.d_at(t), c.na(), L.nd) += c.assumption_blocks[r];
    }
    lp.b_ub.segment(row, c.na()) = c.a0;
    row += c.na();
  }
  if (p == 0 && init_rows > 0) {  // (x_0, d_0) in X0
    lp.a_ub.block(row, L.x_at(0), init_rows, L.nx) = sys.x0.a.leftCols(L.nx);
    lp.a_ub.block(row, L.d_at(0), init_rows, L.nd) = sys.x0.a.rightCols(L.nd);
    lp.b_ub.segment(row, init_rows) = sys.x0.b;
    row += init_rows;
  }

  int erow = 0;
  for (int k = p; k <= n; ++k) {  // dynamics
    lp.a_eq.block(erow, L.x_at(k + 1), L.nx, L.nx).setIdentity();
    lp.a_eq.block(erow, L.x_at(k), L.nx, L.nx) -= sys.a;
    lp.a_eq.block(erow, L.d_at(k), L.nx, L.nd) -= sys.b;
    lp.b_eq.segment(erow, L.nx) = sys.w;
    erow += L.nx;
  }
  for (int k = p; k <= n + 1; ++k) {  // observations
    lp.a_eq.block(erow, L.y_at(k), L.ny, L.ny).setIdentity();
    lp.a_eq.block(erow, L.x_at(k), L.ny, L.nx) -= sys.c;
    lp.a_eq.block(erow, L.d_at(k), L.ny, L.nd) -= sys.d;
    lp.b_eq.segment(erow, L.ny) = sys.v;
    erow += L.ny;
  }
  return lp;
}

void check_window_args(const LtiContract& c, int n, int ell, int row) {
  if (ell < c.m - 1) throw std::invalid_argument("window LP: ell must be >= m-1");
  if (n < ell) throw std::invalid_argument("window LP: n must be >= ell");
  if (row < 0 || row >= c.ng()) throw std::invalid_argument("window LP: guarantee row out of range");
}

LtiContract normalized(const LtiContract& c) {
  LtiContract out = c.m == 0 ? c.lifted_to(1) : c;
  out.check();
  return out;
}

}  // namespace

LinearProgram build_theta_lp(const UnperturbedLtiSystem& sys, const LtiContract& contract_in,
                             int n, int ell, int row) {
  const LtiContract c = normalized(contract_in);
  check_window_args(c, n, ell, row);
  LinearProgram lp = window_lp(sys, c, n, ell);
  lp.objective = objective_row(layout_for(sys, c, n, ell), c, row);
  return lp;
}

double theta(const UnperturbedLtiSystem& sys, const LtiContract& contract_in, int n, int ell,
             const Tolerances& tol, std::vector<ThetaRecord>* records) {
  const LtiContract c = normalized(contract_in);
  check_window_args(c, n, ell, 0);
  const WindowLayout L = layout_for(sys, c, n, ell);
  const LinearProgram base = window_lp(sys, c, n, ell);

  std::vector<Vector> objectives;
  objectives.reserve(c.ng());
  for (int i = 0; i < c.ng(); ++i) objectives.push_back(objective_row(L, c, i));
  const auto results = lp_solve_family(base, objectives, tol);

  double worst = -std::numeric_limits<double>::infinity();
  bool any_failure = false;
  for (int i = 0; i < c.ng(); ++i) {
    const LpOutcome& r = results[i];
    double value;
    switch (r.status) {
      case LpStatus::Optimal: value = r.value - c.g0(i); break;
      case LpStatus::Unbounded: value = std::numeric_limits<double>::infinity(); break;
      case LpStatus::Infeasible: value = -std::numeric_limits<double>::infinity(); break;
      default:
        value = std::numeric_limits<double>::quiet_NaN();
        any_failure = true;
        break;
    }
    if (records) records->push_back({n, ell, i, value, r.status});
    if (!any_failure) worst = std::max(worst, value);
  }
  if (any_failure)
    throw SolverError("theta(" + std::to_string(n) + "," + std::to_string(ell) +
                      "): LP solver failure");
  return worst;
}

VerificationReport verify_with_iota(const UnperturbedLtiSystem& sys,
                                    const LtiContract& contract_in, int iota,
                                    const Tolerances& tol) {
  const auto t_start = std::chrono::steady_clock::now();
  const LtiContract c = normalized(contract_in);
  if (iota < c.m - 1) throw std::invalid_argument("verify_with_iota: iota must be >= m-1");

  VerificationReport rep;
  rep.iota = iota;

  // Theorem hypothesis: the assumptions must be extendable, otherwise the
  // per-window problems do not witness whole-signal satisfaction.
  try {
    if (!extendability_check(c.assumption_blocks, c.a0, tol)) {
      rep.verdict = Verdict::Unknown;
      rep.diagnostics.push_back("assumptions are not extendable; the window criterion does not apply");
      return rep;
    }
  } catch (const SolverError& e) {
    rep.verdict = Verdict::Unknown;
    rep.diagnostics.push_back(std::string("extendability check failed: ") + e.what());
    return rep;
  }

  // Anchored problems V_{k,k} for k = m-1..iota, then the inductive problem
  // with iota+1 steps of history.  The published range stops the history at
  // iota steps, but with only iota steps the window ending one step before
  // the target lies outside the variable range, so the inductive LP would be
  // unbounded whenever the guarantee needs its own previous window (already
  // at the two-vehicle case study).  One extra step of history restores the
  // chain theta_{n,n} <= theta_{n,iota+1} = theta_{iota+2,iota+1} and keeps
  // the group count at iota - m + 3.
  std::vector<std::pair<int, int>> groups;
  for (int k = c.m - 1; k <= iota; ++k) groups.emplace_back(k, k);
  groups.emplace_back(iota + 2, iota + 1);

  int threads = 1;
  if (const char* env = std::getenv("AGVERIFY_THREADS")) {
    threads = std::max(1, std::atoi(env));
  }

  std::vector<std::vector<ThetaRecord>> group_records(groups.size());
  std::vector<std::string> group_errors(groups.size());
  auto run_group = [&](std::size_t gi) {
    try {
      theta(sys, c, groups[gi].first, groups[gi].second, tol, &group_records[gi]);
    } catch (const SolverError& e) {
      group_errors[gi] = e.what();
    }
  };
  if (threads > 1 && groups.size() > 1) {
    std::vector<std::future<void>> futs;
    for (std::size_t gi = 0; gi < groups.size(); ++gi)
      futs.push_back(std::async(std::launch::async, run_group, gi));
    for (auto& f : futs) f.get();
  } else {
    for (std::size_t gi = 0; gi < groups.size(); ++gi) run_group(gi);
  }

  bool failed = false;
  bool all_nonpositive = true;
  bool any_unbounded = false;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    if (!group_errors[gi].empty()) {
      failed = true;
      rep.diagnostics.push_back(group_errors[gi]);
    }
    for (const auto& recd : group_records[gi]) {
      rep.theta_records.push_back(recd);
      ++rep.lp_count_rows;
      if (recd.lp_status == LpStatus::NumericalFailure) failed = true;
      if (std::isinf(recd.value) && recd.value > 0) any_unbounded = true;
      if (!(recd.value <= tol.lp_tol)) all_nonpositive = false;
    }
  }
  rep.lp_groups = static_cast<int>(groups.size());

  if (failed) {
    rep.verdict = Verdict::Unknown;
    rep.diagnostics.push_back("LP solver failure; verdict unknown");
  } else if (all_nonpositive) {
    rep.verdict = Verdict::Verified;
  } else {
    rep.verdict = Verdict::NotVerified;
    if (any_unbounded)
      rep.diagnostics.push_back("some theta is unbounded; iota may be below max{m,nu}-1");
    else
      rep.diagnostics.push_back("not verified (inconclusive by k-induction)");
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

VerificationReport verify(const UnperturbedLtiSystem& sys, const LtiContract& contract_in,
                          const Tolerances& tol) {
  const LtiContract c = normalized(contract_in);
  const int nu = observability_index(sys.a, sys.c, tol);
  const int iota = std::max(c.m, nu) - 1;
  VerificationReport rep = verify_with_iota(sys, c, iota, tol);
  rep.nu = nu;
  return rep;
}

}  // namespace agv
