#pragma once

#include "model.hpp"

#include <optional>

namespace agv {

enum class Verdict { Verified, NotVerified, Unknown };

const char* to_string(Verdict v);

/// One row-LP outcome of the window problem V_{n,ell}.
struct ThetaRecord {
  int n = 0;
  int ell = 0;
  int row = 0;
  double value = 0.0;  // +-inf encode unbounded / vacuously-true rows
  LpStatus lp_status = LpStatus::NumericalFailure;
};

struct VerificationReport {
  Verdict verdict = Verdict::Unknown;
  int iota = 0;
  int nu = 0;
  std::vector<ThetaRecord> theta_records;
  int lp_groups = 0;      // one group = n_g row LPs for one (n, ell)
  int lp_count_rows = 0;  // total row LPs solved
  double wall_seconds = 0.0;
  std::vector<std::string> diagnostics;

  // Perturbed-pipeline extras (set by verify_perturbed).
  double epsilon = 0.0;
  std::vector<int> n_per_row;
  Vector tau_eps;
  double tau_seconds = 0.0;
  double lp_seconds = 0.0;

  /// Worst finite-or-infinite theta value per group, keyed by (n, ell).
  std::vector<std::tuple<int, int, double>> group_values() const;
};

/// The window LP V_{n,ell} for one guarantee row.  Decision vector stacks
/// d_p..d_{n+1}, x_p..x_{n+1}, y_p..y_{n+1} with p = n - ell:
///   guarantee windows ending k = m+p..n,
///   assumption windows ending k = m+p..n+1,
///   dynamics for k = p..n, observations for k = p..n+1,
///   (x_p, d_p) in X0 exactly when p = 0.
/// The LP objective omits the constant -g0[row]; theta callers subtract it.
LinearProgram build_theta_lp(const UnperturbedLtiSystem& system, const LtiContract& contract,
                             int n, int ell, int row);

/// Worst guarantee-row violation at step n+1 given ell steps of history:
/// max over rows of the V_{n,ell} optima.  Any unbounded row gives +inf;
/// an empty feasible region gives -inf (vacuously satisfied premises).
/// Solver breakdown throws SolverError.
double theta(const UnperturbedLtiSystem& system, const LtiContract& contract, int n, int ell,
             const Tolerances& tol, std::vector<ThetaRecord>* records = nullptr);

/// k-induction with explicit truncation depth iota >= m-1.  Solves the
/// anchored problems V_{k,k} for k = m-1..iota plus one inductive problem
/// with iota+1 steps of history (iota - m + 3 LP groups in total).
VerificationReport verify_with_iota(const UnperturbedLtiSystem& system,
                                    const LtiContract& contract, int iota,
                                    const Tolerances& tol);

/// Chooses iota = max{m, nu} - 1 from the observability index.
VerificationReport verify(const UnperturbedLtiSystem& system, const LtiContract& contract,
                          const Tolerances& tol);

}  // namespace agv
