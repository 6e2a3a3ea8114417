#pragma once

#include "numerics.hpp"

#include <string>
#include <vector>

namespace agv {

/// A linear program in the form
///   maximize  c' x
///   s.t.      A_ub x <= b_ub,  A_eq x = b_eq,  lower <= x <= upper,
/// where bounds default to free (+-inf) when the bound vectors are empty.
struct LinearProgram {
  int num_vars = 0;
  Vector objective;  // size num_vars
  Matrix a_ub;       // m1 x num_vars (may have zero rows)
  Vector b_ub;
  Matrix a_eq;       // m2 x num_vars (may have zero rows)
  Vector b_eq;
  std::vector<double> lower;  // empty or size num_vars
  std::vector<double> upper;  // empty or size num_vars

  void check() const;  // throws std::invalid_argument on inconsistent dimensions
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

struct LpOutcome {
  LpStatus status = LpStatus::NumericalFailure;
  double value = 0.0;  // maximum of c'x when Optimal
  Vector point;        // an optimizer when Optimal
  std::string detail;  // diagnostics when NumericalFailure

  bool optimal() const { return status == LpStatus::Optimal; }
};

const char* to_string(LpStatus s);

/// Two-phase dense simplex.  Infeasible and Unbounded are distinguished
/// reliably: phase 1 decides feasibility, phase 2 decides boundedness.
LpOutcome lp_solve(const LinearProgram& lp, const Tolerances& tol);

/// Solves one feasible region under many objectives, reusing the basis
/// between consecutive objectives.  base.objective is ignored.
/// If the region is empty every outcome is Infeasible.
std::vector<LpOutcome> lp_solve_family(const LinearProgram& base,
                                       const std::vector<Vector>& objectives,
                                       const Tolerances& tol);

}  // namespace agv
