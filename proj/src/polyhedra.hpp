#pragma once

#include "lp.hpp"

#include <stdexcept>
#include <vector>

namespace agv {

/// Engine-level failure (LP solver breakdown, intractable subproblem).
/// Input mistakes throw std::invalid_argument instead.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// { z : A z <= b }.  A may have zero rows (the whole space).
struct PolyhedronH {
  Matrix a;  // n_c x d
  Vector b;  // n_c

  PolyhedronH() = default;
  PolyhedronH(Matrix a_, Vector b_);
  static PolyhedronH whole_space(int dim) { return PolyhedronH(Matrix(0, dim), Vector(0)); }

  int dim() const { return static_cast<int>(a.cols()); }
  int rows() const { return static_cast<int>(a.rows()); }
};

/// { F lambda + G theta : 1'lambda = 1, lambda >= 0, theta >= 0 }.
/// Columns of F are points, columns of G are ray directions (G may be empty).
struct PolyhedronV {
  Matrix f;  // d x n_vert, n_vert >= 1
  Matrix g;  // d x n_ray

  PolyhedronV() = default;
  PolyhedronV(Matrix f_, Matrix g_);
  explicit PolyhedronV(Matrix f_) : PolyhedronV(std::move(f_), Matrix()) {}

  int dim() const { return static_cast<int>(f.rows()); }
};

/// Block shift operators: T moves window blocks up one slot, K injects into
/// the last slot.  T*K != K whenever blocks >= 2.
struct ShiftOperators {
  Matrix t_shift;  // (blocks*s) x (blocks*s)
  Matrix k_embed;  // (blocks*s) x s
  int block_size = 0;
  int blocks = 0;

  static ShiftOperators make(int block_size, int blocks);
};

bool contains_point(const PolyhedronH& p, const Vector& z, double tol);

/// One feasibility LP.
bool is_empty(const PolyhedronH& p, const Tolerances& tol);

/// H-representation inclusion test: per row j of s2, maximizes
/// e_j'(A2 z - b2) over s1 and checks nonpositivity.  Empty s1 is included
/// in anything; an unbounded row value means not included.
bool inclusion_h(const PolyhedronH& s1, const PolyhedronH& s2, const Tolerances& tol);

/// V-representation inclusion: one feasibility LP per generator of s1.
bool inclusion_v(const PolyhedronV& s1, const PolyhedronV& s2, const Tolerances& tol);

/// Fourier-Motzkin elimination of the listed coordinates, with LP-based
/// redundancy pruning.  The result ranges over the kept coordinates in their
/// original order.
PolyhedronH fm_eliminate(const PolyhedronH& p, const std::vector<int>& drop,
                         const Tolerances& tol);

/// H-representation of { s + K kappa : s in p, kappa free }.
PolyhedronH sum_with_column_span(const PolyhedronH& p, const Matrix& k, const Tolerances& tol);

/// Decides whether every feasible assumption window can be extended one step.
/// Exact (projection-based) for small window dimensions; falls back to the
/// constant-extension witness for large ones and throws SolverError when that
/// witness is inconclusive.
bool extendability_check(const std::vector<Matrix>& assumption_blocks, const Vector& a0,
                         const Tolerances& tol);

/// Radius of the largest ball around the origin inside p (negative when the
/// origin is outside; +inf for the whole space).
double interior_ball_radius_at_origin(const PolyhedronH& p);

/// Recession-cone test: true iff { z : A z <= 0 } = {0}.
bool h_polyhedron_bounded(const PolyhedronH& p, const Tolerances& tol);

/// max { c'z : z in p }; throws SolverError on solver breakdown.
LpOutcome maximize_over(const PolyhedronH& p, const Vector& c, const Tolerances& tol);

}  // namespace agv
