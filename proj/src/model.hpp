#pragma once

#include "polyhedra.hpp"

#include <optional>
#include <string>
#include <vector>

namespace agv {

enum class PerturbationKind { Singleton, Box, PolytopeV, PolytopeH, Ellipsoid, Product };

/// A bounded perturbation set.  The Product variant is an exact cartesian
/// product of blocks (supports and norms decompose blockwise), used for
/// per-agent norm balls in the formation fixture.
struct PerturbationSet {
  PerturbationKind kind = PerturbationKind::Singleton;
  Vector point;                             // Singleton
  Vector lo, hi;                            // Box
  Matrix vertices;                          // PolytopeV: d x n_vert
  PolyhedronH poly;                         // PolytopeH
  Matrix shape;                             // Ellipsoid: SPD H
  double gamma = 0.0;                       // Ellipsoid radius
  std::vector<PerturbationSet> components;  // Product

  static PerturbationSet singleton(Vector v);
  static PerturbationSet zero(int dim) { return singleton(Vector::Zero(dim)); }
  static PerturbationSet box(Vector lo, Vector hi);
  static PerturbationSet interval(double lo, double hi);
  static PerturbationSet polytope_v(Matrix vertices);
  /// Boundedness is certified with recession-cone LPs at construction.
  static PerturbationSet polytope_h(PolyhedronH p, const Tolerances& tol);
  static PerturbationSet ellipsoid(Matrix shape, double gamma);
  static PerturbationSet product(std::vector<PerturbationSet> components);

  int dim() const;
  bool is_singleton() const { return kind == PerturbationKind::Singleton; }
  /// Singleton payload (requires is_singleton()).
  const Vector& singleton_value() const;
  bool contains_zero(const Tolerances& tol) const;
  /// Radius of a ball around the origin contained in the set (<= 0 when the
  /// origin is not interior).  Sampled lower bound for PolytopeV.
  double interior_radius(const Tolerances& tol) const;
};

/// x(k+1) = A x + B d + E w(k) + w_offset,  y(k) = C x + D d + F r(k) + v_offset,
/// with (x(0), d(0)) constrained jointly by x0 and w(k) in P, r(k) in R.
/// The affine offsets cover constant actuation terms that are part of the
/// plant rather than of the noise.
struct PerturbedLtiSystem {
  Matrix a, b, c, d, e, f;
  Vector w_offset, v_offset;  // sizes n_x / n_y; zero when defaulted
  PolyhedronH x0;             // over (x0, d0), dimension n_x + n_d
  PerturbationSet p, r;

  int nx() const { return static_cast<int>(a.rows()); }
  int nd() const { return static_cast<int>(b.cols()); }
  int ny() const { return static_cast<int>(c.rows()); }
  int np() const { return static_cast<int>(e.cols()); }
  int nr() const { return static_cast<int>(f.cols()); }
};

/// x(k+1) = A x + B d + w,  y(k) = C x + D d + v.
struct UnperturbedLtiSystem {
  Matrix a, b, c, d;
  Vector w, v;
  PolyhedronH x0;  // over (x0, d0)

  int nx() const { return static_cast<int>(a.rows()); }
  int nd() const { return static_cast<int>(b.cols()); }
  int ny() const { return static_cast<int>(c.rows()); }
};

/// Sliding-window contract of depth m: for every k >= m,
///   sum_r A^r d(k-m+r) <= a0   and   sum_r G^r [d; y](k-m+r) <= g0,
/// where block index r = m is the newest sample in the window.
struct LtiContract {
  int m = 1;
  std::vector<Matrix> assumption_blocks;  // m+1 blocks, n_a x n_d
  Vector a0;
  std::vector<Matrix> guarantee_blocks;  // m+1 blocks, n_g x (n_d + n_y)
  Vector g0;

  int na() const { return static_cast<int>(a0.size()); }
  int ng() const { return static_cast<int>(g0.size()); }
  int nd() const {
    return assumption_blocks.empty() ? 0 : static_cast<int>(assumption_blocks[0].cols());
  }
  int ny() const {
    return guarantee_blocks.empty() ? 0 : static_cast<int>(guarantee_blocks[0].cols()) - nd();
  }
  Matrix guarantee_d(int r) const { return guarantee_blocks.at(r).leftCols(nd()); }
  Matrix guarantee_y(int r) const { return guarantee_blocks.at(r).rightCols(ny()); }

  void check() const;  // dimension invariants; throws std::invalid_argument

  /// Same contract expressed at a larger depth: newer (higher-r) slots are
  /// zero, so exactly the original window family is constrained.
  LtiContract lifted_to(int target_m) const;
};

struct DimensionReport {
  bool ok = false;
  int nx = 0, nd = 0, ny = 0, na = 0, ng = 0, np = 0, nr = 0, m = 0;
  std::vector<std::string> violations;
};

/// Dimension cross-validation of a system/contract pair.  Depth-0 contracts
/// are reported at their lifted depth m = 1.
DimensionReport validate(const PerturbedLtiSystem& system, const LtiContract& contract);
DimensionReport validate(const UnperturbedLtiSystem& system, const LtiContract& contract);

/// Noise channels dropped; the plant's own affine offsets are kept.
UnperturbedLtiSystem nominal(const PerturbedLtiSystem& system);

/// Exact reduction when both perturbation sets are singletons:
/// w = w_offset + E wbar, v = v_offset + F rbar.
UnperturbedLtiSystem to_unperturbed(const PerturbedLtiSystem& system);

/// Sufficient window-wise refinement test: c1 refines c2 when c2's assumption
/// window set is contained in c1's and c1's guarantee window set, restricted
/// to c2-feasible inputs, is contained in c2's.
bool refines_stepwise(const LtiContract& c1, const LtiContract& c2, const Tolerances& tol);

/// Window polyhedron helpers (stacking order: oldest to newest sample).
PolyhedronH assumption_window_set(const LtiContract& c);
PolyhedronH guarantee_window_set(const LtiContract& c);

}  // namespace agv
