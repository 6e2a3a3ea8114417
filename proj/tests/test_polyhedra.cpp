#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "poly_convert.hpp"
#include "polyhedra.hpp"
#include "test_support.hpp"

using namespace agv;
using agvtest::random_bounded_hpoly;
using agvtest::sample_points;

namespace {

PolyhedronH box(int d, double half) {
  Matrix A(2 * d, d);
  Vector b(2 * d);
  A.setZero();
  for (int j = 0; j < d; ++j) {
    A(2 * j, j) = 1;
    A(2 * j + 1, j) = -1;
    b(2 * j) = half;
    b(2 * j + 1) = half;
  }
  return PolyhedronH(A, b);
}

bool set_equal(const PolyhedronH& a, const PolyhedronH& b, const Tolerances& tol) {
  return inclusion_h(a, b, tol) && inclusion_h(b, a, tol);
}

}  // namespace

TEST_CASE("contains_point basics") {
  Tolerances tol;
  auto B = box(2, 1.0);
  CHECK(contains_point(B, Vector::Zero(2), 1e-9));
  Vector z(2);
  z << 2, 0;
  CHECK_FALSE(contains_point(B, z, 1e-9));
  CHECK_THROWS_AS(contains_point(B, Vector::Zero(3), 1e-9), std::invalid_argument);

  auto g = agvtest::rng(31);
  for (int t = 0; t < 10; ++t) {
    auto P = random_bounded_hpoly(g, 3, 4);
    for (const auto& pt : sample_points(P, g, 20, tol)) CHECK(contains_point(P, pt, 1e-7));
  }
}

TEST_CASE("emptiness") {
  Tolerances tol;
  CHECK_FALSE(is_empty(box(2, 1.0), tol));
  Matrix A(2, 1);
  A << 1, -1;
  Vector b(2);
  b << 0, -1;  // x <= 0, x >= 1
  CHECK(is_empty(PolyhedronH(A, b), tol));
  CHECK_FALSE(is_empty(PolyhedronH::whole_space(3), tol));
}

TEST_CASE("inclusion_h: boxes and reflexivity") {
  Tolerances tol;
  CHECK(inclusion_h(box(2, 1.0), box(2, 2.0), tol));
  CHECK_FALSE(inclusion_h(box(2, 2.0), box(2, 1.0), tol));

  auto g = agvtest::rng(32);
  for (int t = 0; t < 10; ++t) {
    auto P = random_bounded_hpoly(g, 3, 3);
    CHECK(inclusion_h(P, P, tol));
  }

  // empty set is included in anything; nothing nonempty fits in an empty set
  Matrix A(2, 2);
  A << 1, 0, -1, 0;
  Vector b(2);
  b << -1, -1;
  PolyhedronH empty(A, b);
  CHECK(inclusion_h(empty, box(2, 0.1), tol));
  CHECK_FALSE(inclusion_h(box(2, 0.1), empty, tol));
  CHECK(inclusion_h(empty, empty, tol));

  // unbounded s1 sticking out of bounded s2
  CHECK_FALSE(inclusion_h(PolyhedronH::whole_space(2), box(2, 1.0), tol));
}

TEST_CASE("inclusion_h agrees with point sampling on random pairs") {
  Tolerances tol;
  auto g = agvtest::rng(33);
  int verified_true = 0, verified_false = 0;
  for (int t = 0; t < 100; ++t) {
    auto S2 = random_bounded_hpoly(g, 3, 3);
    // half the pairs are nested by construction (shrunk copy of S2)
    auto S1 = (t % 2 == 0) ? PolyhedronH(S2.a, 0.4 * S2.b) : random_bounded_hpoly(g, 3, 3);
    const bool inc = inclusion_h(S1, S2, tol);
    if (inc) {
      for (const auto& pt : sample_points(S1, g, 100, tol))
        CHECK(contains_point(S2, pt, 1e-6));
      ++verified_true;
    } else {
      // a maximizing row certifies a point of S1 outside S2
      bool witness = false;
      for (int j = 0; j < S2.rows() && !witness; ++j) {
        auto r = maximize_over(S1, S2.a.row(j).transpose(), tol);
        if (r.status == LpStatus::Optimal && r.value - S2.b(j) > tol.lp_tol)
          witness = !contains_point(S2, r.point, tol.lp_tol);
      }
      CHECK(witness);
      ++verified_false;
    }
  }
  CHECK(verified_true >= 5);
  CHECK(verified_false >= 5);
}

TEST_CASE("inclusion_v basics") {
  Tolerances tol;
  Matrix F(2, 3);
  F << 0, 2, 0, 0, 0, 2;  // triangle (0,0),(2,0),(0,2)
  PolyhedronV tri(F);
  Matrix seg(2, 2);
  seg << 0, 1, 0, 0;  // segment [0,1] x {0}
  PolyhedronV segment(seg);
  CHECK(inclusion_v(segment, tri, tol));
  CHECK_FALSE(inclusion_v(tri, segment, tol));
  CHECK(inclusion_v(tri, tri, tol));

  // rays: cone of e1 inside cone of (e1, e2), not conversely
  Matrix pt = Matrix::Zero(2, 1);
  Matrix r1(2, 1);
  r1 << 1, 0;
  Matrix r12(2, 2);
  r12 << 1, 0, 0, 1;
  CHECK(inclusion_v(PolyhedronV(pt, r1), PolyhedronV(pt, r12), tol));
  CHECK_FALSE(inclusion_v(PolyhedronV(pt, r12), PolyhedronV(pt, r1), tol));
}

TEST_CASE("inclusion_v agrees with inclusion_h after conversion") {
  Tolerances tol;
  auto g = agvtest::rng(34);
  int agreements = 0;
  for (int t = 0; t < 40; ++t) {
    const int d = 2 + (t % 2);
    Matrix F1 = agvtest::random_matrix(g, d, d + 2, 1.0);
    Matrix F2 = agvtest::random_matrix(g, d, d + 3, 1.6);
    PolyhedronV v1(F1), v2(F2);
    const bool vv = inclusion_v(v1, v2, tol);
    const bool hh = inclusion_h(agvtest::v_to_h(v1), agvtest::v_to_h(v2), tol);
    CHECK(vv == hh);
    ++agreements;
  }
  CHECK(agreements == 40);
}

TEST_CASE("fm_eliminate: one-step example") {
  Tolerances tol;
  Matrix A(2, 2);
  A << 1, 1, 0, -1;  // x + y <= 1, -y <= 0
  Vector b(2);
  b << 1, 0;
  auto proj = fm_eliminate(PolyhedronH(A, b), {1}, tol);
  REQUIRE(proj.dim() == 1);
  Matrix Ae(1, 1);
  Ae << 1;
  Vector be(1);
  be << 1;
  CHECK(set_equal(proj, PolyhedronH(Ae, be), tol));
}

TEST_CASE("fm_eliminate: empty drop set returns the same set") {
  Tolerances tol;
  auto g = agvtest::rng(35);
  auto P = random_bounded_hpoly(g, 3, 4);
  CHECK(set_equal(fm_eliminate(P, {}, tol), P, tol));
}

TEST_CASE("fm_eliminate projection agrees with sampling") {
  Tolerances tol;
  auto g = agvtest::rng(36);
  for (int t = 0; t < 6; ++t) {
    auto P = random_bounded_hpoly(g, 4, 3);
    auto proj = fm_eliminate(P, {1, 3}, tol);
    REQUIRE(proj.dim() == 2);
    for (const auto& pt : sample_points(P, g, 170, tol)) {
      Vector q(2);
      q << pt(0), pt(2);
      CHECK(contains_point(proj, q, 1e-6));
    }
    // and projected points admit preimages
    for (const auto& q : sample_points(proj, g, 30, tol)) {
      Matrix Alift = P.a;
      LinearProgram lp;
      lp.num_vars = 2;  // the dropped coordinates
      lp.objective = Vector::Zero(2);
      lp.a_ub = Matrix(P.rows(), 2);
      lp.a_ub.col(0) = P.a.col(1);
      lp.a_ub.col(1) = P.a.col(3);
      lp.b_ub = P.b - P.a.col(0) * q(0) - P.a.col(2) * q(1);
      lp.a_eq = Matrix(0, 2);
      lp.b_eq = Vector(0);
      auto r = lp_solve(lp, tol);
      CHECK(r.status == LpStatus::Optimal);
    }
  }
}

TEST_CASE("fm_eliminate is order independent") {
  Tolerances tol;
  auto g = agvtest::rng(37);
  for (int t = 0; t < 6; ++t) {
    auto P = random_bounded_hpoly(g, 4, 3);
    auto both = fm_eliminate(P, {0, 2}, tol);
    auto seq1 = fm_eliminate(fm_eliminate(P, {2}, tol), {0}, tol);
    // after dropping column 2 first, original column 0 is still column 0
    CHECK(set_equal(both, seq1, tol));
  }
}

TEST_CASE("sum_with_column_span") {
  Tolerances tol;
  auto B = box(2, 1.0);

  // zero K leaves the set unchanged
  CHECK(set_equal(sum_with_column_span(B, Matrix::Zero(2, 1), tol), B, tol));

  // adding span(e2) turns the box into a slab in x
  Matrix K(2, 1);
  K << 0, 1;
  auto slab = sum_with_column_span(B, K, tol);
  Matrix As(2, 2);
  As << 1, 0, -1, 0;
  Vector bs(2);
  bs << 1, 1;
  CHECK(set_equal(slab, PolyhedronH(As, bs), tol));

  // Minkowski monotonicity and membership of s + K kappa
  auto g = agvtest::rng(38);
  for (int t = 0; t < 6; ++t) {
    auto P = random_bounded_hpoly(g, 3, 3);
    Matrix Kr = agvtest::random_matrix(g, 3, 1, 1.0);
    auto S = sum_with_column_span(P, Kr, tol);
    CHECK(inclusion_h(P, S, tol));
    for (const auto& pt : sample_points(P, g, 40, tol)) {
      const double kappa = agvtest::uniform(g, -3.0, 3.0);
      CHECK(contains_point(S, pt + Kr.col(0) * kappa, 1e-6));
    }
  }
}

TEST_CASE("extendability: nondecreasing signal extends") {
  Tolerances tol;
  std::vector<Matrix> blocks = {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, -1.0)};
  Vector a0 = Vector::Zero(1);
  CHECK(extendability_check(blocks, a0, tol));
}

TEST_CASE("extendability: forced decrease on a bounded range does not extend") {
  Tolerances tol;
  // rows: u1 - u0 <= -1;  0 <= u0 <= 1;  0 <= u1 <= 1
  Matrix A0(5, 1), A1(5, 1);
  Vector a0(5);
  A0 << -1, 1, -1, 0, 0;
  A1 << 1, 0, 0, 1, -1;
  a0 << -1, 1, 0, 1, 0;
  CHECK_FALSE(extendability_check({A0, A1}, a0, tol));
}

TEST_CASE("extendability: sampled forall-exists soundness") {
  Tolerances tol;
  auto g = agvtest::rng(39);
  int extendable_seen = 0;
  for (int t = 0; t < 20; ++t) {
    // windows over (u0, u1) with a box plus a random coupling row
    Matrix A0(5, 1), A1(5, 1);
    Vector a0(5);
    A0 << 1, -1, 0, 0, agvtest::uniform(g, -1, 1);
    A1 << 0, 0, 1, -1, agvtest::uniform(g, -1, 1);
    a0 << 1, 1, 1, 1, agvtest::uniform(g, 0.2, 2.0);
    if (!extendability_check({A0, A1}, a0, tol)) continue;
    ++extendable_seen;

    Matrix W(5, 2);
    W.col(0) = A0;
    W.col(1) = A1;
    PolyhedronH s_minus(W, a0);
    for (const auto& z : sample_points(s_minus, g, 10, tol)) {
      // exists u2 with (z1, u2) feasible
      LinearProgram lp;
      lp.num_vars = 1;
      lp.objective = Vector::Zero(1);
      lp.a_ub = A1;
      lp.b_ub = a0 - A0 * z.tail(1);
      lp.a_eq = Matrix(0, 1);
      lp.b_eq = Vector(0);
      CHECK(lp_solve(lp, tol).status == LpStatus::Optimal);
    }
  }
  CHECK(extendable_seen >= 5);
}

TEST_CASE("conversion round trip preserves the set") {
  Tolerances tol;
  auto g = agvtest::rng(40);
  for (int t = 0; t < 12; ++t) {
    auto P = random_bounded_hpoly(g, 2 + (t % 2), 3);
    auto V = agvtest::h_to_v(P);
    auto H2 = agvtest::v_to_h(V);
    CHECK(set_equal(P, H2, tol));
  }
}

TEST_CASE("shift operators have the documented block structure") {
  auto ops = ShiftOperators::make(2, 3);
  CHECK(ops.t_shift.rows() == 6);
  CHECK((ops.t_shift * ops.k_embed - ops.k_embed).norm() > 0);  // blocks >= 2
  Vector z(6);
  z << 1, 2, 3, 4, 5, 6;
  Vector shifted = ops.t_shift * z;
  CHECK(shifted(0) == 3);
  CHECK(shifted(3) == 6);
  CHECK(shifted(4) == 0);
  CHECK(shifted(5) == 0);
}

TEST_CASE("interior ball radius and boundedness helpers") {
  Tolerances tol;
  CHECK(interior_ball_radius_at_origin(box(2, 1.0)) == doctest::Approx(1.0));
  CHECK(h_polyhedron_bounded(box(3, 2.0), tol));
  Matrix A(1, 2);
  A << 1, 0;
  CHECK_FALSE(h_polyhedron_bounded(PolyhedronH(A, Vector::Ones(1)), tol));
}
