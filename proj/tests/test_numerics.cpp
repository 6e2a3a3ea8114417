#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "numerics.hpp"
#include "test_support.hpp"

using namespace agv;
using agvtest::power_iteration_norm;
using agvtest::random_matrix;
using agvtest::random_stable_matrix;

TEST_CASE("operator_norm basics") {
  CHECK(operator_norm(Matrix::Identity(3, 3)) == doctest::Approx(1.0));
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 2.0;
  D(1, 1) = 0.5;
  CHECK(operator_norm(D) == doctest::Approx(2.0));
  CHECK(operator_norm(Matrix::Zero(2, 3)) == doctest::Approx(0.0));

  Matrix bad = Matrix::Ones(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(operator_norm(bad), std::invalid_argument);
}

TEST_CASE("operator_norm matches power iteration on random matrices") {
  auto g = agvtest::rng(11);
  for (int t = 0; t < 20; ++t) {
    Matrix M = random_matrix(g, 4, 3, 2.0);
    CHECK(operator_norm(M) == doctest::Approx(power_iteration_norm(M)).epsilon(1e-10));
  }
}

TEST_CASE("spectral_radius") {
  CHECK(spectral_radius(Matrix::Identity(4, 4)) == doctest::Approx(1.0));
  Matrix N = Matrix::Zero(3, 3);
  N(0, 1) = 5.0;
  N(1, 2) = -3.0;
  CHECK(spectral_radius(N) == doctest::Approx(0.0));
  CHECK_THROWS_AS(spectral_radius(Matrix::Zero(2, 3)), std::invalid_argument);

  // Leader-follower closed loop: eigenvalue moduli {0, 0.85} at dt=0.3, h=2.
  Matrix A(2, 2);
  A << 1.0, 0.3, -0.5, -0.15;
  Eigen::EigenSolver<Matrix> es(A);
  std::vector<double> mods = {std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(1))};
  std::sort(mods.begin(), mods.end());
  CHECK(mods[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(mods[1] == doctest::Approx(0.85));
  CHECK(spectral_radius(A) == doctest::Approx(0.85));
}

TEST_CASE("operator norm dominates spectral radius") {
  auto g = agvtest::rng(12);
  Tolerances tol;
  for (int t = 0; t < 30; ++t) {
    Matrix A = random_matrix(g, 4, 4, 2.0);
    CHECK(operator_norm(A) >= spectral_radius(A) - 1e-10);
  }
}

TEST_CASE("submultiplicativity of power norms") {
  auto g = agvtest::rng(13);
  for (int t = 0; t < 20; ++t) {
    Matrix A = random_matrix(g, 3, 3, 1.5);
    const double n2 = operator_norm(matrix_power(A, 2));
    const double n3 = operator_norm(matrix_power(A, 3));
    const double n5 = operator_norm(matrix_power(A, 5));
    CHECK(n5 <= n2 * n3 + 1e-9 * (1.0 + n2 * n3));
  }
}

TEST_CASE("observability_index on the case studies") {
  Tolerances tol;
  Matrix A(2, 2);
  A << 1.0, 0.3, -0.5, -0.15;
  CHECK(observability_index(A, Matrix::Identity(2, 2), tol) == 1);

  // Double-integrator chain with position outputs saturates at depth 1.
  Matrix Adi = Matrix::Zero(4, 4);
  Adi.topLeftCorner(2, 2).setIdentity();
  Adi.topRightCorner(2, 2) = 0.5 * Matrix::Identity(2, 2);
  Adi.bottomRightCorner(2, 2).setIdentity();
  Matrix Cdi = Matrix::Zero(2, 4);
  Cdi.leftCols(2).setIdentity();
  CHECK(observability_index(Adi, Cdi, tol) == 2);

  CHECK(observability_index(A, Matrix::Zero(1, 2), tol) == 1);
  CHECK_THROWS_AS(observability_index(A, Matrix::Zero(1, 3), tol), std::invalid_argument);
}

TEST_CASE("observability_index matches brute-force rank scan") {
  auto g = agvtest::rng(14);
  Tolerances tol;
  for (int t = 0; t < 25; ++t) {
    const int nx = 2 + static_cast<int>(agvtest::uniform(g, 0, 3));
    const int ny = 1 + static_cast<int>(agvtest::uniform(g, 0, 2));
    Matrix A = random_matrix(g, nx, nx);
    Matrix C = random_matrix(g, ny, nx);
    // brute force: stack up to j = nx and find first rank saturation
    int expected = nx;
    for (int j = 0; j <= nx; ++j) {
      Matrix Oj((j + 1) * ny, nx), Oj1((j + 2) * ny, nx);
      for (int r = 0; r <= j; ++r) Oj.middleRows(r * ny, ny) = C * matrix_power(A, r);
      for (int r = 0; r <= j + 1; ++r) Oj1.middleRows(r * ny, ny) = C * matrix_power(A, r);
      if (numerical_rank(Oj, tol) == numerical_rank(Oj1, tol)) {
        expected = j + 1;
        break;
      }
    }
    CHECK(observability_index(A, C, tol) == expected);
  }
}

TEST_CASE("matrix_power_norms") {
  Matrix A = 0.5 * Matrix::Identity(3, 3);
  auto norms = matrix_power_norms(A, 3);
  REQUIRE(norms.size() == 4);
  CHECK(norms[0] == doctest::Approx(1.0));
  CHECK(norms[1] == doctest::Approx(0.5));
  CHECK(norms[2] == doctest::Approx(0.25));
  CHECK(norms[3] == doctest::Approx(0.125));

  Matrix N = Matrix::Zero(2, 2);
  N(0, 1) = 7.0;
  auto nn = matrix_power_norms(N, 4);
  CHECK(nn[1] == doctest::Approx(7.0));
  CHECK(nn[2] == doctest::Approx(0.0));
  CHECK(nn[3] == doctest::Approx(0.0));

  // norms of powers match direct multiplication
  auto g = agvtest::rng(15);
  Matrix R = random_matrix(g, 3, 3);
  auto rn = matrix_power_norms(R, 6);
  for (int k = 0; k <= 6; ++k)
    CHECK(rn[k] == doctest::Approx(operator_norm(matrix_power(R, k)) + (k == 0 ? 0.0 : 0.0)));
}

TEST_CASE("Gelfand: ||A^k||^{1/k} approaches the spectral radius") {
  auto g = agvtest::rng(16);
  for (int t = 0; t < 5; ++t) {
    Matrix A = random_stable_matrix(g, 4, agvtest::uniform(g, 0.3, 0.9));
    const double rho = spectral_radius(A);
    const double nk = operator_norm(matrix_power(A, 200));
    const double root = std::pow(nk, 1.0 / 200.0);
    CHECK(std::abs(root - rho) < 0.05);
  }
}

TEST_CASE("tolerances validation") {
  Tolerances t;
  CHECK_NOTHROW(t.check());
  t.rank_tol = 0.0;
  CHECK_THROWS_AS(t.check(), std::invalid_argument);
}
