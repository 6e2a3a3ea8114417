#pragma once

#include <Eigen/Dense>
#include <vector>

namespace agv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Numeric policy shared across the library.
struct Tolerances {
  double rank_tol = 1e-9;          // relative singular-value cutoff
  double stability_margin = 1e-9;  // spectral-radius slack for the stability gate
  double lp_tol = 1e-9;            // nonpositivity threshold for LP optima

  void check() const;  // throws std::invalid_argument on a bad configuration
};

/// Largest singular value of M.
double operator_norm(const Matrix& M);

/// Maximum modulus of the eigenvalues of a square matrix.
double spectral_radius(const Matrix& A);

/// Numerical rank with relative cutoff tol.rank_tol * sigma_max.
Eigen::Index numerical_rank(const Matrix& M, const Tolerances& tol);

/// Observability index: 1 + min{ j >= 0 : rank O_j = rank O_{j+1} } where
/// O_j stacks C, CA, ..., CA^j.  Always in [1, n_x].
int observability_index(const Matrix& A, const Matrix& C, const Tolerances& tol);

/// ||A^k|| for k = 0..up_to (element 0 is 1 for a nonempty matrix).
std::vector<double> matrix_power_norms(const Matrix& A, int up_to);

/// A^k by repeated multiplication (k >= 0).
Matrix matrix_power(const Matrix& A, int k);

}  // namespace agv
