#include "numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <stdexcept>

namespace agv {

void Tolerances::check() const {
  if (!(rank_tol > 0)) throw std::invalid_argument("rank_tol must be > 0");
  if (!(stability_margin >= 0)) throw std::invalid_argument("stability_margin must be >= 0");
  if (!(lp_tol > 0)) throw std::invalid_argument("lp_tol must be > 0");
}

static void require_finite(const Matrix& M, const char* what) {
  if (!M.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

double operator_norm(const Matrix& M) {
  if (M.rows() == 0 || M.cols() == 0) throw std::invalid_argument("operator_norm: empty matrix");
  require_finite(M, "operator_norm");
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

double spectral_radius(const Matrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("spectral_radius: matrix not square");
  if (A.rows() == 0) return 0.0;
  require_finite(A, "spectral_radius");
  Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::Index numerical_rank(const Matrix& M, const Tolerances& tol) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& sv = svd.singularValues();
  const double cutoff = tol.rank_tol * sv(0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++r;
  return r;
}

int observability_index(const Matrix& A, const Matrix& C, const Tolerances& tol) {
  if (A.rows() != A.cols()) throw std::invalid_argument("observability_index: A not square");
  if (C.cols() != A.rows()) throw std::invalid_argument("observability_index: C has wrong column count");
  const Eigen::Index nx = A.rows();
  if (nx == 0) return 1;

  // Stack C, CA, CA^2, ... and find where the rank saturates.  Cayley-Hamilton
  // guarantees saturation no later than j = n_x - 1.
  Matrix block = C;
  Matrix stacked = C;
  Eigen::Index prev_rank = numerical_rank(stacked, tol);
  for (int j = 0; j < nx; ++j) {
    block = block * A;
    Matrix next(stacked.rows() + block.rows(), stacked.cols());
    next << stacked, block;
    const Eigen::Index r = numerical_rank(next, tol);
    if (r == prev_rank) return j + 1;
    stacked.swap(next);
    prev_rank = r;
  }
  return static_cast<int>(nx);
}

Matrix matrix_power(const Matrix& A, int k) {
  if (A.rows() != A.cols()) throw std::invalid_argument("matrix_power: matrix not square");
  if (k < 0) throw std::invalid_argument("matrix_power: negative exponent");
  Matrix P = Matrix::Identity(A.rows(), A.cols());
  for (int i = 0; i < k; ++i) P = P * A;
  return P;
}

std::vector<double> matrix_power_norms(const Matrix& A, int up_to) {
  if (A.rows() != A.cols()) throw std::invalid_argument("matrix_power_norms: matrix not square");
  if (up_to < 0) throw std::invalid_argument("matrix_power_norms: negative horizon");
  std::vector<double> norms;
  norms.reserve(up_to + 1);
  Matrix P = Matrix::Identity(A.rows(), A.cols());
  norms.push_back(A.rows() == 0 ? 0.0 : 1.0);
  for (int k = 1; k <= up_to; ++k) {
    P = P * A;
    norms.push_back(P.isZero(0.0) ? 0.0 : operator_norm(P));
  }
  return norms;
}

}  // namespace agv
