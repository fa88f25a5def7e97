#include "strnn/common.hpp"

#include <Eigen/SVD>

namespace strnn {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> sym_eigs(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix must be square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::domain_error("matrix must be symmetric");
  return Eigen::SelfAdjointEigenSolver<Matrix>(a);
}

}  // namespace

Matrix sym_sqrt(const Matrix& a) {
  if (a.size() == 0) return a;
  const auto es = sym_eigs(a);
  Vector lam = es.eigenvalues();
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < -1e-10 * scale) throw std::domain_error("matrix must be positive semidefinite");
    lam(i) = std::sqrt(std::max(0.0, lam(i)));
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Matrix sym_inv_sqrt(const Matrix& a) {
  if (a.size() == 0) return a;
  const auto es = sym_eigs(a);
  Vector lam = es.eigenvalues();
  if (lam.minCoeff() <= 0.0)
    throw RegimeError("covariance is not positive definite");
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = 1.0 / std::sqrt(lam(i));
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace strnn
