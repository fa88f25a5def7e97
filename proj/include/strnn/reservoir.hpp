#pragma once

#include "strnn/common.hpp"

#include <string>

namespace strnn::reservoir {

// The fixed random network and the derived constants of the terminal
// hidden-state law N(nu, A). Immutable after construction.
struct ReservoirSystem {
  int n = 0;  // hidden dimension
  int r = 0;  // input dimension
  int d = 0;  // Brownian dimension (= n)
  double T = 0.0;
  double delta = 0.0;
  std::uint64_t seed_w = 0;
  std::uint64_t seed_sigma = 0;
  double cov_tol = 1e-9;

  Matrix W;       // n x n connectivity
  Matrix W0;      // W - I
  Matrix Sigma;   // n x d noise matrix
  Matrix A;       // integral_0^T e^{W0 s} Sigma Sigma^T e^{W0^T s} ds
  double lambda_min = 0.0;
  double exp_norm_int = 0.0;  // integral_0^T ||e^{W0 s}||^2 ds, spectral norm

  void validate() const;
};

// Entries i.i.d. N(0, (0.9/sqrt(n))^2); the 0.9 scale keeps the spectral
// radius just inside stability.
Matrix gen_connectivity(int n, std::uint64_t seed);

// delta * U^T diag(lambda_1..lambda_n) U with lambda_i ~ U(0,1) drawn first,
// then U Haar-orthogonal via QR of a Gaussian matrix with the R-diagonal
// sign fix.
Matrix gen_noise_matrix(int n, double delta, std::uint64_t seed);

Matrix matrix_exp(const Matrix& m);

// Integrates dA/dt = Sigma Sigma^T + W0 A + A W0^T from A(0)=0 with adaptive
// stepping; result symmetrised.
Matrix compute_covariance(const Matrix& W0, const Matrix& Sigma, double T, double tol = 1e-9);

// Same integral by composite Gauss-Legendre with matrix_exp at each node;
// cross-check route for compute_covariance.
Matrix compute_covariance_quadrature(const Matrix& W0, const Matrix& Sigma, double T,
                                     int nodes = 512);

double min_eigenvalue(const Matrix& A);

// nodes = 0 picks max(256, 64 per unit time).
double exp_norm_integral(const Matrix& W0, double T, int nodes = 0);

ReservoirSystem make_reservoir(int n, int r, double T, double delta, std::uint64_t seed_w,
                               std::uint64_t seed_sigma, int d = -1, double cov_tol = 1e-9);

void save_reservoir_json(const ReservoirSystem& sys, const std::string& file);
ReservoirSystem load_reservoir_json(const std::string& file);

}  // namespace strnn::reservoir
