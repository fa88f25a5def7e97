#pragma once

#include "strnn/common.hpp"
#include "strnn/ode.hpp"
#include "strnn/path.hpp"

#include <string>
#include <vector>

namespace strnn::features {

using paths::LabeledDataset;
using paths::Path;

// Weighted time moments S_k = integral_0^T ((T-s)^k / k!) x(s) ds for
// k = 0..order, exact for the piecewise-linear interpolant.
struct PartialSignature {
  double horizon = 0.0;
  Matrix levels;  // dim x (order+1), column k holds S_k

  int order() const { return static_cast<int>(levels.cols()) - 1; }
  int dim() const { return static_cast<int>(levels.rows()); }
};

PartialSignature partial_signature(const Path& p, int order);
std::vector<PartialSignature> dataset_signatures(const LabeledDataset& d, int order);

// Rows `path_id,level,component,value`; path_id is the index in sigs.
void save_signatures_csv(const std::vector<PartialSignature>& sigs, const std::string& file);

// Terminal drift nu = integral_0^T e^{W0 (T-s)} u x(s) ds of the
// interpolant, by exact per-segment propagation.
Vector exact_mean(const Matrix& w0, const Matrix& u, const Path& p);

// Same integral as the solution of nu' = W0 nu + u x(t); adaptive stepping
// aligned to the sample grid. Cross-check route for exact_mean.
Vector compute_mean(const Matrix& w0, const Matrix& u, const Path& p,
                    const OdeOptions& opt = {});

// Same integral by per-segment Gauss-Legendre with a matrix exponential at
// every node; second cross-check route.
Vector compute_mean_quadrature(const Matrix& w0, const Matrix& u, const Path& p,
                               int nodes_per_segment = 8);

// Order-N approximation sum_{k<=N} W0^k u S_k, evaluated by Horner.
Vector truncated_mean(const Matrix& w0, const Matrix& u, const PartialSignature& sig);

// nu is linear in the input matrix: nu_{x,u} = sum_j M_j u.col(j) with
// M_j = integral_0^T e^{W0(T-s)} x_j(s) ds, so training only needs these
// blocks, computed once per path.
struct BasisMeans {
  Matrix stack;  // n x (n*r), block j holds M_j

  int n() const { return static_cast<int>(stack.rows()); }
  int r() const { return n() == 0 ? 0 : static_cast<int>(stack.cols()) / n(); }
  auto block(int j) const { return stack.middleCols(j * n(), n()); }

  Vector mean_of(const Matrix& u) const;

  // (i,j) entry <omega, M_j e_i>: the mean response to the basis input
  // e_i e_j^T, which is the u-gradient kernel.
  Matrix omega_projections(const Vector& omega) const;
};

BasisMeans basis_means(const Matrix& w0, const Path& p);
std::vector<BasisMeans> dataset_basis_means(const Matrix& w0, const LabeledDataset& d);

// Truncated counterparts built from signature levels: M_j = sum_k S_kj W0^k.
BasisMeans truncated_basis_means(const Matrix& w0, const PartialSignature& sig);
std::vector<BasisMeans> dataset_truncated_basis_means(const Matrix& w0,
                                                      const std::vector<PartialSignature>& sigs);

// e^a a^{N+1}/(N+1)! with a = ||W0|| T; the series tail factor.
double truncation_factor(double w0_norm, double T, int order);

// |<omega, nu - nu_N>| <= ||omega|| ||u|| path_l1 * truncation_factor(N).
double truncation_error_bound(double w0_norm, double T, double u_norm, double omega_norm,
                              double path_l1, int order);

// Risk gap of order-N truncated ERM against exact ERM over the
// spectral-norm-Lambda input ball on paths of L1 radius radius_l1:
// lambda_cap * radius_l1 * sqrt(2/(pi lambda_min)) * truncation_factor(N).
double risk_gap_bound(double w0_norm, double T, double lambda_cap, double radius_l1,
                      double lambda_min, int order);

// Smallest N with scale * truncation_factor(N) < tol.
int default_truncation_order(double w0_norm, double T, double scale, double tol);

}  // namespace strnn::features
