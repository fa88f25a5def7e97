#pragma once

#include "strnn/features.hpp"
#include "strnn/json_io.hpp"
#include "strnn/path.hpp"
#include "strnn/reservoir.hpp"

#include <vector>

namespace strnn::learn {

using features::BasisMeans;

// The linear readout sign(<y, omega> + b) applied to the terminal state
// driven through the input matrix u.
struct ModelParams {
  Matrix u;      // n x r, spectral norm kept <= Lambda
  Vector omega;  // unit length
  double b = 0.0;
};

struct TrainConfig {
  double lambda_cap = 1.0;  // spectral-norm bound on u
  double theta_cap = 0.0;   // bound on |b|; 0 leaves b free
  int restarts = 5;
  int max_iters = 300;
  double init_step = 1.0;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double grow = 1.5;
  double tol = 1e-8;  // stop once the relative risk decrease falls below
  std::uint64_t seed = 0;
  std::vector<ModelParams> warm_starts;  // run before the random restarts
};

struct TrainResult {
  ModelParams params;
  std::vector<double> risk_trace;  // winning run; first entry is the initial risk
  double final_risk = 0.0;
  int winner = -1;  // warm starts first, then random restarts
};

// Misclassification probability of the label under y ~ N(nu, A):
// Phi(-v (<nu,omega> + b) / sqrt(omega' A omega)), strictly inside (0,1).
// RegimeError if omega' A omega <= 0.
double loss(const Vector& nu, int label, const ModelParams& p, const Matrix& A);

double empirical_risk(const std::vector<Vector>& means, const std::vector<int>& labels,
                      const ModelParams& p, const Matrix& A);
double empirical_risk(const std::vector<BasisMeans>& stacks, const std::vector<int>& labels,
                      const ModelParams& p, const Matrix& A);

struct RiskGradient {
  double risk = 0.0;
  Matrix grad_u;
  Vector grad_omega;
  double grad_b = 0.0;
};

RiskGradient risk_gradient(const std::vector<BasisMeans>& stacks,
                           const std::vector<int>& labels, const ModelParams& p,
                           const Matrix& A);

// Clips singular values at cap; returns the input unchanged when already
// inside the ball.
Matrix project_spectral(const Matrix& m, double cap);

// Projected gradient descent with backtracking line search; omega and b are
// jointly rescaled to keep omega unit length, which leaves the objective
// unchanged. Accepted risks are strictly decreasing, best restart wins.
TrainResult train_on_features(const std::vector<BasisMeans>& stacks,
                              const std::vector<int>& labels, const Matrix& A,
                              const TrainConfig& cfg);

TrainResult erm_train(const paths::LabeledDataset& d, const reservoir::ReservoirSystem& sys,
                      const TrainConfig& cfg);

// Same objective with the mean replaced by its order-N signature expansion.
TrainResult truncated_erm_train(const paths::LabeledDataset& d,
                                const reservoir::ReservoirSystem& sys, const TrainConfig& cfg,
                                int order);

nlohmann::json model_to_json(const ModelParams& p);
ModelParams model_from_json(const nlohmann::json& j);
void save_model_json(const ModelParams& p, const std::string& file,
                     const nlohmann::json& extra = nlohmann::json::object());
ModelParams load_model_json(const std::string& file, nlohmann::json* extra = nullptr);

// Soft-margin SVM on whitened means z_i = A^{-1/2} nu_i, solved in the dual
// by sequential maximal-violating-pair updates.
struct SvmResult {
  Vector theta;      // dual variables in [0, lambda_reg]
  Vector alpha;      // sum_i theta_i v_i z_i, the normal in whitened space
  Vector direction;  // A^{-1/2} alpha, acts directly on raw means
  double b = 0.0;
  bool free_support_vector = false;  // b from margin vectors vs midpoint rule
  long iterations = 0;
  double dual_objective = 0.0;
  double primal_objective = 0.0;
};

SvmResult svm_baseline(const std::vector<Vector>& means, const std::vector<int>& labels,
                       const Matrix& A, double lambda_reg, double kkt_tol = 1e-6,
                       long max_updates = 0);

}  // namespace strnn::learn
