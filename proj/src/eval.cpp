#include "strnn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace strnn::eval {

namespace {

void check_sample(std::size_t means, std::size_t labels) {
  if (means != labels) throw std::invalid_argument("means and labels differ in length");
  if (means == 0) throw std::invalid_argument("empty sample");
}

}  // namespace

int classify_noiseless(const Vector& nu, const learn::ModelParams& p) {
  if (nu.size() != p.omega.size()) throw std::invalid_argument("mean length must match omega");
  return nu.dot(p.omega) + p.b >= 0.0 ? 1 : -1;
}

int classify_stochastic(const Vector& nu, const learn::ModelParams& p, const Matrix& sqrt_A,
                        Rng& rng) {
  if (nu.size() != p.omega.size()) throw std::invalid_argument("mean length must match omega");
  if (sqrt_A.rows() != nu.size() || sqrt_A.cols() != nu.size())
    throw std::invalid_argument("covariance root shape mismatch");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector g(nu.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = gauss(rng);
  const Vector y = nu + sqrt_A * g;
  return classify_noiseless(y, p);
}

Vector simulate_sde(const paths::Path& p, const Matrix& u,
                    const reservoir::ReservoirSystem& sys, double dt, Rng& rng) {
  p.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (u.rows() != sys.n || u.cols() != sys.r)
    throw std::invalid_argument("input matrix shape mismatch");
  if (p.dim() != sys.r) throw std::invalid_argument("path and reservoir dimensions differ");

  const double T = p.horizon();
  const auto steps = static_cast<long>(std::ceil(T / dt - 1e-12));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector y = Vector::Zero(sys.n);
  Vector noise(sys.d);
  double t = 0.0;
  for (long k = 0; k < steps; ++k) {
    const double h = std::min(dt, T - t);
    const Vector x = paths::eval_path(p, t);
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = gauss(rng);
    y += h * (sys.W0 * y + u * x) + std::sqrt(h) * (sys.Sigma * noise);
    t += h;
  }
  return y;
}

std::vector<Vector> dataset_means(const reservoir::ReservoirSystem& sys,
                                  const paths::LabeledDataset& d, const Matrix& u) {
  d.validate();
  if (d.dim() != sys.r) throw std::invalid_argument("dataset and reservoir dimensions differ");
  if (std::abs(d.horizon() - sys.T) > 1e-9 * std::max(1.0, sys.T))
    throw std::invalid_argument("dataset horizon must match the reservoir horizon");
  std::vector<Vector> means;
  means.reserve(d.paths.size());
  for (const auto& p : d.paths) means.push_back(features::exact_mean(sys.W0, u, p));
  return means;
}

double noiseless_accuracy(const std::vector<Vector>& means, const std::vector<int>& labels,
                          const learn::ModelParams& p) {
  check_sample(means.size(), labels.size());
  long correct = 0;
  for (std::size_t i = 0; i < means.size(); ++i)
    if (classify_noiseless(means[i], p) == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(means.size());
}

double noiseless_accuracy(const paths::LabeledDataset& d, const learn::ModelParams& p,
                          const reservoir::ReservoirSystem& sys) {
  return noiseless_accuracy(dataset_means(sys, d, p.u), d.labels, p);
}

AccuracyStats stochastic_accuracy(const std::vector<Vector>& means,
                                  const std::vector<int>& labels, const learn::ModelParams& p,
                                  const Matrix& A, int trials, std::uint64_t seed) {
  check_sample(means.size(), labels.size());
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  const Matrix root = sym_sqrt(A);

  AccuracyStats stats;
  stats.per_trial.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    Rng rng = rng_stream(seed, static_cast<std::uint64_t>(t));
    long correct = 0;
    for (std::size_t i = 0; i < means.size(); ++i)
      if (classify_stochastic(means[i], p, root, rng) == labels[i]) ++correct;
    stats.per_trial.push_back(static_cast<double>(correct) /
                              static_cast<double>(means.size()));
  }
  stats.min = *std::min_element(stats.per_trial.begin(), stats.per_trial.end());
  stats.max = *std::max_element(stats.per_trial.begin(), stats.per_trial.end());
  stats.avg = 0.0;
  for (double a : stats.per_trial) stats.avg += a;
  stats.avg /= trials;
  return stats;
}

AccuracyStats stochastic_accuracy(const paths::LabeledDataset& d, const learn::ModelParams& p,
                                  const reservoir::ReservoirSystem& sys, int trials,
                                  std::uint64_t seed) {
  return stochastic_accuracy(dataset_means(sys, d, p.u), d.labels, p, sys.A, trials, seed);
}

double pac_bound(const BoundInputs& bi) {
  if (bi.theta < 0.0) throw std::invalid_argument("theta must be nonnegative");
  if (bi.lambda_cap <= 0.0 || bi.radius <= 0.0 || bi.exp_norm_int <= 0.0)
    throw std::invalid_argument("bound constants must be positive");
  if (bi.lambda_min <= 0.0) throw RegimeError("bound needs a positive definite covariance");
  if (bi.delta <= 0.0 || bi.delta >= 1.0)
    throw std::invalid_argument("delta must be in (0,1)");
  if (bi.m < 1) throw std::invalid_argument("sample size must be >= 1");

  const double m = static_cast<double>(bi.m);
  const double complexity = 4.0 / std::sqrt(2.0 * std::numbers::pi * m * bi.lambda_min) *
                            (bi.theta + bi.lambda_cap * bi.radius * std::sqrt(bi.exp_norm_int));
  const double deviation = (2.0 + 5.0 * std::sqrt(std::log(2.0 / bi.delta) / 2.0)) / std::sqrt(m);
  return complexity + deviation;
}

std::int64_t sample_complexity(double epsilon, double delta, double theta, double lambda_cap,
                               double radius, double lambda_min, double exp_norm_int) {
  if (epsilon <= 0.0 || epsilon >= 1.0)
    throw std::invalid_argument("epsilon must be in (0,1)");
  if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("delta must be in (0,1)");
  if (theta < 0.0) throw std::invalid_argument("theta must be nonnegative");
  if (lambda_cap <= 0.0 || radius <= 0.0 || exp_norm_int <= 0.0)
    throw std::invalid_argument("bound constants must be positive");
  if (lambda_min <= 0.0) throw RegimeError("bound needs a positive definite covariance");

  const double c = 4.0 * (theta + lambda_cap * radius * std::sqrt(exp_norm_int)) /
                       std::sqrt(2.0 * std::numbers::pi * lambda_min) +
                   2.0 + 5.0 * std::sqrt(std::log(2.0 / delta));
  const double raw = 4.0 * c * c / (epsilon * epsilon);
  if (!(raw < 9.0e18)) throw NumericsError("required sample size overflows");
  return static_cast<std::int64_t>(std::ceil(raw));
}

double vc_bound(double risk_hat, int n, std::int64_t m, double delta) {
  if (risk_hat < 0.0) throw std::invalid_argument("empirical risk must be nonnegative");
  if (n < 1) throw std::invalid_argument("state dimension must be >= 1");
  if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("delta must be in (0,1)");
  if (m <= static_cast<std::int64_t>(n) + 1)
    throw std::domain_error("bound needs m > n + 1");

  const double md = static_cast<double>(m);
  const double np1 = static_cast<double>(n) + 1.0;
  return risk_hat + std::sqrt(2.0 * np1 * std::log(std::numbers::e * md / np1) / md) +
         std::sqrt(std::log(1.0 / delta) / (2.0 * md));
}

}  // namespace strnn::eval
