#pragma once

#include "strnn/learn.hpp"

#include <cstdint>
#include <vector>

namespace strnn::eval {

// sign(<nu, omega> + b) with sign(0) = +1
int classify_noiseless(const Vector& nu, const learn::ModelParams& p);

// draws y = nu + sqrt_A * g, g standard normal, and classifies y;
// sqrt_A is the symmetric PSD root of the covariance, precomputed by the caller
int classify_stochastic(const Vector& nu, const learn::ModelParams& p, const Matrix& sqrt_A,
                        Rng& rng);

// Euler-Maruyama terminal state of dy = (-y + W y + u x(t)) dt + Sigma dB, y(0) = 0;
// fixed steps of size dt, the last step shortened to land exactly on the horizon
Vector simulate_sde(const paths::Path& p, const Matrix& u,
                    const reservoir::ReservoirSystem& sys, double dt, Rng& rng);

struct AccuracyStats {
  std::vector<double> per_trial;
  double min = 0.0;
  double max = 0.0;
  double avg = 0.0;
};

// terminal-law means of every path in the dataset under a fixed input matrix
std::vector<Vector> dataset_means(const reservoir::ReservoirSystem& sys,
                                  const paths::LabeledDataset& d, const Matrix& u);

double noiseless_accuracy(const std::vector<Vector>& means, const std::vector<int>& labels,
                          const learn::ModelParams& p);
double noiseless_accuracy(const paths::LabeledDataset& d, const learn::ModelParams& p,
                          const reservoir::ReservoirSystem& sys);

// trial t draws from rng_stream(seed, t); examples are sampled in dataset order
AccuracyStats stochastic_accuracy(const std::vector<Vector>& means,
                                  const std::vector<int>& labels, const learn::ModelParams& p,
                                  const Matrix& A, int trials, std::uint64_t seed);
AccuracyStats stochastic_accuracy(const paths::LabeledDataset& d, const learn::ModelParams& p,
                                  const reservoir::ReservoirSystem& sys, int trials,
                                  std::uint64_t seed);

struct BoundInputs {
  double theta = 0.0;
  double lambda_cap = 1.0;
  double radius = 1.0;
  double lambda_min = 1.0;
  double exp_norm_int = 1.0;
  double delta = 0.01;
  std::int64_t m = 1;
};

// 4/sqrt(2 pi m lambda_min) (Theta + Lambda R sqrt(exp_norm_int))
//   + (2 + 5 sqrt(log(2/delta)/2)) / sqrt(m)
double pac_bound(const BoundInputs& bi);

// smallest m with (4/eps^2)(4(Theta + Lambda R sqrt(E))/sqrt(2 pi lambda_min)
//   + 2 + 5 sqrt(log(2/delta)))^2 <= m
std::int64_t sample_complexity(double epsilon, double delta, double theta, double lambda_cap,
                               double radius, double lambda_min, double exp_norm_int);

// risk_hat + sqrt(2(n+1) log(e m/(n+1))/m) + sqrt(log(1/delta)/(2m)), needs m > n+1
double vc_bound(double risk_hat, int n, std::int64_t m, double delta);

}  // namespace strnn::eval
