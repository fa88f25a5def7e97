#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "strnn/eval.hpp"

#include <cmath>
#include <vector>

using namespace strnn;
using namespace strnn::eval;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng = rng_stream(seed, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

Vector random_vector(int n, std::uint64_t seed) { return random_matrix(n, 1, seed).col(0); }

Matrix random_spd(int n, std::uint64_t seed) {
  const Matrix b = random_matrix(n, n, seed);
  return b * b.transpose() + 0.1 * Matrix::Identity(n, n);
}

learn::ModelParams random_params(int n, int r, std::uint64_t seed) {
  learn::ModelParams p;
  p.u = random_matrix(n, r, seed) / std::sqrt(static_cast<double>(n) * r);
  p.omega = random_vector(n, seed + 1).normalized();
  p.b = 0.3;
  return p;
}

paths::Path constant_path(const Vector& c, double T = 1.0) {
  paths::Path p;
  p.times = {0.0, T};
  p.values.resize(2, c.size());
  p.values.row(0) = c.transpose();
  p.values.row(1) = c.transpose();
  return p;
}

reservoir::ReservoirSystem contraction_system() {
  reservoir::ReservoirSystem sys;
  sys.n = 2;
  sys.r = 2;
  sys.d = 2;
  sys.T = 1.0;
  sys.delta = 0.0;
  sys.seed_w = 0;
  sys.seed_sigma = 0;
  sys.cov_tol = 1e-9;
  sys.W = Matrix::Zero(2, 2);
  sys.W0 = -Matrix::Identity(2, 2);
  sys.Sigma = Matrix::Zero(2, 2);
  sys.A = Matrix::Zero(2, 2);
  sys.lambda_min = 0.0;
  sys.exp_norm_int = reservoir::exp_norm_integral(sys.W0, sys.T);
  sys.validate();
  return sys;
}

}  // namespace

TEST_CASE("noiseless classification follows the sign of the margin") {
  learn::ModelParams p;
  p.u = Matrix::Zero(2, 2);
  p.omega = Vector::Unit(2, 0);
  p.b = -0.75;
  Vector on_boundary(2);
  on_boundary << 0.75, 4.0;
  CHECK(classify_noiseless(on_boundary, p) == 1);

  p.b = 100.0;
  Vector nu = random_vector(2, 1);
  CHECK(classify_noiseless(nu, p) == 1);

  const learn::ModelParams q = random_params(5, 2, 2);
  for (int k = 0; k < 20; ++k) {
    const Vector v = random_vector(5, 10 + k);
    const double margin = v.dot(q.omega) + q.b;
    CHECK(classify_noiseless(v, q) == (margin >= 0.0 ? 1 : -1));
  }
  CHECK_THROWS_AS(classify_noiseless(random_vector(3, 3), q), std::invalid_argument);
}

TEST_CASE("stochastic classification with zero covariance is noiseless") {
  const learn::ModelParams p = random_params(4, 2, 5);
  const Matrix zero_root = Matrix::Zero(4, 4);
  Rng rng = rng_stream(6, 0);
  for (int k = 0; k < 10; ++k) {
    const Vector nu = random_vector(4, 20 + k);
    CHECK(classify_stochastic(nu, p, zero_root, rng) == classify_noiseless(nu, p));
  }
}

TEST_CASE("stochastic misclassification frequency matches the loss") {
  const int n = 3;
  const Matrix A = random_spd(n, 31);
  const learn::ModelParams p = random_params(n, 2, 32);
  const Vector nu = 0.5 * random_vector(n, 33);
  const double l = learn::loss(nu, 1, p, A);

  const Matrix root = sym_sqrt(A);
  const int draws = 100000;
  Rng rng = rng_stream(34, 0);
  int wrong = 0;
  for (int k = 0; k < draws; ++k)
    if (classify_stochastic(nu, p, root, rng) != 1) ++wrong;
  const double freq = static_cast<double>(wrong) / draws;
  const double sigma = std::sqrt(l * (1.0 - l) / draws);
  CHECK(std::abs(freq - l) <= 3.0 * sigma);
}

TEST_CASE("sde simulation without input or noise stays at rest") {
  const auto sys = contraction_system();
  Vector c(2);
  c << 0.7, -0.4;
  Rng rng = rng_stream(41, 0);
  const Vector y = simulate_sde(constant_path(c), Matrix::Zero(2, 2), sys, 1e-3, rng);
  CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sde simulation reproduces the deterministic linear flow") {
  const auto sys = contraction_system();
  Vector c(2);
  c << 0.7, -0.4;
  const Matrix u = Matrix::Identity(2, 2);
  const double dt = 1e-3;
  Rng rng = rng_stream(42, 0);
  const Vector y = simulate_sde(constant_path(c), u, sys, dt, rng);

  // exact solution of the Euler recursion y_{k+1} = y_k + dt (c - y_k)
  const Vector discrete = (1.0 - std::pow(1.0 - dt, 1000)) * c;
  CHECK((y - discrete).cwiseAbs().maxCoeff() < 1e-13);
  const Vector ode_limit = (1.0 - std::exp(-1.0)) * c;
  CHECK((y - ode_limit).cwiseAbs().maxCoeff() < dt);

  // last step is shortened to land exactly on the horizon
  Rng rng2 = rng_stream(42, 0);
  const Vector y2 = simulate_sde(constant_path(c), u, sys, 0.3, rng2);
  Vector ref = Vector::Zero(2);
  for (double h : {0.3, 0.3, 0.3, 0.1}) ref += h * (c - ref);
  CHECK((y2 - ref).cwiseAbs().maxCoeff() < 1e-13);

  CHECK_THROWS_AS(simulate_sde(constant_path(c), u, sys, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(simulate_sde(constant_path(c), Matrix::Zero(2, 3), sys, dt, rng),
                  std::invalid_argument);
}

TEST_CASE("sde simulation is reproducible under seeding") {
  const auto sys = reservoir::make_reservoir(3, 2, 1.0, 0.8, 7, 8);
  const Matrix u = 0.4 * random_matrix(3, 2, 51);
  Vector c(2);
  c << 1.0, -0.5;
  Rng r1 = rng_stream(52, 0);
  Rng r2 = rng_stream(52, 0);
  Rng r3 = rng_stream(52, 1);
  const Vector a = simulate_sde(constant_path(c), u, sys, 1e-2, r1);
  const Vector b = simulate_sde(constant_path(c), u, sys, 1e-2, r2);
  const Vector d = simulate_sde(constant_path(c), u, sys, 1e-2, r3);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - d).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("sde terminal states follow the gaussian law") {
  const auto sys = reservoir::make_reservoir(3, 2, 1.0, 0.8, 7, 8);
  const Matrix u = 0.4 * random_matrix(3, 2, 61);

  paths::Path p;
  p.times = {0.0, 0.5, 1.0};
  p.values.resize(3, 2);
  p.values << 0.0, 0.0, 0.5, -0.3, 1.0, 0.4;

  const Vector nu = features::exact_mean(sys.W0, u, p);
  const int runs = 10000;
  const double dt = 1e-3;
  Rng rng = rng_stream(62, 0);
  Matrix samples(runs, 3);
  for (int k = 0; k < runs; ++k) samples.row(k) = simulate_sde(p, u, sys, dt, rng).transpose();

  const Vector mean = samples.colwise().mean().transpose();
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(mean(i) - nu(i)) <=
          4.0 * std::sqrt(sys.A(i, i) / runs) + 5.0 * dt);

  const Matrix centered = samples.rowwise() - mean.transpose();
  const Matrix sample_cov = centered.transpose() * centered / (runs - 1);
  CHECK((sample_cov - sys.A).norm() <= 0.10 * sys.A.norm());
}

TEST_CASE("accuracy counts correct labels") {
  learn::ModelParams p;
  p.u = Matrix::Zero(2, 2);
  p.omega = Vector::Unit(2, 0);
  p.b = 0.0;
  Vector e1 = Vector::Unit(2, 0);
  const std::vector<Vector> means{e1, (-e1).eval(), (2.0 * e1).eval()};

  CHECK(noiseless_accuracy(means, {1, -1, 1}, p) == 1.0);
  CHECK(noiseless_accuracy(means, {1, -1, -1}, p) == doctest::Approx(2.0 / 3.0));
  CHECK(noiseless_accuracy(means, {-1, 1, -1}, p) == 0.0);
  CHECK_THROWS_AS(noiseless_accuracy({}, {}, p), std::invalid_argument);
  CHECK_THROWS_AS(noiseless_accuracy(means, {1, -1}, p), std::invalid_argument);

  const Matrix zero = Matrix::Zero(2, 2);
  const AccuracyStats st = stochastic_accuracy(means, {1, -1, 1}, p, zero, 4, 9);
  CHECK(st.per_trial.size() == 4);
  CHECK(st.min == 1.0);
  CHECK(st.max == 1.0);
  CHECK(st.avg == 1.0);
  CHECK_THROWS_AS(stochastic_accuracy(means, {1, -1, 1}, p, zero, 0, 9), std::invalid_argument);

  const Matrix A = 0.5 * Matrix::Identity(2, 2);
  const AccuracyStats noisy = stochastic_accuracy(means, {1, -1, 1}, p, A, 16, 10);
  CHECK(noisy.min <= noisy.avg);
  CHECK(noisy.avg <= noisy.max);
  for (double a : noisy.per_trial) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
  const AccuracyStats again = stochastic_accuracy(means, {1, -1, 1}, p, A, 16, 10);
  CHECK(again.avg == noisy.avg);
}

TEST_CASE("dataset accuracy overloads agree with the means route") {
  const auto sys = reservoir::make_reservoir(4, 2, 1.0, 0.5, 71, 72);
  Vector c(2);
  c << 1.0, 0.5;
  paths::LabeledDataset d;
  d.name = "pair";
  d.paths.push_back(constant_path(c));
  d.labels.push_back(1);
  d.paths.push_back(constant_path((-c).eval()));
  d.labels.push_back(-1);

  const learn::ModelParams p = random_params(4, 2, 73);
  const auto means = dataset_means(sys, d, p.u);
  REQUIRE(means.size() == 2);
  CHECK((means[0] - features::exact_mean(sys.W0, p.u, d.paths[0])).cwiseAbs().maxCoeff() == 0.0);
  CHECK(noiseless_accuracy(d, p, sys) == noiseless_accuracy(means, d.labels, p));

  const AccuracyStats a = stochastic_accuracy(d, p, sys, 5, 74);
  const AccuracyStats b = stochastic_accuracy(means, d.labels, p, sys.A, 5, 74);
  CHECK(a.avg == b.avg);
  CHECK(a.min == b.min);
  CHECK(a.max == b.max);
}

TEST_CASE("pac bound formula and scalings") {
  BoundInputs bi;
  bi.theta = 1.0;
  bi.lambda_cap = 1.0;
  bi.radius = 1.0;
  bi.lambda_min = 1.0;
  bi.exp_norm_int = 1.0;
  bi.delta = 0.01;
  bi.m = 100;
  CHECK(pac_bound(bi) == doctest::Approx(1.3329656396805107699).epsilon(1e-14));

  BoundInputs four = bi;
  four.m = 400;
  CHECK(pac_bound(four) == doctest::Approx(0.5 * pac_bound(bi)).epsilon(1e-15));

  BoundInputs flat = bi;
  flat.lambda_min = 1e30;
  CHECK(pac_bound(flat) == doctest::Approx(1.0138118153593646275).epsilon(1e-10));

  double prev = std::numeric_limits<double>::infinity();
  for (std::int64_t m : {10, 100, 1000, 10000}) {
    BoundInputs g = bi;
    g.m = m;
    const double v = pac_bound(g);
    CHECK(v < prev);
    prev = v;
  }

  BoundInputs bad = bi;
  bad.delta = 1.0;
  CHECK_THROWS_AS(pac_bound(bad), std::invalid_argument);
  bad = bi;
  bad.m = 0;
  CHECK_THROWS_AS(pac_bound(bad), std::invalid_argument);
  bad = bi;
  bad.lambda_min = 0.0;
  CHECK_THROWS_AS(pac_bound(bad), RegimeError);
  bad = bi;
  bad.theta = -1.0;
  CHECK_THROWS_AS(pac_bound(bad), std::invalid_argument);
}

TEST_CASE("sample complexity formula and scalings") {
  CHECK(sample_complexity(0.5, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0) == 1964);
  CHECK(sample_complexity(0.25, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0) == 7856);

  const auto m1 = sample_complexity(0.3, 0.1, 0.5, 2.0, 1.5, 0.7, 2.0);
  const auto m2 = sample_complexity(0.15, 0.1, 0.5, 2.0, 1.5, 0.7, 2.0);
  CHECK(std::llabs(m2 - 4 * m1) <= 4);

  std::int64_t prev = std::numeric_limits<std::int64_t>::max();
  for (double lam : {0.5, 1.0, 2.0, 4.0}) {
    const auto m = sample_complexity(0.4, 0.2, 1.0, 1.0, 1.0, lam, 1.0);
    CHECK(m <= prev);
    prev = m;
  }

  // a sample of the guaranteed size brings the generalisation bound below eps/2
  const double eps = 0.5;
  BoundInputs bi;
  bi.theta = 1.0;
  bi.lambda_cap = 1.0;
  bi.radius = 1.0;
  bi.lambda_min = 1.0;
  bi.exp_norm_int = 1.0;
  bi.delta = 0.5;
  bi.m = sample_complexity(eps, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0);
  CHECK(pac_bound(bi) <= eps / 2.0);

  CHECK_THROWS_AS(sample_complexity(1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(sample_complexity(0.5, 0.5, 1.0, 1.0, 1.0, 0.0, 1.0), RegimeError);
}

TEST_CASE("vc bound formula and scalings") {
  CHECK(vc_bound(0.0, 2, 1000, 0.1) == doctest::Approx(0.23605654891531515175).epsilon(1e-14));
  CHECK(vc_bound(0.3, 2, 1000, 0.1) ==
        doctest::Approx(0.3 + vc_bound(0.0, 2, 1000, 0.1)).epsilon(1e-15));

  double prev = std::numeric_limits<double>::infinity();
  for (std::int64_t m : {100, 200, 400, 800, 1600}) {
    const double v = vc_bound(0.0, 2, m, 0.1);
    CHECK(v < prev);
    prev = v;
  }

  CHECK_THROWS_AS(vc_bound(0.0, 2, 3, 0.1), std::domain_error);
  CHECK_THROWS_AS(vc_bound(0.0, 2, 2, 0.1), std::domain_error);
  CHECK(vc_bound(0.0, 2, 4, 0.1) > 0.0);
  CHECK_THROWS_AS(vc_bound(-0.1, 2, 1000, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(vc_bound(0.0, 2, 1000, 0.0), std::invalid_argument);
}
