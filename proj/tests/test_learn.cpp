#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "strnn/learn.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

using namespace strnn;
using namespace strnn::learn;

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

ModelParams random_params(int n, int r, std::uint64_t seed) {
  ModelParams p;
  p.u = random_matrix(n, r, seed) / std::sqrt(static_cast<double>(n) * r);
  p.omega = random_vector(n, seed + 1).normalized();
  p.b = 0.3;
  return p;
}

std::vector<BasisMeans> random_stacks(int n, int r, int m, std::uint64_t seed) {
  std::vector<BasisMeans> stacks;
  for (int i = 0; i < m; ++i) stacks.push_back({random_matrix(n, n * r, seed + 10 * i)});
  return stacks;
}

std::vector<int> alternating_labels(int m) {
  std::vector<int> labels(m);
  for (int i = 0; i < m; ++i) labels[i] = i % 2 == 0 ? 1 : -1;
  return labels;
}

paths::Path constant_path(const Vector& c, double T = 1.0) {
  paths::Path p;
  p.times = {0.0, T};
  p.values.resize(2, c.size());
  p.values.row(0) = c.transpose();
  p.values.row(1) = c.transpose();
  return p;
}

paths::LabeledDataset separable_dataset() {
  Vector c(2);
  c << 1.0, 0.5;
  paths::LabeledDataset d;
  d.name = "separable";
  for (int k = 0; k < 5; ++k) {
    d.paths.push_back(constant_path((c * (1.0 + 0.1 * k)).eval()));
    d.labels.push_back(1);
    d.paths.push_back(constant_path((-c * (1.0 + 0.1 * k)).eval()));
    d.labels.push_back(-1);
  }
  return d;
}

paths::LabeledDataset unit_horizon_trig(std::uint64_t seed, int per_class, int samples) {
  auto d = paths::gen_trig_dataset(seed, per_class, samples);
  for (auto& p : d.paths) {
    for (auto& t : p.times) t /= 2.0 * std::numbers::pi;
    p.times.back() = 1.0;
  }
  return d;
}

}  // namespace

TEST_CASE("loss closed forms and symmetries") {
  const Matrix A = Matrix::Identity(2, 2);
  ModelParams p;
  p.u = Matrix::Zero(2, 2);
  p.omega = Vector::Unit(2, 0);
  p.b = 0.0;
  Vector nu(2);
  nu << 0.0, 3.0;
  CHECK(loss(nu, 1, p, A) == 0.5);
  CHECK(loss(nu, -1, p, A) == 0.5);
  nu(0) = 1.0;
  CHECK(loss(nu, 1, p, A) == doctest::Approx(0.15865525393145705).epsilon(1e-12));

  const Matrix A2 = random_spd(4, 1);
  const ModelParams q = random_params(4, 2, 2);
  const Vector nu2 = random_vector(4, 3);
  CHECK(loss(nu2, 1, q, A2) + loss(nu2, -1, q, A2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(loss(nu2, 1, q, A2) > 0.0);
  CHECK(loss(nu2, 1, q, A2) < 1.0);

  ModelParams omega_scaled = q;
  const double c = 3.7;
  omega_scaled.omega = c * q.omega;
  omega_scaled.b = c * q.b;
  CHECK(loss(nu2, 1, omega_scaled, A2) == doctest::Approx(loss(nu2, 1, q, A2)).epsilon(1e-12));

  // scaling u by alpha is interchangeable with scaling the covariance by 1/alpha^2
  const double alpha = 2.5;
  ModelParams shifted = q;
  shifted.b = alpha * q.b;
  CHECK(loss((alpha * nu2).eval(), 1, shifted, A2) ==
        doctest::Approx(loss(nu2, 1, q, (A2 / (alpha * alpha)).eval())).epsilon(1e-12));

  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  ModelParams kernel_dir = p;
  kernel_dir.omega = Vector::Unit(2, 1);
  CHECK_THROWS_AS(loss(nu, 1, kernel_dir, singular), RegimeError);
  CHECK_THROWS_AS(loss(nu, 0, p, A), std::invalid_argument);
}

TEST_CASE("empirical risk is the mean of the per-example losses") {
  const int n = 4, r = 2, m = 20;
  const Matrix A = random_spd(n, 5);
  const ModelParams p = random_params(n, r, 6);
  const auto stacks = random_stacks(n, r, m, 7);
  const auto labels = alternating_labels(m);

  std::vector<Vector> means;
  double manual = 0.0;
  for (int i = 0; i < m; ++i) {
    means.push_back(stacks[i].mean_of(p.u));
    manual += loss(means.back(), labels[i], p, A);
  }
  manual /= m;
  CHECK(empirical_risk(means, labels, p, A) == doctest::Approx(manual).epsilon(1e-12));
  CHECK(empirical_risk(stacks, labels, p, A) == doctest::Approx(manual).epsilon(1e-12));
  CHECK(empirical_risk(std::vector<Vector>{means[0]}, std::vector<int>{labels[0]}, p, A) ==
        doctest::Approx(loss(means[0], labels[0], p, A)).epsilon(1e-15));
  CHECK_THROWS_AS(empirical_risk(std::vector<Vector>{}, std::vector<int>{}, p, A),
                  std::invalid_argument);
  CHECK_THROWS_AS(empirical_risk(means, alternating_labels(m - 1), p, A),
                  std::invalid_argument);
}

TEST_CASE("risk gradient matches central finite differences") {
  const int n = 6, r = 3, m = 10;
  const Matrix A = random_spd(n, 11);
  const ModelParams p = random_params(n, r, 12);
  const auto stacks = random_stacks(n, r, m, 13);
  const auto labels = alternating_labels(m);
  const RiskGradient g = risk_gradient(stacks, labels, p, A);
  CHECK(g.risk == doctest::Approx(empirical_risk(stacks, labels, p, A)).epsilon(1e-15));

  const double h = 1e-5;
  const auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j) {
      ModelParams lo = p, hi = p;
      lo.u(i, j) -= h;
      hi.u(i, j) += h;
      const double fd =
          (empirical_risk(stacks, labels, hi, A) - empirical_risk(stacks, labels, lo, A)) /
          (2 * h);
      CHECK(rel(g.grad_u(i, j), fd) < 1e-5);
    }
  for (int i = 0; i < n; ++i) {
    ModelParams lo = p, hi = p;
    lo.omega(i) -= h;
    hi.omega(i) += h;
    const double fd =
        (empirical_risk(stacks, labels, hi, A) - empirical_risk(stacks, labels, lo, A)) /
        (2 * h);
    CHECK(rel(g.grad_omega(i), fd) < 1e-5);
  }
  ModelParams lo = p, hi = p;
  lo.b -= h;
  hi.b += h;
  const double fd =
      (empirical_risk(stacks, labels, hi, A) - empirical_risk(stacks, labels, lo, A)) /
      (2 * h);
  CHECK(rel(g.grad_b, fd) < 1e-5);
}

TEST_CASE("gradient symmetries") {
  const int n = 5, r = 2;
  const Matrix A = random_spd(n, 21);
  ModelParams p = random_params(n, r, 22);
  p.b = 0.0;

  const Matrix s = random_matrix(n, n * r, 23);
  const std::vector<BasisMeans> pair_stacks{{s}, {(-s).eval()}};
  const RiskGradient g = risk_gradient(pair_stacks, {1, -1}, p, A);
  CHECK(g.grad_b == 0.0);

  // single example whose mean is orthogonal to omega: grad_b = -v phi(0)/sigma
  Vector nu = random_vector(n, 24);
  nu -= nu.dot(p.omega) * p.omega;
  const Vector uvec = p.u.reshaped();
  Matrix stack(n, n * r);
  for (int k = 0; k < n * r; ++k) stack.col(k) = nu * (uvec(k) / uvec.squaredNorm());
  const RiskGradient g1 = risk_gradient(std::vector<BasisMeans>{{stack}}, {1}, p, A);
  const double sigma = std::sqrt(p.omega.dot(A * p.omega));
  CHECK(g1.grad_b ==
        doctest::Approx(-1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma)).epsilon(1e-12));
}

TEST_CASE("spectral projection clips singular values") {
  const Matrix m = random_matrix(4, 3, 31);
  const Matrix inside = 0.5 * m / spectral_norm(m);
  CHECK((project_spectral(inside, 1.0) - inside).cwiseAbs().maxCoeff() == 0.0);

  const Matrix big = 3.0 * m / spectral_norm(m);
  const Matrix proj = project_spectral(big, 1.0);
  CHECK(spectral_norm(proj) == doctest::Approx(1.0).epsilon(1e-12));
  const Eigen::JacobiSVD<Matrix> sa(big), sb(proj);
  for (int k = 0; k < 3; ++k)
    CHECK(sb.singularValues()(k) ==
          doctest::Approx(std::min(sa.singularValues()(k), 1.0)).epsilon(1e-10));
  CHECK((project_spectral(proj, 1.0) - proj).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(project_spectral(m, 0.0), std::invalid_argument);
}

TEST_CASE("training separates constant-path classes") {
  const auto sys = reservoir::make_reservoir(4, 2, 1.0, 0.3, 21, 22);
  const auto d = separable_dataset();
  TrainConfig cfg;
  cfg.restarts = 3;
  cfg.max_iters = 150;
  cfg.seed = 5;
  const TrainResult res = erm_train(d, sys, cfg);

  CHECK(res.params.omega.norm() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(spectral_norm(res.params.u) <= cfg.lambda_cap + 1e-9);
  CHECK(res.winner >= 0);
  REQUIRE(!res.risk_trace.empty());
  for (std::size_t k = 1; k < res.risk_trace.size(); ++k)
    CHECK(res.risk_trace[k] < res.risk_trace[k - 1]);
  CHECK(res.final_risk == res.risk_trace.back());

  for (int i = 0; i < d.size(); ++i) {
    const Vector nu = features::exact_mean(sys.W0, res.params.u, d.paths[i]);
    const double margin = nu.dot(res.params.omega) + res.params.b;
    CHECK(margin * d.labels[i] > 0.0);
  }

  const TrainResult again = erm_train(d, sys, cfg);
  CHECK((again.params.u - res.params.u).cwiseAbs().maxCoeff() == 0.0);
  CHECK((again.params.omega - res.params.omega).cwiseAbs().maxCoeff() == 0.0);
  CHECK(again.params.b == res.params.b);

  // strictly classified means: scaling (u, b) jointly drives the risk toward zero
  const auto stacks = features::dataset_basis_means(sys.W0, d);
  double prev = 1.0;
  for (double alpha : {1.0, 2.0, 4.0, 8.0}) {
    ModelParams scaled = res.params;
    scaled.u = alpha * res.params.u;
    scaled.b = alpha * res.params.b;
    const double risk = empirical_risk(stacks, d.labels, scaled, sys.A);
    CHECK(risk < prev);
    prev = risk;
  }
}

TEST_CASE("warm starts can only improve the winner") {
  const auto sys = reservoir::make_reservoir(4, 2, 1.0, 0.5, 41, 42);
  const auto d = separable_dataset();
  TrainConfig cfg;
  cfg.restarts = 2;
  cfg.max_iters = 40;
  cfg.seed = 9;
  const TrainResult base = erm_train(d, sys, cfg);

  TrainConfig warm = cfg;
  warm.warm_starts = {base.params};
  warm.restarts = 1;
  const TrainResult refined = erm_train(d, sys, warm);
  CHECK(refined.final_risk <= base.final_risk * (1.0 + 1e-12));
}

TEST_CASE("regime and argument errors in training") {
  const auto d = separable_dataset();
  const auto degenerate = reservoir::make_reservoir(4, 2, 1.0, 0.0, 51, 52);
  TrainConfig cfg;
  cfg.restarts = 1;
  CHECK(degenerate.lambda_min == 0.0);
  CHECK_THROWS_AS(erm_train(d, degenerate, cfg), RegimeError);

  const auto wrong_dim = reservoir::make_reservoir(4, 3, 1.0, 0.5, 51, 52);
  CHECK_THROWS_AS(erm_train(d, wrong_dim, cfg), std::invalid_argument);

  TrainConfig bad = cfg;
  bad.restarts = 0;
  const auto ok = reservoir::make_reservoir(4, 2, 1.0, 0.5, 51, 52);
  CHECK_THROWS_AS(erm_train(d, ok, bad), std::invalid_argument);
}

TEST_CASE("truncated objective converges to the direct one") {
  const auto sys = reservoir::make_reservoir(5, 5, 1.0, 0.5, 61, 62);
  const auto d = unit_horizon_trig(63, 4, 48);
  const int order = 25;
  const double radius = paths::dataset_radius(d, paths::PathNorm::L1);
  CHECK(features::truncation_error_bound(spectral_norm(sys.W0), 1.0, 1.0, 1.0, radius, order) <
        1e-9);

  const auto direct = features::dataset_basis_means(sys.W0, d);
  const auto sigs = features::dataset_signatures(d, order);
  const auto trunc = features::dataset_truncated_basis_means(sys.W0, sigs);
  const ModelParams p = random_params(5, 5, 64);
  const double r1 = empirical_risk(direct, d.labels, p, sys.A);
  const double r2 = empirical_risk(trunc, d.labels, p, sys.A);
  CHECK(std::abs(r1 - r2) < 1e-8);
}

TEST_CASE("truncated training risk gap is nonnegative and bounded") {
  const auto sys = reservoir::make_reservoir(5, 5, 1.0, 0.6, 71, 72);
  const auto d = unit_horizon_trig(73, 6, 48);
  TrainConfig cfg;
  cfg.restarts = 2;
  cfg.max_iters = 60;
  cfg.seed = 74;

  const int order = 6;
  const TrainResult direct = erm_train(d, sys, cfg);
  TrainConfig tr_cfg = cfg;
  tr_cfg.warm_starts = {direct.params};
  const TrainResult truncated = truncated_erm_train(d, sys, tr_cfg, order);

  const auto stacks = features::dataset_basis_means(sys.W0, d);
  const double true_risk_of_truncated =
      empirical_risk(stacks, d.labels, truncated.params, sys.A);
  TrainConfig refine = cfg;
  refine.warm_starts = {direct.params, truncated.params};
  const TrainResult best_direct = erm_train(d, sys, refine);

  const double gap = true_risk_of_truncated - std::min(direct.final_risk, best_direct.final_risk);
  const double radius = paths::dataset_radius(d, paths::PathNorm::L1);
  const double bound = features::risk_gap_bound(spectral_norm(sys.W0), sys.T, cfg.lambda_cap,
                                                radius, sys.lambda_min, order);
  CHECK(gap >= -1e-12);
  CHECK(gap <= bound);
}

TEST_CASE("model json round trip") {
  const ModelParams p = random_params(5, 3, 81);
  const auto file = (std::filesystem::temp_directory_path() / "strnn_test_model.json").string();
  nlohmann::json extra;
  extra["final_risk"] = 0.123;
  save_model_json(p, file, extra);
  nlohmann::json back_extra;
  const ModelParams back = load_model_json(file, &back_extra);
  CHECK((back.u - p.u).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.omega - p.omega).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.b == p.b);
  CHECK(back_extra["final_risk"] == 0.123);
  CHECK_THROWS_AS(load_model_json("/nonexistent/model.json"), IoError);
  std::filesystem::remove(file);
}

TEST_CASE("svm solves the symmetric two-point problem") {
  const Matrix A = Matrix::Identity(3, 3);
  Vector pvec(3);
  pvec << 1.0, -2.0, 0.5;
  const std::vector<Vector> means{pvec, (-pvec).eval()};
  const std::vector<int> labels{1, -1};

  const SvmResult res = svm_baseline(means, labels, A, 1e6);
  CHECK(res.free_support_vector);
  CHECK(std::abs(res.b) < 1e-8);
  const double want_theta = 1.0 / (2.0 * pvec.squaredNorm());
  CHECK(res.theta(0) == doctest::Approx(want_theta).epsilon(1e-6));
  CHECK(res.theta(1) == doctest::Approx(want_theta).epsilon(1e-6));
  CHECK((res.alpha.normalized() - pvec.normalized()).norm() < 1e-8);
  CHECK(res.alpha.dot(pvec) == doctest::Approx(1.0).epsilon(1e-6));

  // box-saturated case: both duals pinned at the cap, midpoint rule for b
  const SvmResult capped = svm_baseline(means, labels, A, 0.01);
  CHECK(!capped.free_support_vector);
  CHECK(capped.theta(0) == doctest::Approx(0.01));
  CHECK(capped.theta(1) == doctest::Approx(0.01));
  CHECK(std::abs(capped.b) < 1e-10);

  CHECK_THROWS_AS(svm_baseline(means, std::vector<int>{1, 1}, A, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(svm_baseline(means, labels, A, 0.0), std::invalid_argument);
}

TEST_CASE("svm duality gap, duplicates, and whitening") {
  Rng rng = rng_stream(91, 0);
  std::normal_distribution<double> g(0.0, 0.5);
  std::vector<Vector> means;
  std::vector<int> labels;
  for (int i = 0; i < 15; ++i) {
    Vector v(2);
    v << 2.0 + g(rng), g(rng);
    means.push_back(v);
    labels.push_back(1);
    Vector w(2);
    w << -2.0 + g(rng), g(rng);
    means.push_back(w);
    labels.push_back(-1);
  }
  const Matrix A = random_spd(2, 92);
  const SvmResult res = svm_baseline(means, labels, A, 100.0);
  CHECK(std::abs(res.primal_objective - res.dual_objective) <=
        1e-5 * std::max(1.0, std::abs(res.primal_objective)));

  std::vector<Vector> dup = means;
  std::vector<int> dup_labels = labels;
  for (std::size_t i = 0; i < means.size(); ++i)
    if (labels[i] == 1)
      for (int c = 0; c < 9; ++c) {
        dup.push_back(means[i]);
        dup_labels.push_back(1);
      }
  const SvmResult res2 = svm_baseline(dup, dup_labels, A, 100.0);
  CHECK((res2.direction - res.direction).norm() < 1e-5 * res.direction.norm());
  CHECK(std::abs(res2.b - res.b) < 1e-4);

  // solving with covariance A equals solving whitened means with the identity
  const Matrix white = sym_inv_sqrt(A);
  std::vector<Vector> whitened;
  for (const Vector& v : means) whitened.push_back(white * v);
  const SvmResult res3 = svm_baseline(whitened, labels, Matrix::Identity(2, 2), 100.0);
  CHECK((res3.alpha - res.alpha).norm() < 1e-8 * (1.0 + res.alpha.norm()));
  CHECK(std::abs(res3.b - res.b) < 1e-8);
}

TEST_CASE("symmetric square roots") {
  const Matrix A = random_spd(4, 101);
  const Matrix s = sym_sqrt(A);
  const Matrix w = sym_inv_sqrt(A);
  CHECK((s * s - A).norm() < 1e-12 * A.norm());
  CHECK((s * w - Matrix::Identity(4, 4)).norm() < 1e-12);
  CHECK((w - w.transpose()).norm() < 1e-13);

  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 4.0;
  CHECK(sym_sqrt(singular)(0, 0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(sym_inv_sqrt(singular), RegimeError);
  Matrix asym = Matrix::Zero(2, 2);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(sym_sqrt(asym), std::domain_error);
}
