#include "strnn/reservoir.hpp"

#include "strnn/json_io.hpp"
#include "strnn/ode.hpp"
#include "strnn/quadrature.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace strnn::reservoir {

void ReservoirSystem::validate() const {
  if (n < 1 || r < 1 || d < 1) throw std::invalid_argument("ReservoirSystem: bad dimensions");
  if (!(T > 0.0)) throw std::invalid_argument("ReservoirSystem: horizon must be positive");
  if (delta < 0.0) throw std::invalid_argument("ReservoirSystem: negative noise scale");
  if (W.rows() != n || W.cols() != n || W0.rows() != n || W0.cols() != n ||
      Sigma.rows() != n || Sigma.cols() != d || A.rows() != n || A.cols() != n)
    throw std::invalid_argument("ReservoirSystem: shape mismatch");
  if ((W0 - (W - Matrix::Identity(n, n))).cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("ReservoirSystem: W0 != W - I");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("ReservoirSystem: covariance not symmetric");
  if (lambda_min < -1e-10 * scale)
    throw std::invalid_argument("ReservoirSystem: covariance has a negative eigenvalue");
  if (exp_norm_int < 0.0) throw std::invalid_argument("ReservoirSystem: negative norm integral");
}

Matrix gen_connectivity(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_connectivity: n must be >= 1");
  Rng rng = rng_stream(seed, 0);
  std::normal_distribution<double> dist(0.0, 0.9 / std::sqrt(static_cast<double>(n)));
  Matrix W(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) W(i, j) = dist(rng);
  return W;
}

Matrix gen_noise_matrix(int n, double delta, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_noise_matrix: n must be >= 1");
  if (delta < 0.0) throw std::domain_error("gen_noise_matrix: delta must be >= 0");
  Rng rng = rng_stream(seed, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector lambda(n);
  for (int i = 0; i < n; ++i) lambda(i) = unif(rng);

  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)  // sign fix makes the distribution exactly Haar
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);

  return delta * Q.transpose() * lambda.asDiagonal() * Q;
}

Matrix matrix_exp(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exp: matrix must be square");
  if (!m.allFinite()) throw std::domain_error("matrix_exp: non-finite entries");
  return m.exp();
}

Matrix compute_covariance(const Matrix& W0, const Matrix& Sigma, double T, double tol) {
  if (W0.rows() != W0.cols() || Sigma.rows() != W0.rows())
    throw std::invalid_argument("compute_covariance: shape mismatch");
  if (!(T > 0.0)) throw std::invalid_argument("compute_covariance: T must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("compute_covariance: tol must be positive");

  const Matrix S2 = Sigma * Sigma.transpose();
  OdeOptions opt;
  opt.abs_tol = tol * 1e-3;
  opt.rel_tol = tol * 1e-3;
  Matrix A = integrate_rk45(
      [&](double, const Matrix& a) { return (S2 + W0 * a + a * W0.transpose()).eval(); }, 0.0,
      T, Matrix::Zero(W0.rows(), W0.cols()).eval(), opt);
  return 0.5 * (A + A.transpose());
}

Matrix compute_covariance_quadrature(const Matrix& W0, const Matrix& Sigma, double T,
                                     int nodes) {
  if (W0.rows() != W0.cols() || Sigma.rows() != W0.rows())
    throw std::invalid_argument("compute_covariance_quadrature: shape mismatch");
  if (!(T > 0.0))
    throw std::invalid_argument("compute_covariance_quadrature: T must be positive");

  const Matrix S2 = Sigma * Sigma.transpose();
  const int segments = std::max(1, static_cast<int>(std::ceil(T)));
  const int per_seg = std::max(8, nodes / segments);
  GaussLegendre gl = gauss_legendre(per_seg);
  Matrix A = Matrix::Zero(W0.rows(), W0.cols());
  for (int seg = 0; seg < segments; ++seg) {
    const double a = T * seg / segments, b = T * (seg + 1) / segments;
    for (int i = 0; i < per_seg; ++i) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
      const double w = 0.5 * (b - a) * gl.weights[i];
      const Matrix E = matrix_exp((s * W0).eval());
      A.noalias() += w * E * S2 * E.transpose();
    }
  }
  return 0.5 * (A + A.transpose());
}

double min_eigenvalue(const Matrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("min_eigenvalue: matrix must be square");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::domain_error("min_eigenvalue: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double exp_norm_integral(const Matrix& W0, double T, int nodes) {
  if (W0.rows() != W0.cols())
    throw std::invalid_argument("exp_norm_integral: matrix must be square");
  if (!(T > 0.0)) throw std::invalid_argument("exp_norm_integral: T must be positive");
  if (nodes <= 0) nodes = std::max(256, 64 * static_cast<int>(std::ceil(T)));

  const int segments = std::max(1, static_cast<int>(std::ceil(T)));
  const int per_seg = std::max(8, (nodes + segments - 1) / segments);
  GaussLegendre gl = gauss_legendre(per_seg);
  double total = 0.0;
  for (int seg = 0; seg < segments; ++seg) {
    const double a = T * seg / segments, b = T * (seg + 1) / segments;
    for (int i = 0; i < per_seg; ++i) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
      const double w = 0.5 * (b - a) * gl.weights[i];
      const double nrm = spectral_norm(matrix_exp((s * W0).eval()));
      total += w * nrm * nrm;
    }
  }
  return total;
}

ReservoirSystem make_reservoir(int n, int r, double T, double delta, std::uint64_t seed_w,
                               std::uint64_t seed_sigma, int d, double cov_tol) {
  if (d < 0) d = n;
  if (d != n)
    throw std::invalid_argument("make_reservoir: only d = n is supported by the noise model");
  if (r < 1) throw std::invalid_argument("make_reservoir: r must be >= 1");

  ReservoirSystem sys;
  sys.n = n;
  sys.r = r;
  sys.d = d;
  sys.T = T;
  sys.delta = delta;
  sys.seed_w = seed_w;
  sys.seed_sigma = seed_sigma;
  sys.cov_tol = cov_tol;
  sys.W = gen_connectivity(n, seed_w);
  sys.W0 = sys.W - Matrix::Identity(n, n);
  sys.Sigma = gen_noise_matrix(n, delta, seed_sigma);
  sys.A = compute_covariance(sys.W0, sys.Sigma, T, cov_tol);
  sys.lambda_min = min_eigenvalue(sys.A);
  sys.exp_norm_int = exp_norm_integral(sys.W0, T);
  sys.validate();
  return sys;
}

void save_reservoir_json(const ReservoirSystem& sys, const std::string& file) {
  nlohmann::json j;
  j["n"] = sys.n;
  j["r"] = sys.r;
  j["d"] = sys.d;
  j["T"] = sys.T;
  j["delta"] = sys.delta;
  j["seed_w"] = sys.seed_w;
  j["seed_sigma"] = sys.seed_sigma;
  j["cov_tol"] = sys.cov_tol;
  j["W"] = json_rows(sys.W);
  j["Sigma"] = json_rows(sys.Sigma);
  j["A"] = json_rows(sys.A);
  j["lambda_min"] = sys.lambda_min;
  j["exp_norm_int"] = sys.exp_norm_int;
  save_json_file(j, file);
}

ReservoirSystem load_reservoir_json(const std::string& file) {
  const nlohmann::json j = load_json_file(file);
  ReservoirSystem sys;
  try {
    sys.n = j.at("n").get<int>();
    sys.r = j.at("r").get<int>();
    sys.d = j.at("d").get<int>();
    sys.T = j.at("T").get<double>();
    sys.delta = j.at("delta").get<double>();
    sys.seed_w = j.at("seed_w").get<std::uint64_t>();
    sys.seed_sigma = j.at("seed_sigma").get<std::uint64_t>();
    sys.cov_tol = j.at("cov_tol").get<double>();
    sys.W = matrix_from_json(j.at("W"));
    sys.Sigma = matrix_from_json(j.at("Sigma"));
    sys.A = matrix_from_json(j.at("A"));
    sys.lambda_min = j.at("lambda_min").get<double>();
    sys.exp_norm_int = j.at("exp_norm_int").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(file + ": " + e.what());
  }
  sys.W0 = sys.W - Matrix::Identity(sys.n, sys.n);
  sys.validate();
  return sys;
}

}  // namespace strnn::reservoir
