#include "strnn/learn.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace strnn::learn {

namespace {

double sigma_sq_checked(const ModelParams& p, const Matrix& A) {
  if (p.omega.size() != A.rows())
    throw std::invalid_argument("omega length must match the covariance");
  const double s2 = p.omega.dot(A * p.omega);
  if (!(s2 > 0.0)) throw RegimeError("omega lies in the kernel of the covariance");
  return s2;
}

double clamped_phi(double z) {
  return std::clamp(normal_cdf(z), 1e-300, std::nextafter(1.0, 0.0));
}

void check_label(int v) {
  if (v != 1 && v != -1) throw std::invalid_argument("labels must be +1 or -1");
}

void check_sizes(std::size_t data, std::size_t labels) {
  if (data != labels) throw std::invalid_argument("means and labels differ in length");
  if (data == 0) throw std::invalid_argument("empty sample");
}

}  // namespace

double loss(const Vector& nu, int label, const ModelParams& p, const Matrix& A) {
  check_label(label);
  if (nu.size() != p.omega.size()) throw std::invalid_argument("mean length must match omega");
  const double sigma = std::sqrt(sigma_sq_checked(p, A));
  const double z = (nu.dot(p.omega) + p.b) / sigma;
  return clamped_phi(-label * z);
}

double empirical_risk(const std::vector<Vector>& means, const std::vector<int>& labels,
                      const ModelParams& p, const Matrix& A) {
  check_sizes(means.size(), labels.size());
  const double sigma = std::sqrt(sigma_sq_checked(p, A));
  double sum = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    check_label(labels[i]);
    const double z = (means[i].dot(p.omega) + p.b) / sigma;
    sum += clamped_phi(-labels[i] * z);
  }
  return sum / static_cast<double>(means.size());
}

double empirical_risk(const std::vector<BasisMeans>& stacks, const std::vector<int>& labels,
                      const ModelParams& p, const Matrix& A) {
  check_sizes(stacks.size(), labels.size());
  const double sigma = std::sqrt(sigma_sq_checked(p, A));
  const Vector uvec = p.u.reshaped();
  double sum = 0.0;
  for (std::size_t i = 0; i < stacks.size(); ++i) {
    check_label(labels[i]);
    if (stacks[i].stack.cols() != uvec.size() || stacks[i].stack.rows() != p.omega.size())
      throw std::invalid_argument("stack and parameter sizes differ");
    const double z = (p.omega.dot(stacks[i].stack * uvec) + p.b) / sigma;
    sum += clamped_phi(-labels[i] * z);
  }
  return sum / static_cast<double>(stacks.size());
}

RiskGradient risk_gradient(const std::vector<BasisMeans>& stacks,
                           const std::vector<int>& labels, const ModelParams& p,
                           const Matrix& A) {
  check_sizes(stacks.size(), labels.size());
  const double s2 = sigma_sq_checked(p, A);
  const double sigma = std::sqrt(s2);
  const Vector aw = A * p.omega;
  const Vector uvec = p.u.reshaped();
  const auto n = p.omega.size();

  RiskGradient g;
  Vector gu = Vector::Zero(uvec.size());
  g.grad_omega = Vector::Zero(n);
  for (std::size_t i = 0; i < stacks.size(); ++i) {
    check_label(labels[i]);
    if (stacks[i].stack.cols() != uvec.size() || stacks[i].stack.rows() != n)
      throw std::invalid_argument("stack and parameter sizes differ");
    const Vector nu = stacks[i].stack * uvec;
    const double margin = nu.dot(p.omega) + p.b;
    const double z = margin / sigma;
    g.risk += clamped_phi(-labels[i] * z);
    const double pref = -labels[i] * normal_pdf(z) / sigma;
    g.grad_b += pref;
    gu += pref * (stacks[i].stack.transpose() * p.omega);
    g.grad_omega += pref * (nu - (margin / s2) * aw);
  }
  const double m = static_cast<double>(stacks.size());
  g.risk /= m;
  g.grad_b /= m;
  gu /= m;
  g.grad_omega /= m;
  g.grad_u = gu.reshaped(n, uvec.size() / n);
  return g;
}

Matrix project_spectral(const Matrix& m, double cap) {
  if (cap <= 0.0) throw std::invalid_argument("cap must be positive");
  if (m.size() == 0) return m;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues()(0) <= cap) return m;
  const Vector s = svd.singularValues().cwiseMin(cap);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

namespace {

ModelParams feasible_start(ModelParams p, const TrainConfig& cfg) {
  const double c = p.omega.norm();
  if (!(c > 0.0)) throw std::invalid_argument("warm start omega must be nonzero");
  p.omega /= c;
  p.b /= c;
  p.u = project_spectral(p.u, cfg.lambda_cap);
  if (cfg.theta_cap > 0.0) p.b = std::clamp(p.b, -cfg.theta_cap, cfg.theta_cap);
  return p;
}

ModelParams random_start(int n, int r, const TrainConfig& cfg, std::uint64_t stream) {
  Rng rng = rng_stream(cfg.seed, stream);
  const double lim = 1.0 / std::sqrt(static_cast<double>(n) * r);
  std::uniform_real_distribution<double> unif(-lim, lim);
  ModelParams p;
  p.u.resize(n, r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j) p.u(i, j) = unif(rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  p.omega.resize(n);
  for (int i = 0; i < n; ++i) p.omega(i) = gauss(rng);
  p.b = 0.0;
  return feasible_start(std::move(p), cfg);
}

std::pair<ModelParams, std::vector<double>> descend(const std::vector<BasisMeans>& stacks,
                                                    const std::vector<int>& labels,
                                                    const Matrix& A, const TrainConfig& cfg,
                                                    ModelParams cur) {
  RiskGradient g = risk_gradient(stacks, labels, cur, A);
  if (!std::isfinite(g.risk)) throw NumericsError("empirical risk is non-finite");
  std::vector<double> trace{g.risk};
  double step = cfg.init_step;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    bool accepted = false;
    for (int bt = 0; bt < 60 && step > 1e-18; ++bt, step *= cfg.shrink) {
      const Matrix u_t = project_spectral(cur.u - step * g.grad_u, cfg.lambda_cap);
      const Vector w_t = cur.omega - step * g.grad_omega;
      const double b_t = cur.b - step * g.grad_b;
      const double c = w_t.norm();
      if (!(c > 1e-12)) continue;
      const double move2 = (u_t - cur.u).squaredNorm() +
                           (w_t - cur.omega).squaredNorm() + (b_t - cur.b) * (b_t - cur.b);
      ModelParams cand{u_t, w_t / c, b_t / c};
      if (cfg.theta_cap > 0.0) cand.b = std::clamp(cand.b, -cfg.theta_cap, cfg.theta_cap);
      const double risk = empirical_risk(stacks, labels, cand, A);
      if (!std::isfinite(risk)) throw NumericsError("empirical risk is non-finite");
      if (risk < trace.back() && risk <= trace.back() - (cfg.armijo_c / step) * move2) {
        cur = std::move(cand);
        trace.push_back(risk);
        step = std::min(step * cfg.grow, 1e8);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const auto last = trace.size() - 1;
    if (trace[last - 1] - trace[last] <= cfg.tol * std::max(trace[last - 1], 1e-15)) break;
    g = risk_gradient(stacks, labels, cur, A);
  }
  return {std::move(cur), std::move(trace)};
}

}  // namespace

TrainResult train_on_features(const std::vector<BasisMeans>& stacks,
                              const std::vector<int>& labels, const Matrix& A,
                              const TrainConfig& cfg) {
  check_sizes(stacks.size(), labels.size());
  if (cfg.restarts < 1) throw std::invalid_argument("need at least one restart");
  if (cfg.lambda_cap <= 0.0) throw std::invalid_argument("lambda cap must be positive");
  const int n = stacks.front().n();
  const int r = stacks.front().r();

  TrainResult best;
  best.final_risk = std::numeric_limits<double>::infinity();
  const int total = static_cast<int>(cfg.warm_starts.size()) + cfg.restarts;
  for (int run = 0; run < total; ++run) {
    ModelParams start =
        run < static_cast<int>(cfg.warm_starts.size())
            ? feasible_start(cfg.warm_starts[run], cfg)
            : random_start(n, r, cfg, run - static_cast<int>(cfg.warm_starts.size()));
    auto [params, trace] = descend(stacks, labels, A, cfg, std::move(start));
    if (trace.back() < best.final_risk) {
      best.params = std::move(params);
      best.risk_trace = std::move(trace);
      best.final_risk = best.risk_trace.back();
      best.winner = run;
    }
  }
  return best;
}

TrainResult erm_train(const paths::LabeledDataset& d, const reservoir::ReservoirSystem& sys,
                      const TrainConfig& cfg) {
  d.validate();
  if (d.dim() != sys.r) throw std::invalid_argument("dataset and reservoir dimensions differ");
  if (std::abs(d.horizon() - sys.T) > 1e-9 * std::max(1.0, sys.T))
    throw std::invalid_argument("dataset horizon must match the reservoir horizon");
  if (!(sys.lambda_min > 0.0))
    throw RegimeError("training needs a positive definite covariance");
  return train_on_features(features::dataset_basis_means(sys.W0, d), d.labels, sys.A, cfg);
}

TrainResult truncated_erm_train(const paths::LabeledDataset& d,
                                const reservoir::ReservoirSystem& sys, const TrainConfig& cfg,
                                int order) {
  d.validate();
  if (d.dim() != sys.r) throw std::invalid_argument("dataset and reservoir dimensions differ");
  if (std::abs(d.horizon() - sys.T) > 1e-9 * std::max(1.0, sys.T))
    throw std::invalid_argument("dataset horizon must match the reservoir horizon");
  if (!(sys.lambda_min > 0.0))
    throw RegimeError("training needs a positive definite covariance");
  const auto sigs = features::dataset_signatures(d, order);
  return train_on_features(features::dataset_truncated_basis_means(sys.W0, sigs), d.labels,
                           sys.A, cfg);
}

nlohmann::json model_to_json(const ModelParams& p) {
  return {{"u", json_rows(p.u)}, {"omega", json_vec(p.omega)}, {"b", p.b}};
}

ModelParams model_from_json(const nlohmann::json& j) {
  try {
    ModelParams p;
    p.u = matrix_from_json(j.at("u"));
    p.omega = vector_from_json(j.at("omega"));
    p.b = j.at("b").get<double>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model json: ") + e.what());
  }
}

void save_model_json(const ModelParams& p, const std::string& file,
                     const nlohmann::json& extra) {
  nlohmann::json j = extra.is_null() ? nlohmann::json::object() : extra;
  j["model"] = model_to_json(p);
  save_json_file(j, file);
}

ModelParams load_model_json(const std::string& file, nlohmann::json* extra) {
  const nlohmann::json j = load_json_file(file);
  if (!j.contains("model")) throw FormatError(file + ": missing 'model' entry");
  if (extra) *extra = j;
  return model_from_json(j["model"]);
}

SvmResult svm_baseline(const std::vector<Vector>& means, const std::vector<int>& labels,
                       const Matrix& A, double lambda_reg, double kkt_tol,
                       long max_updates) {
  check_sizes(means.size(), labels.size());
  if (lambda_reg <= 0.0) throw std::invalid_argument("regularisation must be positive");
  if (kkt_tol <= 0.0) throw std::invalid_argument("tolerance must be positive");
  const int m = static_cast<int>(means.size());
  bool pos = false, neg = false;
  for (int v : labels) {
    check_label(v);
    (v > 0 ? pos : neg) = true;
  }
  if (!pos || !neg) throw std::invalid_argument("both classes must be present");
  if (max_updates <= 0) max_updates = 2000000;

  const Matrix white = sym_inv_sqrt(A);
  Matrix z(A.rows(), m);
  for (int i = 0; i < m; ++i) {
    if (means[i].size() != A.rows())
      throw std::invalid_argument("mean length must match the covariance");
    z.col(i) = white * means[i];
  }
  const Matrix kernel = z.transpose() * z;
  Vector v(m);
  for (int i = 0; i < m; ++i) v(i) = labels[i];

  Vector theta = Vector::Zero(m);
  Vector grad = -Vector::Ones(m);  // gradient of 1/2 theta'Q theta - sum theta
  SvmResult res;

  const auto in_up = [&](int t) {
    return (v(t) > 0 && theta(t) < lambda_reg) || (v(t) < 0 && theta(t) > 0.0);
  };
  const auto in_low = [&](int t) {
    return (v(t) < 0 && theta(t) < lambda_reg) || (v(t) > 0 && theta(t) > 0.0);
  };

  while (res.iterations < max_updates) {
    int i = -1, j = -1;
    double up = -std::numeric_limits<double>::infinity();
    double low = std::numeric_limits<double>::infinity();
    for (int t = 0; t < m; ++t) {
      const double s = -v(t) * grad(t);
      if (in_up(t) && s > up) {
        up = s;
        i = t;
      }
      if (in_low(t) && s < low) {
        low = s;
        j = t;
      }
    }
    if (i < 0 || j < 0 || up - low <= kkt_tol) break;

    const double q =
        std::max(kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j), 1e-12);
    double t_step = (up - low) / q;
    const auto room = [&](double vi, double th) {
      return vi > 0 ? lambda_reg - th : th;
    };
    t_step = std::min(t_step, room(v(i), theta(i)));
    t_step = std::min(t_step, room(-v(j), theta(j)));
    theta(i) += v(i) * t_step;
    theta(j) -= v(j) * t_step;
    for (double* th : {&theta(i), &theta(j)}) {
      if (*th < 1e-12 * lambda_reg) *th = 0.0;
      if (*th > lambda_reg * (1.0 - 1e-12)) *th = lambda_reg;
    }
    grad += t_step * v.cwiseProduct(kernel.col(i) - kernel.col(j));
    ++res.iterations;
  }
  if (res.iterations >= max_updates)
    throw NumericsError("dual solver did not reach the KKT tolerance");

  double b_sum = 0.0;
  int b_count = 0;
  const double margin = 1e-9 * lambda_reg;
  for (int t = 0; t < m; ++t)
    if (theta(t) > margin && theta(t) < lambda_reg - margin) {
      b_sum += -v(t) * grad(t);
      ++b_count;
    }
  if (b_count > 0) {
    res.b = b_sum / b_count;
    res.free_support_vector = true;
  } else {
    double up = -std::numeric_limits<double>::infinity();
    double low = std::numeric_limits<double>::infinity();
    for (int t = 0; t < m; ++t) {
      if (in_up(t)) up = std::max(up, -v(t) * grad(t));
      if (in_low(t)) low = std::min(low, -v(t) * grad(t));
    }
    if (std::isfinite(up) && std::isfinite(low))
      res.b = 0.5 * (up + low);
    else if (std::isfinite(up))
      res.b = up;
    else if (std::isfinite(low))
      res.b = low;
  }

  res.theta = theta;
  res.alpha = z * theta.cwiseProduct(v);
  res.direction = white * res.alpha;
  res.dual_objective = theta.sum() - 0.5 * theta.dot(grad + Vector::Ones(m));
  double hinge = 0.0;
  const Vector scores = z.transpose() * res.alpha;
  for (int t = 0; t < m; ++t) hinge += std::max(0.0, 1.0 - v(t) * (scores(t) + res.b));
  res.primal_objective = 0.5 * res.alpha.squaredNorm() + lambda_reg * hinge;
  return res;
}

}  // namespace strnn::learn
