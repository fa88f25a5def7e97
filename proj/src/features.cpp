#include "strnn/features.hpp"

#include "strnn/quadrature.hpp"
#include "strnn/reservoir.hpp"

#include <cstdio>
#include <fstream>
#include <map>

namespace strnn::features {

namespace {

void check_dims(const Matrix& w0, const Matrix& u, const Path& p) {
  if (w0.rows() != w0.cols()) throw std::invalid_argument("W0 must be square");
  if (u.rows() != w0.rows() || u.cols() != p.dim())
    throw std::invalid_argument("input matrix must be n x r");
}

struct SegmentKernel {
  Matrix E;     // e^{W0 h}
  Matrix Phi1;  // integral_0^h e^{W0 s} ds
  Matrix F13;   // integral_0^h e^{W0 (h-s)} s ds
};

// Blocks of the augmented exponential exp(h * [[W0,I,0],[0,0,I],[0,0,0]]).
SegmentKernel make_segment_kernel(const Matrix& w0, double h) {
  const int n = static_cast<int>(w0.rows());
  Matrix c = Matrix::Zero(3 * n, 3 * n);
  c.topLeftCorner(n, n) = h * w0;
  c.block(0, n, n, n) = h * Matrix::Identity(n, n);
  c.block(n, 2 * n, n, n) = h * Matrix::Identity(n, n);
  const Matrix e = reservoir::matrix_exp(c);
  return {e.topLeftCorner(n, n), e.block(0, n, n, n), e.block(0, 2 * n, n, n)};
}

bool is_uniform_grid(const std::vector<double>& t) {
  const double T = t.back();
  const auto S = t.size() - 1;
  const double tol = 1e-13 * std::max(1.0, T);
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs(t[i] - T * static_cast<double>(i) / static_cast<double>(S)) > tol)
      return false;
  return true;
}

// Kernels for an arbitrary grid, deduplicated by segment length.
class KernelCache {
 public:
  explicit KernelCache(const Matrix& w0) : w0_(w0) {}

  const SegmentKernel& at(double h) {
    for (const auto& [len, ker] : entries_)
      if (std::abs(h - len) <= 1e-15 * len) return ker;
    entries_.emplace_back(h, make_segment_kernel(w0_, h));
    return entries_.back().second;
  }

 private:
  const Matrix& w0_;
  std::vector<std::pair<double, SegmentKernel>> entries_;
};

// [sum_k alpha_jk E^{S-1-k}] Phi1 + [sum_k beta_jk E^{S-1-k}] F13 for every
// column j, with the powers supplied one by one in descending k so the
// single-path and dataset routes accumulate in the identical order.
struct UniformStackBuilder {
  UniformStackBuilder(const Path& p, double h, int n)
      : values(p.values), h(h), acc_a(Matrix::Zero(n, n * p.dim())),
        acc_b(Matrix::Zero(n, n * p.dim())) {}

  void add(int k, const Matrix& power) {
    const int n = static_cast<int>(power.rows());
    for (int j = 0; j < values.cols(); ++j) {
      const double alpha = values(k, j);
      const double beta = (values(k + 1, j) - values(k, j)) / h;
      acc_a.middleCols(j * n, n) += alpha * power;
      acc_b.middleCols(j * n, n) += beta * power;
    }
  }

  Matrix finish(const SegmentKernel& ker) const {
    const int n = static_cast<int>(ker.E.rows());
    Matrix stack(n, acc_a.cols());
    for (int j = 0; j < values.cols(); ++j)
      stack.middleCols(j * n, n) =
          acc_a.middleCols(j * n, n) * ker.Phi1 + acc_b.middleCols(j * n, n) * ker.F13;
    return stack;
  }

  const Matrix& values;
  double h;
  Matrix acc_a, acc_b;
};

Matrix stack_nonuniform(const Matrix& w0, const Path& p, KernelCache& cache) {
  const int n = static_cast<int>(w0.rows());
  const int r = p.dim();
  Matrix stack = Matrix::Zero(n, n * r);
  for (int k = 0; k + 1 < p.num_samples(); ++k) {
    const double h = p.times[k + 1] - p.times[k];
    const SegmentKernel& ker = cache.at(h);
    for (int j = 0; j < r; ++j) {
      const double alpha = p.values(k, j);
      const double beta = (p.values(k + 1, j) - p.values(k, j)) / h;
      Matrix m = ker.E * stack.middleCols(j * n, n);
      m += alpha * ker.Phi1 + beta * ker.F13;
      stack.middleCols(j * n, n) = m;
    }
  }
  return stack;
}

Matrix truncated_stack(const std::vector<Matrix>& powers, const PartialSignature& sig) {
  const int n = static_cast<int>(powers.front().rows());
  const int r = sig.dim();
  Matrix stack = Matrix::Zero(n, n * r);
  for (int j = 0; j < r; ++j)
    for (int k = 0; k <= sig.order(); ++k)
      stack.middleCols(j * n, n) += sig.levels(j, k) * powers[k];
  return stack;
}

std::vector<Matrix> w0_powers(const Matrix& w0, int order) {
  std::vector<Matrix> powers;
  powers.reserve(order + 1);
  powers.push_back(Matrix::Identity(w0.rows(), w0.cols()));
  for (int k = 1; k <= order; ++k) powers.push_back(w0 * powers.back());
  return powers;
}

}  // namespace

PartialSignature partial_signature(const Path& p, int order) {
  if (order < 0) throw std::invalid_argument("signature order must be >= 0");
  p.validate();
  const double T = p.horizon();
  const int q = std::max(2, (order + 3) / 2);  // exact for degree order+1
  const GaussLegendre gl = gauss_legendre(q);

  PartialSignature sig;
  sig.horizon = T;
  sig.levels = Matrix::Zero(p.dim(), order + 1);
  for (int seg = 0; seg + 1 < p.num_samples(); ++seg) {
    const double a = p.times[seg], b = p.times[seg + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int iq = 0; iq < q; ++iq) {
      const double s = mid + half * gl.nodes[iq];
      const double frac = (s - a) / (b - a);
      const Vector x = (1.0 - frac) * p.values.row(seg).transpose() +
                       frac * p.values.row(seg + 1).transpose();
      double term = half * gl.weights[iq];  // weight * (T-s)^k / k!
      for (int k = 0; k <= order; ++k) {
        sig.levels.col(k) += term * x;
        term *= (T - s) / (k + 1);
      }
    }
  }
  return sig;
}

std::vector<PartialSignature> dataset_signatures(const LabeledDataset& d, int order) {
  std::vector<PartialSignature> sigs;
  sigs.reserve(d.paths.size());
  for (const Path& p : d.paths) sigs.push_back(partial_signature(p, order));
  return sigs;
}

void save_signatures_csv(const std::vector<PartialSignature>& sigs, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write file: " + file);
  out << "path_id,level,component,value\n";
  char buf[32];
  for (std::size_t id = 0; id < sigs.size(); ++id)
    for (int k = 0; k <= sigs[id].order(); ++k)
      for (int j = 0; j < sigs[id].dim(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", sigs[id].levels(j, k));
        out << id << ',' << k << ',' << j << ',' << buf << '\n';
      }
  if (!out.flush()) throw IoError("write failed: " + file);
}

Vector exact_mean(const Matrix& w0, const Matrix& u, const Path& p) {
  p.validate();
  check_dims(w0, u, p);
  const int S = p.num_samples() - 1;
  Vector nu = Vector::Zero(w0.rows());
  if (is_uniform_grid(p.times)) {
    const double h = p.horizon() / S;
    const SegmentKernel ker = make_segment_kernel(w0, h);
    for (int k = 0; k < S; ++k) {
      const Vector alpha = p.values.row(k).transpose();
      const Vector beta = (p.values.row(k + 1) - p.values.row(k)).transpose() / h;
      nu = ker.E * nu + ker.Phi1 * (u * alpha) + ker.F13 * (u * beta);
    }
    return nu;
  }
  KernelCache cache(w0);
  for (int k = 0; k < S; ++k) {
    const double h = p.times[k + 1] - p.times[k];
    const SegmentKernel& ker = cache.at(h);
    const Vector alpha = p.values.row(k).transpose();
    const Vector beta = (p.values.row(k + 1) - p.values.row(k)).transpose() / h;
    nu = ker.E * nu + ker.Phi1 * (u * alpha) + ker.F13 * (u * beta);
  }
  return nu;
}

Vector compute_mean(const Matrix& w0, const Matrix& u, const Path& p, const OdeOptions& opt) {
  p.validate();
  check_dims(w0, u, p);
  Vector nu = Vector::Zero(w0.rows());
  for (int k = 0; k + 1 < p.num_samples(); ++k) {
    const double a = p.times[k], b = p.times[k + 1];
    const Vector alpha = u * p.values.row(k).transpose();
    const Vector beta =
        u * (p.values.row(k + 1) - p.values.row(k)).transpose() / (b - a);
    auto rhs = [&](double t, const Vector& y) -> Vector {
      return w0 * y + alpha + (t - a) * beta;
    };
    nu = integrate_rk45(rhs, a, b, std::move(nu), opt);
  }
  return nu;
}

Vector compute_mean_quadrature(const Matrix& w0, const Matrix& u, const Path& p,
                               int nodes_per_segment) {
  p.validate();
  check_dims(w0, u, p);
  const double T = p.horizon();
  const GaussLegendre gl = gauss_legendre(nodes_per_segment);
  Vector nu = Vector::Zero(w0.rows());
  for (int seg = 0; seg + 1 < p.num_samples(); ++seg) {
    const double a = p.times[seg], b = p.times[seg + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int iq = 0; iq < nodes_per_segment; ++iq) {
      const double s = mid + half * gl.nodes[iq];
      const double frac = (s - a) / (b - a);
      const Vector x = (1.0 - frac) * p.values.row(seg).transpose() +
                       frac * p.values.row(seg + 1).transpose();
      nu += half * gl.weights[iq] *
            (reservoir::matrix_exp(((T - s) * w0).eval()) * (u * x));
    }
  }
  return nu;
}

Vector truncated_mean(const Matrix& w0, const Matrix& u, const PartialSignature& sig) {
  if (u.rows() != w0.rows() || u.cols() != sig.dim())
    throw std::invalid_argument("input matrix must be n x r");
  Vector acc = u * sig.levels.col(sig.order());
  for (int k = sig.order() - 1; k >= 0; --k) acc = w0 * acc + u * sig.levels.col(k);
  return acc;
}

Vector BasisMeans::mean_of(const Matrix& u) const {
  if (u.rows() != n() || u.cols() != r())
    throw std::invalid_argument("input matrix must be n x r");
  return stack * u.reshaped();
}

Matrix BasisMeans::omega_projections(const Vector& omega) const {
  if (omega.size() != n()) throw std::invalid_argument("omega must have length n");
  const Vector proj = stack.transpose() * omega;
  return proj.reshaped(n(), r());
}

BasisMeans basis_means(const Matrix& w0, const Path& p) {
  p.validate();
  if (w0.rows() != w0.cols()) throw std::invalid_argument("W0 must be square");
  const int S = p.num_samples() - 1;
  if (is_uniform_grid(p.times)) {
    const double h = p.horizon() / S;
    const SegmentKernel ker = make_segment_kernel(w0, h);
    UniformStackBuilder builder(p, h, static_cast<int>(w0.rows()));
    Matrix power = Matrix::Identity(w0.rows(), w0.cols());
    for (int k = S - 1; k >= 0; --k) {
      builder.add(k, power);
      if (k > 0) power = (ker.E * power).eval();
    }
    return {builder.finish(ker)};
  }
  KernelCache cache(w0);
  return {stack_nonuniform(w0, p, cache)};
}

std::vector<BasisMeans> dataset_basis_means(const Matrix& w0, const LabeledDataset& d) {
  d.validate();
  if (w0.rows() != w0.cols()) throw std::invalid_argument("W0 must be square");
  std::vector<BasisMeans> out(d.paths.size());

  std::map<std::pair<int, double>, std::vector<int>> uniform_groups;
  KernelCache cache(w0);
  for (std::size_t i = 0; i < d.paths.size(); ++i) {
    const Path& p = d.paths[i];
    if (is_uniform_grid(p.times))
      uniform_groups[{p.num_samples(), p.horizon()}].push_back(static_cast<int>(i));
    else
      out[i] = {stack_nonuniform(w0, p, cache)};
  }

  for (const auto& [key, indices] : uniform_groups) {
    const int S = key.first - 1;
    const double h = key.second / S;
    const SegmentKernel ker = make_segment_kernel(w0, h);
    std::vector<Matrix> powers(S);
    powers[0] = Matrix::Identity(w0.rows(), w0.cols());
    for (int m = 1; m < S; ++m) powers[m] = ker.E * powers[m - 1];
    for (int i : indices) {
      UniformStackBuilder builder(d.paths[i], h, static_cast<int>(w0.rows()));
      for (int k = S - 1; k >= 0; --k) builder.add(k, powers[S - 1 - k]);
      out[i] = {builder.finish(ker)};
    }
  }
  return out;
}

BasisMeans truncated_basis_means(const Matrix& w0, const PartialSignature& sig) {
  if (w0.rows() != w0.cols()) throw std::invalid_argument("W0 must be square");
  return {truncated_stack(w0_powers(w0, sig.order()), sig)};
}

std::vector<BasisMeans> dataset_truncated_basis_means(
    const Matrix& w0, const std::vector<PartialSignature>& sigs) {
  if (w0.rows() != w0.cols()) throw std::invalid_argument("W0 must be square");
  int order = 0;
  for (const PartialSignature& sig : sigs) order = std::max(order, sig.order());
  const std::vector<Matrix> powers = w0_powers(w0, order);
  std::vector<BasisMeans> out;
  out.reserve(sigs.size());
  for (const PartialSignature& sig : sigs) out.push_back({truncated_stack(powers, sig)});
  return out;
}

double truncation_factor(double w0_norm, double T, int order) {
  if (w0_norm < 0 || T < 0) throw std::domain_error("norms must be nonnegative");
  if (order < 0) throw std::invalid_argument("order must be >= 0");
  const double a = w0_norm * T;
  double tail = 1.0;
  for (int i = 1; i <= order + 1; ++i) tail *= a / i;
  return std::exp(a) * tail;
}

double truncation_error_bound(double w0_norm, double T, double u_norm, double omega_norm,
                              double path_l1, int order) {
  return omega_norm * u_norm * path_l1 * truncation_factor(w0_norm, T, order);
}

double risk_gap_bound(double w0_norm, double T, double lambda_cap, double radius_l1,
                      double lambda_min, int order) {
  if (lambda_min <= 0) throw RegimeError("risk gap bound needs a definite covariance");
  return lambda_cap * radius_l1 * std::sqrt(2.0 / (std::numbers::pi * lambda_min)) *
         truncation_factor(w0_norm, T, order);
}

int default_truncation_order(double w0_norm, double T, double scale, double tol) {
  if (tol <= 0) throw std::invalid_argument("tolerance must be positive");
  for (int order = 0; order <= 1000; ++order)
    if (scale * truncation_factor(w0_norm, T, order) < tol) return order;
  throw NumericsError("truncation order beyond 1000");
}

}  // namespace strnn::features
