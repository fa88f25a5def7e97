#include "strnn/path.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace strnn::paths {

namespace {

constexpr int kTrigOrder = 6;
constexpr int kTrigDim = 5;
constexpr double kIntervalLo[2] = {-0.2, -1.0};  // cos range for +1, sin range for +1
constexpr double kIntervalHi[2] = {1.0, 0.2};

// Total trapezoid points targeted by the norm quadratures. The integrand is
// piecewise quadratic, so the composite error is ~ (T/points)^2.
constexpr int kNormPoints = 32768;

template <class F>
double integrate_interpolant(const Path& p, F&& integrand) {
  const double T = p.horizon();
  const int segs = p.num_samples() - 1;
  if (segs <= 0 || T <= 0.0) return 0.0;
  double total = 0.0;
  for (int k = 0; k < segs; ++k) {
    const double h = p.times[k + 1] - p.times[k];
    const int pieces = std::max(1, static_cast<int>(std::ceil(kNormPoints * h / T)));
    const double dt = h / pieces;
    const auto a = p.values.row(k);
    const auto b = p.values.row(k + 1);
    double acc = 0.5 * (integrand(a) + integrand(b));
    for (int i = 1; i < pieces; ++i) {
      const double w = static_cast<double>(i) / pieces;
      acc += integrand(((1.0 - w) * a + w * b).eval());
    }
    total += acc * dt;
  }
  return total;
}

}  // namespace

void Path::validate() const {
  if (times.empty() || values.rows() == 0)
    throw std::invalid_argument("Path: no samples");
  if (static_cast<Eigen::Index>(times.size()) != values.rows())
    throw std::invalid_argument("Path: times/values length mismatch");
  if (values.cols() < 1) throw std::invalid_argument("Path: dimension must be >= 1");
  if (times.front() != 0.0) throw std::invalid_argument("Path: times must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("Path: times must be strictly increasing");
  if (!values.allFinite()) throw std::invalid_argument("Path: non-finite values");
}

void LabeledDataset::validate() const {
  if (paths.size() != labels.size())
    throw std::invalid_argument("LabeledDataset: paths/labels length mismatch");
  for (int v : labels)
    if (v != 1 && v != -1) throw std::invalid_argument("LabeledDataset: label not in {-1,+1}");
  for (const Path& p : paths) {
    p.validate();
    if (p.dim() != dim() || p.horizon() != horizon())
      throw std::invalid_argument("LabeledDataset: paths disagree on dimension or horizon");
  }
}

Vector eval_path(const Path& p, double t) {
  if (t < p.times.front() || t > p.times.back())
    throw std::domain_error("eval_path: t outside [0,T]");
  auto it = std::upper_bound(p.times.begin(), p.times.end(), t);
  if (it == p.times.end()) return p.values.row(p.num_samples() - 1);
  const auto k = static_cast<Eigen::Index>(it - p.times.begin()) - 1;
  const double h = p.times[k + 1] - p.times[k];
  const double w = (t - p.times[k]) / h;
  return (1.0 - w) * p.values.row(k).transpose() + w * p.values.row(k + 1).transpose();
}

double path_l2_norm(const Path& p) {
  p.validate();
  return std::sqrt(
      integrate_interpolant(p, [](const auto& v) { return v.squaredNorm(); }));
}

double path_l1_norm(const Path& p) {
  p.validate();
  return integrate_interpolant(p, [](const auto& v) { return v.norm(); });
}

double dataset_radius(const LabeledDataset& d, PathNorm norm) {
  if (d.paths.empty()) throw std::invalid_argument("dataset_radius: empty dataset");
  double r = 0.0;
  for (const Path& p : d.paths)
    r = std::max(r, norm == PathNorm::L2 ? path_l2_norm(p) : path_l1_norm(p));
  return r;
}

Vector TrigPolynomial::eval(double t) const {
  Vector x = cos_coef.row(0).transpose();  // cos(0*t) = 1
  for (int k = 1; k <= kTrigOrder; ++k) {
    x += std::cos(k * t) * cos_coef.row(k).transpose();
    x += std::sin(k * t) * sin_coef.row(k - 1).transpose();
  }
  return x;
}

TrigPolynomial draw_trig_polynomial(Rng& rng, int label) {
  if (label != 1 && label != -1)
    throw std::invalid_argument("draw_trig_polynomial: label not in {-1,+1}");
  const int ci = label == 1 ? 0 : 1;  // -1 swaps the two intervals
  const int si = label == 1 ? 1 : 0;
  std::uniform_real_distribution<double> cos_dist(kIntervalLo[ci], kIntervalHi[ci]);
  std::uniform_real_distribution<double> sin_dist(kIntervalLo[si], kIntervalHi[si]);
  TrigPolynomial poly;
  poly.cos_coef.resize(kTrigOrder + 1, kTrigDim);
  poly.sin_coef.resize(kTrigOrder, kTrigDim);
  for (int k = 0; k <= kTrigOrder; ++k)
    for (int j = 0; j < kTrigDim; ++j) poly.cos_coef(k, j) = cos_dist(rng);
  for (int k = 0; k < kTrigOrder; ++k)
    for (int j = 0; j < kTrigDim; ++j) poly.sin_coef(k, j) = sin_dist(rng);
  return poly;
}

LabeledDataset gen_trig_dataset(std::uint64_t seed, int samples_per_class,
                                int num_samples_per_path) {
  if (samples_per_class < 1)
    throw std::invalid_argument("gen_trig_dataset: samples_per_class must be >= 1");
  if (num_samples_per_path < 2)
    throw std::invalid_argument("gen_trig_dataset: need at least 2 samples per path");

  const double T = 2.0 * std::numbers::pi;
  std::vector<double> times(num_samples_per_path);
  for (int i = 0; i < num_samples_per_path; ++i)
    times[i] = T * i / (num_samples_per_path - 1);

  Rng rng = rng_stream(seed, 0);
  LabeledDataset d;
  d.name = "trig";
  for (int label : {1, -1}) {
    for (int s = 0; s < samples_per_class; ++s) {
      const TrigPolynomial poly = draw_trig_polynomial(rng, label);
      Path p;
      p.times = times;
      p.values.resize(num_samples_per_path, kTrigDim);
      for (int i = 0; i < num_samples_per_path; ++i)
        p.values.row(i) = poly.eval(times[i]).transpose();
      d.paths.push_back(std::move(p));
      d.labels.push_back(label);
    }
  }
  return d;
}

LabeledDataset corrupt_labels(const LabeledDataset& d, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("corrupt_labels: fraction must be in [0,1]");
  const int m = d.size();
  const int flips = static_cast<int>(std::floor(fraction * m));
  LabeledDataset out = d;
  if (flips == 0) return out;

  std::vector<int> idx(m);
  for (int i = 0; i < m; ++i) idx[i] = i;
  Rng rng = rng_stream(seed, 0);
  for (int i = 0; i < flips; ++i) {  // partial Fisher-Yates
    std::uniform_int_distribution<int> pick(i, m - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  for (int i = 0; i < flips; ++i) out.labels[idx[i]] = -out.labels[idx[i]];
  return out;
}

}  // namespace strnn::paths
