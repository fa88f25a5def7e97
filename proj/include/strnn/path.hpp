#pragma once

#include "strnn/common.hpp"

#include <string>
#include <vector>

namespace strnn::paths {

// A sampled signal on [0,T] with values in R^r, read between samples by
// piecewise-linear interpolation.
struct Path {
  std::vector<double> times;  // strictly increasing, times[0] == 0
  Matrix values;              // num_samples x r

  int dim() const { return static_cast<int>(values.cols()); }
  int num_samples() const { return static_cast<int>(values.rows()); }
  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  void validate() const;
};

struct LabeledDataset {
  std::vector<Path> paths;
  std::vector<int> labels;  // each -1 or +1
  std::string name;

  int size() const { return static_cast<int>(paths.size()); }
  int dim() const { return paths.empty() ? 0 : paths.front().dim(); }
  double horizon() const { return paths.empty() ? 0.0 : paths.front().horizon(); }
  void validate() const;
};

enum class PathNorm { L1, L2 };

Vector eval_path(const Path& p, double t);

// (integral_0^T ||x(s)||_2^2 ds)^(1/2) of the interpolant.
double path_l2_norm(const Path& p);

// integral_0^T ||x(s)||_2 ds of the interpolant.
double path_l1_norm(const Path& p);

double dataset_radius(const LabeledDataset& d, PathNorm norm);

// Degree-6 trigonometric polynomial on [0, 2pi] with r=5 coordinates.
struct TrigPolynomial {
  Matrix cos_coef;  // 7 x 5, row k = coefficient of cos(kt)
  Matrix sin_coef;  // 6 x 5, row k-1 = coefficient of sin(kt)

  Vector eval(double t) const;
};

// Coefficients uniform per class: label +1 draws cos coefficients in
// [-0.2, 1] and sin coefficients in [-1, 0.2]; label -1 swaps the intervals.
TrigPolynomial draw_trig_polynomial(Rng& rng, int label);

// 2*samples_per_class paths (label +1 block first), each sampled uniformly
// with num_samples_per_path points on [0, 2pi].
LabeledDataset gen_trig_dataset(std::uint64_t seed, int samples_per_class,
                                int num_samples_per_path = 256);

// Flips exactly floor(fraction*m) labels, chosen uniformly without
// replacement; paths are shared, not copied.
LabeledDataset corrupt_labels(const LabeledDataset& d, double fraction, std::uint64_t seed);

}  // namespace strnn::paths
