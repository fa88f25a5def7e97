#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace strnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

// Malformed input files or config values.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Missing or unreadable/unwritable files.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The requested operation needs the stochastic (definite-covariance) regime.
struct RegimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative method failed to reach its tolerance or produced non-finite values.
struct NumericsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic independent stream derived from a base seed. Every source of
// randomness in the library draws from one of these; no hidden entropy.
inline Rng rng_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(seed) + stream));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Largest singular value.
double spectral_norm(const Matrix& m);

// Symmetric square root of a positive semidefinite matrix.
Matrix sym_sqrt(const Matrix& a);

// Symmetric inverse square root; RegimeError unless positive definite.
Matrix sym_inv_sqrt(const Matrix& a);

}  // namespace strnn
