#include "strnn/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace strnn {

GaussLegendre gauss_legendre(int q) {
  if (q < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  GaussLegendre gl;
  gl.nodes.resize(q);
  gl.weights.resize(q);
  const int half = (q + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-based first guess for the i-th root of P_q, then Newton.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= q; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    gl.nodes[i] = -x;
    gl.nodes[q - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.weights[i] = w;
    gl.weights[q - 1 - i] = w;
  }
  if (q % 2 == 1) gl.nodes[q / 2] = 0.0;
  return gl;
}

}  // namespace strnn
