#pragma once

#include "strnn/common.hpp"

#include <algorithm>
#include <cmath>

namespace strnn {

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double first_step = 0.0;  // 0 = span/16
  long max_steps = 2000000;
};

// Dormand-Prince 5(4) with standard PI-free step control. State is any Eigen
// dense vector or matrix type; the RHS is called as f(t, y).
template <class State, class Rhs>
State integrate_rk45(Rhs&& f, double t0, double t1, State y, const OdeOptions& opt = {}) {
  const double span = t1 - t0;
  if (span == 0.0) return y;
  if (span < 0.0) throw std::invalid_argument("integrate_rk45: t1 < t0");

  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  // b - b_hat, for the embedded 4th-order error estimate.
  constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                   e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

  double t = t0;
  double h = opt.first_step > 0.0 ? opt.first_step : span / 16.0;
  h = std::min(h, span);

  State k1 = f(t, y);
  for (long step = 0; step < opt.max_steps; ++step) {
    if (t >= t1) return y;
    h = std::min(h, t1 - t);
    if (!(h > 1e-14 * span))
      throw NumericsError("integrate_rk45: step size underflow");

    State k2 = f(t + h * a21, (y + h * (a21 * k1)).eval());
    State k3 = f(t + h * 0.3, (y + h * (a31 * k1 + a32 * k2)).eval());
    State k4 = f(t + h * 0.8, (y + h * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
    State k5 =
        f(t + h * (8.0 / 9), (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
    State k6 = f(t + h, (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());
    State ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    State k7 = f(t + h, ynew);
    State err = (h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7)).eval();

    double ratio = 0.0;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      double sc = opt.abs_tol +
                  opt.rel_tol * std::max(std::abs(y.reshaped()(j)), std::abs(ynew.reshaped()(j)));
      ratio = std::max(ratio, std::abs(err.reshaped()(j)) / sc);
    }
    if (!std::isfinite(ratio)) throw NumericsError("integrate_rk45: non-finite state");

    if (ratio <= 1.0) {
      t += h;
      y.swap(ynew);
      k1.swap(k7);  // first-same-as-last
      h *= std::clamp(ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 5.0, 1.0, 5.0);
    } else {
      h *= std::max(0.9 * std::pow(ratio, -0.2), 0.2);
    }
  }
  throw NumericsError("integrate_rk45: max step count exceeded");
}

}  // namespace strnn
