#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Core>

#include "dpt/errors.hpp"

namespace dpt::ode {

struct Tolerances {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_initial = 1e-3;
  double h_min = 1e-14;
  double h_max = 1.0;
  long max_steps = 10'000'000;
};

template <typename Vector>
struct Trajectory {
  Vector y;
  double t = 0.0;
  long steps = 0;
  long rejected = 0;
};

/// Adaptive Dormand-Prince 5(4) integration of dy/dt = f(t, y) from t0 to t1.
/// The observer, when set, is called after every accepted step with (t, y) and may return
/// true to stop early. Throws StiffnessAbort when the step size falls below h_min.
template <typename Vector, typename Rhs>
Trajectory<Vector> dormand_prince(Rhs&& f, Vector y, double t0, double t1, const Tolerances& tol,
                                  const std::function<bool(double, const Vector&)>& observer = {}) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Trajectory<Vector> out;
  double t = t0;
  double h = std::min(tol.h_initial, t1 - t0);
  Vector k1 = f(t, y);
  while (t < t1) {
    if (out.steps + out.rejected >= tol.max_steps)
      throw StiffnessAbort("step budget exhausted at t = " + std::to_string(t));
    h = std::min({h, tol.h_max, t1 - t});
    const Vector k2 = f(t + c2 * h, Vector(y + h * a21 * k1));
    const Vector k3 = f(t + c3 * h, Vector(y + h * (a31 * k1 + a32 * k2)));
    const Vector k4 = f(t + c4 * h, Vector(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const Vector k5 = f(t + c5 * h, Vector(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const Vector k6 =
        f(t + h, Vector(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    Vector y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector k7 = f(t + h, y_new);
    const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err_norm = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = tol.atol + tol.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err_norm = std::max(err_norm, std::abs(err[i]) / sc);
    }
    if (!std::isfinite(err_norm)) err_norm = 1e10;

    if (err_norm <= 1.0) {
      t += h;
      y = std::move(y_new);
      k1 = k7;
      ++out.steps;
      if (observer && observer(t, y)) break;
    } else {
      ++out.rejected;
    }
    const double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
    h *= factor;
    if (h < tol.h_min && t < t1)
      throw StiffnessAbort("step size collapsed to " + std::to_string(h) + " at t = " + std::to_string(t));
  }
  out.y = std::move(y);
  out.t = t;
  return out;
}

}  // namespace dpt::ode
