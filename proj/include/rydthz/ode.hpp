#ifndef RYDTHZ_ODE_HPP
#define RYDTHZ_ODE_HPP

#include <algorithm>
#include <cmath>

#include "rydthz/errors.hpp"

namespace rydthz {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 picks (x1 - x0) / 16
  int max_steps = 200000;
};

/// Adaptive Dormand-Prince RK45. State is any Eigen vector type; f(x, y)
/// returns dy/dx. Integrates from x0 to x1 (x1 > x0) and returns y(x1).
template <typename State, typename Rhs>
State integrate_ode(Rhs&& f, State y, double x0, double x1,
                    const OdeOptions& opt = {}) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (!(x1 > x0)) return y;
  double x = x0;
  double h = opt.initial_step > 0 ? opt.initial_step : (x1 - x0) / 16.0;
  State k1 = f(x, y);
  for (int step = 0; step < opt.max_steps; ++step) {
    if (x >= x1) return y;
    h = std::min(h, x1 - x);

    State k2 = f(x + c2 * h, (y + h * (a21 * k1)).eval());
    State k3 = f(x + c3 * h, (y + h * (a31 * k1 + a32 * k2)).eval());
    State k4 = f(x + c4 * h, (y + h * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
    State k5 = f(x + c5 * h,
                 (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
    State k6 = f(x + h, (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 +
                                  a65 * k5))
                            .eval());
    State y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    State k7 = f(x + h, y5);
    State err_vec =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      const double scale =
          opt.atol +
          opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(err_vec[i]) / scale);
    }
    if (!std::isfinite(err)) {
      throw PhysicsError("ode integrator produced non-finite values");
    }

    if (err <= 1.0) {
      x += h;
      y = y5;
      k1 = k7;  // FSAL
    }
    const double factor =
        std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
    h *= factor;
    if (h < 1e-14 * (x1 - x0)) {
      throw PhysicsError("ode integrator step size underflow");
    }
  }
  throw PhysicsError("ode integrator exceeded the step budget");
}

}  // namespace rydthz

#endif  // RYDTHZ_ODE_HPP
