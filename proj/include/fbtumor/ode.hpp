#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <utility>

#include "fbtumor/errors.hpp"

namespace fbtumor::num {

template <std::size_t N>
using State = std::array<double, N>;

/// One accepted integrator step with endpoint states and slopes, enough for
/// cubic Hermite reconstruction anywhere inside [t0, t1].
template <std::size_t N>
struct Step {
  double t0, t1;
  State<N> y0, y1, f0, f1;
};

enum class ControlFlow { Continue, Stop };

struct IvpOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  long max_steps = 2'000'000;
  double h_init = 0.0;  // 0 means "choose from the initial slope"
};

struct IvpStatus {
  double t = 0.0;
  long steps = 0;  // accepted steps
  bool stopped_early = false;
};

/// Cubic Hermite value inside one step.
template <std::size_t N>
State<N> hermite_value(const Step<N>& st, double t) {
  const double h = st.t1 - st.t0;
  const double x = (t - st.t0) / h;
  const double x2 = x * x, x3 = x2 * x;
  const double h00 = 2 * x3 - 3 * x2 + 1;
  const double h10 = x3 - 2 * x2 + x;
  const double h01 = -2 * x3 + 3 * x2;
  const double h11 = x3 - x2;
  State<N> y;
  for (std::size_t i = 0; i < N; ++i)
    y[i] = h00 * st.y0[i] + h10 * h * st.f0[i] + h01 * st.y1[i] + h11 * h * st.f1[i];
  return y;
}

/// Derivative of the cubic Hermite reconstruction.
template <std::size_t N>
State<N> hermite_deriv(const Step<N>& st, double t) {
  const double h = st.t1 - st.t0;
  const double x = (t - st.t0) / h;
  const double x2 = x * x;
  const double d00 = (6 * x2 - 6 * x) / h;
  const double d10 = 3 * x2 - 4 * x + 1;
  const double d01 = (-6 * x2 + 6 * x) / h;
  const double d11 = 3 * x2 - 2 * x;
  State<N> y;
  for (std::size_t i = 0; i < N; ++i)
    y[i] = d00 * st.y0[i] + d10 * st.f0[i] + d01 * st.y1[i] + d11 * st.f1[i];
  return y;
}

/**
 * @brief Adaptive embedded Runge-Kutta 5(4) integration (Dormand-Prince pair)
 *        from t0 to t1.
 *
 * Error control is per step: the embedded estimate, scaled componentwise by
 * atol + rtol * max(|y|), must not exceed 1. The sink sees every accepted
 * step and may stop the run early. Nonfinite trial states count as failed
 * steps and shrink the step; a step that shrinks below machine resolution or
 * a run exceeding max_steps raises ConvergenceError.
 */
template <std::size_t N, class RHS, class Sink>
std::pair<State<N>, IvpStatus> integrate(RHS&& rhs, double t0, double t1, State<N> y0,
                                         const IvpOptions& opt, Sink&& sink) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

  const double span = t1 - t0;
  if (!(span > 0.0)) throw DomainError("integrate: empty time span");

  double t = t0;
  State<N> y = y0;
  State<N> k1, k2, k3, k4, k5, k6, k7, ytmp, y1v;
  k1 = rhs(t, y);

  auto scaled_rms = [&](const State<N>& e, const State<N>& ya, const State<N>& yb) {
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      const double q = e[i] / sc;
      sum += q * q;
    }
    return std::sqrt(sum / double(N));
  };

  double h = opt.h_init;
  if (!(h > 0.0)) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / double(N));
    d1 = std::sqrt(d1 / double(N));
    h = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 * span : 0.01 * d0 / d1;
  }
  h = std::min(h, span);

  IvpStatus status;
  long attempts = 0;
  while (t < t1) {
    if (++attempts > opt.max_steps) {
      std::ostringstream os;
      os << "integrate: exceeded " << opt.max_steps << " steps at t = " << t;
      throw ConvergenceError(os.str());
    }
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() *
                        std::max(std::abs(t), std::abs(span));
    if (h < hmin) {
      std::ostringstream os;
      os << "integrate: step size underflow at t = " << t << " (h = " << h << ")";
      throw ConvergenceError(os.str());
    }
    if (t + h > t1) h = t1 - t;

    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    k2 = rhs(t + c2 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = rhs(t + c3 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(t + c4 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(t + c5 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = rhs(t + h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      y1v[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    k7 = rhs(t + h, y1v);

    State<N> errv;
    for (std::size_t i = 0; i < N; ++i)
      errv[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    double err = scaled_rms(errv, y, y1v);
    bool finite = std::isfinite(err);
    for (std::size_t i = 0; finite && i < N; ++i) finite = std::isfinite(y1v[i]);
    if (!finite) err = 1e10;

    if (err <= 1.0) {
      Step<N> st{t, t + h, y, y1v, k1, k7};
      t += h;
      y = y1v;
      k1 = k7;
      ++status.steps;
      const double fac = (err == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h = std::min(h * fac, span);
      if (sink(st) == ControlFlow::Stop) {
        status.t = st.t1;
        status.stopped_early = true;
        return {y, status};
      }
    } else {
      const double fac = finite ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0) : 0.1;
      h *= std::max(fac, 0.1);
    }
  }
  status.t = t;
  return {y, status};
}

}  // namespace fbtumor::num
