#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>

#include "fbtumor/errors.hpp"

namespace fbtumor::num {

/// Termination policy for bisection. Success on |residual| <= residual_tol;
/// once the interval width falls to width_floor the midpoint is accepted only
/// if |residual| <= residual_fallback, otherwise a ConvergenceError reports
/// the collapse.
struct BisectOptions {
  double residual_tol;
  double width_floor;
  double residual_fallback;
  int max_iter = 256;
};

struct BisectResult {
  double x;
  double residual;
  bool hit_width_floor = false;
  int evals = 0;
};

/// Bisection on a bracketing interval [lo, hi] with known residuals of
/// opposite sign. The caller supplies the endpoint residuals so analytic
/// endpoints cost nothing.
template <class F>
BisectResult bisect(F&& f, double lo, double f_lo, double hi, double f_hi,
                    const BisectOptions& opt, const char* what) {
  if (f_lo == 0.0) return {lo, 0.0, false, 0};
  if (f_hi == 0.0) return {hi, 0.0, false, 0};
  if ((f_lo < 0.0) == (f_hi < 0.0)) {
    std::ostringstream os;
    os << what << ": endpoints do not bracket a root (residuals " << f_lo << " and " << f_hi
       << ")";
    throw ConsistencyError(os.str());
  }
  int evals = 0;
  for (int i = 0; i < opt.max_iter; ++i) {
    const double x = 0.5 * (lo + hi);
    const double r = f(x);
    ++evals;
    if (std::abs(r) <= opt.residual_tol || r == 0.0) return {x, r, false, evals};
    if ((r < 0.0) == (f_lo < 0.0)) {
      lo = x;
      f_lo = r;
    } else {
      hi = x;
      f_hi = r;
    }
    if (hi - lo <= opt.width_floor) {
      if (std::abs(r) <= opt.residual_fallback) return {x, r, true, evals};
      std::ostringstream os;
      os << what << ": interval collapsed to width " << (hi - lo) << " with residual " << r
         << " still above " << opt.residual_fallback;
      throw ConvergenceError(os.str());
    }
  }
  std::ostringstream os;
  os << what << ": no convergence in " << opt.max_iter << " bisection steps";
  throw ConvergenceError(os.str());
}

struct Bracket {
  double lo, f_lo, hi, f_hi;
};

/// Geometric bracket search for a decreasing residual: doubles upward while
/// the residual stays positive, halves downward while it stays negative.
/// Starts at x0 and gives up after max_doublings steps in one direction.
template <class F>
Bracket bracket_decreasing(F&& f, double x0, int max_doublings, const char* what) {
  double f0 = f(x0);
  if (f0 == 0.0) return {x0, 0.0, x0, 0.0};
  if (f0 > 0.0) {
    double lo = x0, f_lo = f0;
    for (int i = 0; i < max_doublings; ++i) {
      const double hi = 2.0 * lo;
      const double f_hi = f(hi);
      if (f_hi <= 0.0) return {lo, f_lo, hi, f_hi};
      lo = hi;
      f_lo = f_hi;
    }
  } else {
    double hi = x0, f_hi = f0;
    for (int i = 0; i < max_doublings; ++i) {
      const double lo = 0.5 * hi;
      const double f_lo = f(lo);
      if (f_lo >= 0.0) return {lo, f_lo, hi, f_hi};
      hi = lo;
      f_hi = f_lo;
    }
  }
  std::ostringstream os;
  os << what << ": no sign change within " << max_doublings << " doublings from " << x0;
  throw ConvergenceError(os.str());
}

/// Composite Simpson rule on a uniform grid of an odd number of samples.
template <class Vec>
double simpson_uniform(const Vec& y, double h) {
  const std::size_t n = y.size();
  if (n < 3 || n % 2 == 0)
    throw DomainError("simpson_uniform: needs an odd sample count of at least 3");
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i + 1 < n; i += 2) odd += y[i];
  for (std::size_t i = 2; i + 1 < n; i += 2) even += y[i];
  return h / 3.0 * (y[0] + 4.0 * odd + 2.0 * even + y[n - 1]);
}

}  // namespace fbtumor::num
