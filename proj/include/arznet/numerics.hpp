#pragma once

#include <cmath>
#include <cstddef>

namespace arznet {

inline constexpr std::size_t kMaxBisectionIterations = 200;

/// Flux tolerance used by the junction solvers, scaled by the flux level of
/// the problem at hand.
inline double flux_tolerance(double scale) { return 1e-9 * std::fmax(1.0, std::fabs(scale)); }

struct BisectionResult {
  double root = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Bisection on [lo, hi] for a continuous f with f(lo) >= 0 >= f(hi) (or the
/// reverse ordering of signs). The caller checks the bracket. Iterates until
/// the interval stops shrinking in floating point or the iteration budget is
/// exhausted; returns whichever end point has the smaller |f|.
template <class F>
BisectionResult bisect(F&& f, double lo, double hi, double f_lo, double f_hi,
                       std::size_t max_iterations = kMaxBisectionIterations) {
  const bool lo_positive = f_lo >= 0.0;
  std::size_t it = 0;
  for (; it < max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    const double f_mid = f(mid);
    if (f_mid == 0.0) {
      return {mid, 0.0, it + 1, true};
    }
    if ((f_mid > 0.0) == lo_positive) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  const bool converged = it < max_iterations;
  if (std::fabs(f_lo) <= std::fabs(f_hi)) {
    return {lo, f_lo, it, converged};
  }
  return {hi, f_hi, it, converged};
}

} // namespace arznet
