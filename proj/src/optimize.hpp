#pragma once

#include <cmath>

namespace ecwm::detail {

struct Maximum {
  double x = 0.0;
  double fx = -INFINITY;
};

// Golden-section search for the maximum of a unimodal f on [lo, hi]. The
// endpoints are evaluated too, so maxima sitting on a bound are returned exactly.
template <typename F>
Maximum golden_maximize(F&& f, double lo, double hi, double tol = 1e-11) {
  constexpr double kInvPhi = 0.6180339887498949;
  Maximum best{lo, f(lo)};
  if (hi <= lo) return best;
  const double f_hi = f(hi);
  if (f_hi > best.fx) best = {hi, f_hi};

  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  const double fx = f(x);
  if (fx > best.fx) best = {x, fx};
  return best;
}

}  // namespace ecwm::detail
