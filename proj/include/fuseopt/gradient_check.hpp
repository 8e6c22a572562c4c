#ifndef FUSEOPT_GRADIENT_CHECK_HPP
#define FUSEOPT_GRADIENT_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "fuseopt/objective.hpp"

namespace fuseopt {

/// Compares the analytic gradient with central differences
/// (f(x + h e_i) - f(x - h e_i)) / (2h) and returns the worst per-coordinate
/// relative error |g_i - fd_i| / max(1, |fd_i|). The finite difference is the
/// reference, so a gradient bug shows up no matter how the analytic value is
/// scaled.
inline double check_gradient(const Objective& obj, const Point& x, double h) {
  if (!(h > 0.0)) throw invalid_input_error("check_gradient: h must be > 0");
  const Eval at_x = obj.eval_full(x);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> plus = x.coords();
    std::vector<double> minus = x.coords();
    plus[i] += h;
    minus[i] -= h;
    const double f_plus = obj.eval_full(Point(plus)).loss;
    const double f_minus = obj.eval_full(Point(minus)).loss;
    const double fd = (f_plus - f_minus) / (2.0 * h);
    const double rel = std::abs(at_x.gradient[i] - fd) / std::max(1.0, std::abs(fd));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace fuseopt

#endif  // FUSEOPT_GRADIENT_CHECK_HPP
