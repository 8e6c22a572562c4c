#ifndef FUSEOPT_ADAM_HPP
#define FUSEOPT_ADAM_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "fuseopt/errors.hpp"
#include "fuseopt/point.hpp"

namespace fuseopt {

/// Which Adam update rule to apply.
///
/// `paper` keeps the stabilizer inside the square root and folds the bias
/// correction into a single factor on the step size:
///   x+ = x - alpha * (sqrt(1 - beta2^t) / (1 - beta1^t)) * m+ / sqrt(v+ + a)
/// `conventional` is the common formulation with m and v corrected
/// separately and the stabilizer added outside the root:
///   x+ = x - alpha * m^ / (sqrt(v^) + a)
/// Both use t = step count after the increment, so the factors are well
/// defined on the first step.
enum class AdamVariant { paper, conventional };

struct AdamState {
  Point m;
  Point v;
  long step_count = 0;  // steps taken so far
  double beta1 = 0.9;
  double beta2 = 0.999;
  double alpha = 1e-3;
  double stabilizer = 1e-8;  // the small constant `a`
  AdamVariant variant = AdamVariant::paper;

  static AdamState init(std::size_t dim) {
    return AdamState{Point::zeros(dim), Point::zeros(dim)};
  }

  void validate() const {
    if (!(beta1 > 0.0 && beta1 <= 1.0) || !(beta2 > 0.0 && beta2 <= 1.0)) {
      throw invalid_input_error("adam: beta1, beta2 must lie in (0, 1]");
    }
    if (!(alpha > 0.0)) throw invalid_input_error("adam: alpha must be > 0");
    if (!(stabilizer > 0.0)) throw invalid_input_error("adam: stabilizer must be > 0");
  }
};

struct AdamResult {
  AdamState state;
  Point x_next;
};

/// One Adam step. Pure: the input state is untouched, the advanced state is
/// returned. beta1 = beta2 = 0 degenerates to a sign-normalized gradient
/// step, and a zero gradient with zero moments leaves x exactly in place.
inline AdamResult adam_step(const AdamState& state, const Point& x, const Point& g) {
  state.validate();
  require_same_dim(x, g, "adam_step");
  require_same_dim(x, state.m, "adam_step moments");
  require_same_dim(x, state.v, "adam_step moments");

  const std::size_t d = x.size();
  std::vector<double> m(d), v(d), xn(d);
  for (std::size_t i = 0; i < d; ++i) {
    m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g[i];
    v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g[i] * g[i];
  }

  const long t = state.step_count + 1;
  // beta = 1 makes the correction factor 0/0; treat it as 1 (no correction),
  // consistent with the moving average never discounting.
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(t));
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(t));

  if (state.variant == AdamVariant::paper) {
    const double factor = (bc1 == 0.0 || bc2 == 0.0) ? 1.0 : std::sqrt(bc2) / bc1;
    for (std::size_t i = 0; i < d; ++i) {
      xn[i] = x[i] - state.alpha * factor * m[i] / std::sqrt(v[i] + state.stabilizer);
    }
  } else {
    const double c1 = bc1 == 0.0 ? 1.0 : bc1;
    const double c2 = bc2 == 0.0 ? 1.0 : bc2;
    for (std::size_t i = 0; i < d; ++i) {
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      xn[i] = x[i] - state.alpha * m_hat / (std::sqrt(v_hat) + state.stabilizer);
    }
  }

  AdamState next = state;
  next.m = Point(std::move(m));
  next.v = Point(std::move(v));
  next.step_count = t;
  return {std::move(next), Point(std::move(xn))};
}

}  // namespace fuseopt

#endif  // FUSEOPT_ADAM_HPP
