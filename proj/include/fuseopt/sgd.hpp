#ifndef FUSEOPT_SGD_HPP
#define FUSEOPT_SGD_HPP

#include "fuseopt/errors.hpp"
#include "fuseopt/point.hpp"

namespace fuseopt {

struct SgdState {
  double alpha = 1e-2;

  void validate() const {
    if (!(alpha > 0.0)) throw invalid_input_error("sgd: alpha must be > 0");
  }
};

/// x - alpha * g.
inline Point sgd_step(const SgdState& state, const Point& x, const Point& g) {
  state.validate();
  require_same_dim(x, g, "sgd_step");
  return add_scaled(x, -state.alpha, g);
}

}  // namespace fuseopt

#endif  // FUSEOPT_SGD_HPP
