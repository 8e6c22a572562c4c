#ifndef FUSEOPT_OBJECTIVE_HPP
#define FUSEOPT_OBJECTIVE_HPP

#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "fuseopt/errors.hpp"
#include "fuseopt/point.hpp"

namespace fuseopt {

class Dataset;

/// One objective evaluation: loss value plus gradient at the same point.
struct Eval {
  double loss;
  Point gradient;
};

/// Ordered list of sample indices making up one mini-batch.
struct BatchSelector {
  std::vector<std::size_t> indices;

  /// Checks non-empty, in-range, duplicate-free against a dataset of size n.
  void validate(std::size_t n) const {
    if (indices.empty()) {
      throw invalid_input_error("batch must contain at least one sample");
    }
    std::set<std::size_t> seen;
    for (std::size_t idx : indices) {
      if (idx >= n) {
        throw invalid_input_error("batch index " + std::to_string(idx) +
                                  " out of range [0, " + std::to_string(n) + ")");
      }
      if (!seen.insert(idx).second) {
        throw invalid_input_error("duplicate index " + std::to_string(idx) +
                                  " in batch");
      }
    }
  }

  static BatchSelector full(std::size_t n) {
    BatchSelector b;
    b.indices.resize(n);
    for (std::size_t i = 0; i < n; ++i) b.indices[i] = i;
    return b;
  }
};

/// Evaluation contract shared by every optimizer in the library.
/// Implementations are immutable after construction and deterministic:
/// identical inputs return bit-identical (loss, gradient) pairs. For
/// deterministic analytic functions eval_batch simply forwards to
/// eval_full; only dataset-backed objectives give the batch meaning.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dimension() const = 0;

  virtual Eval eval_full(const Point& x) const = 0;

  virtual Eval eval_batch(const Point& x, const BatchSelector& /*batch*/) const {
    return eval_full(x);
  }

  /// Non-null only for dataset-backed objectives.
  virtual const Dataset* dataset() const { return nullptr; }
};

/// Guard used by objective implementations: rejects a non-finite loss
/// before it can silently poison an optimizer run.
inline double checked_loss(double loss, const char* what) {
  if (!std::isfinite(loss)) {
    throw numeric_error(std::string(what) + ": loss is not finite");
  }
  return loss;
}

}  // namespace fuseopt

#endif  // FUSEOPT_OBJECTIVE_HPP
