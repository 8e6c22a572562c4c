#ifndef FUSEOPT_LOGISTIC_HPP
#define FUSEOPT_LOGISTIC_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "fuseopt/dataset.hpp"
#include "fuseopt/objective.hpp"

namespace fuseopt {

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) - y*z without overflow for |z| large.
inline double bce_from_logit(double z, double y) {
  if (z > 0.0) {
    return (1.0 - y) * z + std::log1p(std::exp(-z));
  }
  return -y * z + std::log1p(std::exp(z));
}

}  // namespace detail

/// Mean binary cross-entropy over the batch with logits w'z + b, where
/// x = [w; b] (so dim(x) = feature_dim + 1), and its exact gradient.
/// Samples accumulate in batch order; the fixed reduction order keeps
/// evaluations bit-reproducible.
inline Eval erm_logistic(const Point& x, const BatchSelector& batch, const Dataset& data) {
  batch.validate(data.size());
  const std::size_t d = data.feature_dim();
  require_dim(x, d + 1, "erm_logistic");

  double loss = 0.0;
  std::vector<double> grad(d + 1, 0.0);
  for (std::size_t idx : batch.indices) {
    double z = x[d];  // bias
    for (std::size_t j = 0; j < d; ++j) z += x[j] * data.feature(idx, j);
    const double y = data.label(idx);
    loss += detail::bce_from_logit(z, y);
    const double resid = detail::sigmoid(z) - y;
    for (std::size_t j = 0; j < d; ++j) grad[j] += resid * data.feature(idx, j);
    grad[d] += resid;
  }
  const double inv = 1.0 / static_cast<double>(batch.indices.size());
  loss *= inv;
  for (auto& gi : grad) gi *= inv;
  return {checked_loss(loss, "erm_logistic"), Point(std::move(grad))};
}

/// Binary logistic regression over a dataset. eval_full is the mean over
/// all n samples; eval_batch restricts to the selected indices.
class LogisticObjective : public Objective {
 public:
  explicit LogisticObjective(Dataset data) : data_(std::move(data)) {}

  std::size_t dimension() const override { return data_.feature_dim() + 1; }

  Eval eval_full(const Point& x) const override {
    return erm_logistic(x, BatchSelector::full(data_.size()), data_);
  }

  Eval eval_batch(const Point& x, const BatchSelector& batch) const override {
    return erm_logistic(x, batch, data_);
  }

  const Dataset* dataset() const override { return &data_; }

 private:
  Dataset data_;
};

}  // namespace fuseopt

#endif  // FUSEOPT_LOGISTIC_HPP
