#ifndef FUSEOPT_FUSE_HPP
#define FUSEOPT_FUSE_HPP

#include <cmath>
#include <deque>
#include <optional>
#include <utility>

#include "fuseopt/adam.hpp"
#include "fuseopt/lbfgs.hpp"
#include "fuseopt/objective.hpp"
#include "fuseopt/sgd.hpp"
#include "fuseopt/trace.hpp"

namespace fuseopt {

enum class ThetaKind { constant, linear_decay, exponential_decay };

/// Blend-weight schedule for the soft combination. Starts near 1 (mostly
/// first-order) and decays toward 0 (mostly second-order); every schedule
/// stays inside [0, 1] and never increases.
struct ThetaSchedule {
  ThetaKind kind = ThetaKind::constant;
  double theta0 = 1.0;
  long horizon = 1;    // linear decay reaches 0 here
  double rate = 1.0;   // exponential decay factor per iteration

  void validate() const {
    if (!(theta0 >= 0.0 && theta0 <= 1.0)) {
      throw invalid_input_error("theta schedule: theta0 must lie in [0, 1]");
    }
    if (kind == ThetaKind::linear_decay && horizon < 1) {
      throw invalid_input_error("theta schedule: horizon must be >= 1");
    }
    if (kind == ThetaKind::exponential_decay && !(rate >= 0.0 && rate <= 1.0)) {
      throw invalid_input_error("theta schedule: rate must lie in [0, 1]");
    }
  }
};

inline double theta_at(const ThetaSchedule& schedule, long k) {
  schedule.validate();
  if (k < 0) throw invalid_input_error("theta_at: k must be >= 0");
  switch (schedule.kind) {
    case ThetaKind::constant:
      return schedule.theta0;
    case ThetaKind::linear_decay:
      return std::max(0.0, schedule.theta0 *
                               (1.0 - static_cast<double>(k) / static_cast<double>(schedule.horizon)));
    case ThetaKind::exponential_decay:
      return schedule.theta0 * std::pow(schedule.rate, static_cast<double>(k));
  }
  throw internal_error("unknown theta schedule kind");
}

enum class CriterionKind { epoch, grad_norm, loss_diff };

/// Switchover condition with its running statistics. The trigger latches:
/// once true it stays true, so the phase change is one-way.
///
///  - epoch: fires when the epoch counter reaches the threshold.
///  - grad_norm: tracks the mean of squared gradient norms (cumulative, or
///    over a moving window when `window` is set) and fires when that mean
///    drops strictly below the threshold zeta.
///  - loss_diff: smooths batch losses to epoch-level means and fires when
///    the running mean of the current epoch sits within sigma of the
///    previous epoch's mean.
struct SwitchCriterion {
  CriterionKind kind = CriterionKind::epoch;
  double threshold = 0.0;
  std::optional<std::size_t> window;  // grad_norm only; absent = cumulative

  bool triggered = false;

  // grad_norm accumulator
  std::deque<double> recent_sq;
  double sum_sq = 0.0;
  std::size_t count = 0;

  // loss_diff accumulator
  long current_epoch = -1;
  double epoch_sum = 0.0;
  std::size_t epoch_count = 0;
  std::optional<double> prev_epoch_mean;

  static SwitchCriterion epoch(double threshold) {
    SwitchCriterion c;
    c.kind = CriterionKind::epoch;
    c.threshold = threshold;
    return c;
  }
  static SwitchCriterion grad_norm(double zeta, std::optional<std::size_t> window = std::nullopt) {
    SwitchCriterion c;
    c.kind = CriterionKind::grad_norm;
    c.threshold = zeta;
    c.window = window;
    return c;
  }
  static SwitchCriterion loss_diff(double sigma) {
    SwitchCriterion c;
    c.kind = CriterionKind::loss_diff;
    c.threshold = sigma;
    return c;
  }

  void validate() const {
    if (kind != CriterionKind::epoch && !(threshold > 0.0)) {
      throw invalid_input_error("switch criterion: threshold must be > 0");
    }
    if (window && *window == 0) {
      throw invalid_input_error("switch criterion: window must be >= 1");
    }
  }
};

/// Feeds one iteration's observation into the criterion and reports the
/// latched trigger state. Call exactly once per iteration, with that
/// iteration's batch loss and gradient.
inline bool criterion_update_and_test(SwitchCriterion& c, long k, long epoch, double loss,
                                      const Point& g) {
  c.validate();
  (void)k;
  if (c.triggered) return true;

  switch (c.kind) {
    case CriterionKind::epoch: {
      if (static_cast<double>(epoch) >= c.threshold) c.triggered = true;
      break;
    }
    case CriterionKind::grad_norm: {
      const double sq = dot(g, g);
      c.sum_sq += sq;
      ++c.count;
      double mean;
      if (c.window) {
        c.recent_sq.push_back(sq);
        if (c.recent_sq.size() > *c.window) {
          c.recent_sq.pop_front();
        }
        double s = 0.0;
        for (double v : c.recent_sq) s += v;
        mean = s / static_cast<double>(c.recent_sq.size());
      } else {
        mean = c.sum_sq / static_cast<double>(c.count);
      }
      if (mean < c.threshold) c.triggered = true;
      break;
    }
    case CriterionKind::loss_diff: {
      if (epoch != c.current_epoch) {
        if (c.epoch_count > 0) {
          c.prev_epoch_mean = c.epoch_sum / static_cast<double>(c.epoch_count);
        }
        c.current_epoch = epoch;
        c.epoch_sum = 0.0;
        c.epoch_count = 0;
      }
      c.epoch_sum += loss;
      ++c.epoch_count;
      if (c.prev_epoch_mean) {
        const double running = c.epoch_sum / static_cast<double>(c.epoch_count);
        if (std::abs(running - *c.prev_epoch_mean) <= c.threshold) c.triggered = true;
      }
      break;
    }
  }
  return c.triggered;
}

/// Soft-blend state: both sub-optimizers advance every iteration and the
/// next iterate is theta * x_adam + (1 - theta) * x_lbfgs.
struct FuseState {
  AdamState adam;
  LbfgsState lbfgs;
  ThetaSchedule schedule;
  long k = 0;

  static FuseState init(std::size_t dim, ThetaSchedule schedule_ = {}) {
    return FuseState{AdamState::init(dim), LbfgsState{}, schedule_, 0};
  }
};

struct FuseStepResult {
  FuseState state;
  Point x_next;
  StepRecord record;
};

/// One soft-blend iteration. The batch gradient is evaluated once at x and
/// shared by both branches; the L-BFGS branch runs its own line search on
/// the same batch. Both sub-optimizers are re-anchored at the blended
/// iterate, so their curvature/moment histories track the trajectory that
/// is actually followed.
inline FuseStepResult fuse_step(const FuseState& state, const Objective& obj,
                                const BatchSelector& batch, const Point& x) {
  const Eval e = obj.eval_batch(x, batch);
  const double theta = theta_at(state.schedule, state.k);

  AdamResult adam = adam_step(state.adam, x, e.gradient);
  LbfgsStepResult lbfgs = lbfgs_step(state.lbfgs, obj, batch, x, e.loss, e.gradient);

  Point x_next = blend(theta, adam.x_next, lbfgs.x_next);
  FuseState next{std::move(adam.state), std::move(lbfgs.state), state.schedule, state.k + 1};
  StepRecord rec{e.loss, norm(e.gradient), lbfgs.alpha, theta, Phase::fuse};
  return {std::move(next), std::move(x_next), rec};
}

enum class FusePhase { first_order, second_order };

/// What runs after the switch: L-BFGS for the main algorithm, plain SGD
/// for the Adam+SGD comparison baseline built on the same machinery.
enum class SecondPhaseKind { lbfgs, sgd };

/// Hard-switchover state: Adam until the criterion fires, the second-order
/// (or SGD) phase afterwards. The transition happens exactly once, and the
/// L-BFGS history starts empty at the switch point.
struct FusePvState {
  AdamState adam;
  LbfgsState lbfgs;
  SgdState sgd;
  SwitchCriterion criterion;
  SecondPhaseKind second_phase = SecondPhaseKind::lbfgs;
  FusePhase phase = FusePhase::first_order;
  long k = 0;
  std::optional<long> switch_iter;

  static FusePvState init(std::size_t dim, SwitchCriterion criterion_,
                          SecondPhaseKind second = SecondPhaseKind::lbfgs) {
    return FusePvState{AdamState::init(dim), LbfgsState{},    SgdState{},
                       std::move(criterion_), second,         FusePhase::first_order,
                       0,                     std::nullopt};
  }
};

struct FusePvStepResult {
  FusePvState state;
  Point x_next;
  StepRecord record;
};

/// One hard-switchover iteration: evaluate the batch, feed the switchover
/// criterion, then apply whichever phase is active. The criterion is tested
/// before the step, so an epoch threshold of zero runs the second phase
/// from the very first iterate.
inline FusePvStepResult fuse_pv_step(const FusePvState& state, const Objective& obj,
                                     const BatchSelector& batch, const Point& x, long epoch) {
  const Eval e = obj.eval_batch(x, batch);

  FusePvState next = state;
  const bool fire = criterion_update_and_test(next.criterion, state.k, epoch, e.loss, e.gradient);
  if (fire && next.phase == FusePhase::first_order) {
    next.phase = FusePhase::second_order;
    next.switch_iter = state.k;
  }

  Point x_next = x;
  StepRecord rec{e.loss, norm(e.gradient), 0.0, std::nullopt, Phase::adam};
  if (next.phase == FusePhase::first_order) {
    AdamResult adam = adam_step(next.adam, x, e.gradient);
    next.adam = std::move(adam.state);
    x_next = std::move(adam.x_next);
    rec.step_size = next.adam.alpha;
    rec.phase = Phase::adam;
  } else if (next.second_phase == SecondPhaseKind::lbfgs) {
    LbfgsStepResult lb = lbfgs_step(next.lbfgs, obj, batch, x, e.loss, e.gradient);
    next.lbfgs = std::move(lb.state);
    x_next = std::move(lb.x_next);
    rec.step_size = lb.alpha;
    rec.phase = Phase::lbfgs;
  } else {
    x_next = sgd_step(next.sgd, x, e.gradient);
    rec.step_size = next.sgd.alpha;
    rec.phase = Phase::sgd;
  }

  next.k = state.k + 1;
  return {std::move(next), std::move(x_next), rec};
}

}  // namespace fuseopt

#endif  // FUSEOPT_FUSE_HPP
