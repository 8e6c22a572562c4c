#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fuseopt/fuse.hpp"
#include "fuseopt/rng.hpp"
#include "fuseopt/test_functions.hpp"

using namespace fuseopt;
using Catch::Approx;

namespace {

const BatchSelector kFull{{0}};

ThetaSchedule constant_theta(double theta0) {
  ThetaSchedule s;
  s.kind = ThetaKind::constant;
  s.theta0 = theta0;
  return s;
}

}  // namespace

TEST_CASE("theta_at worked examples") {
  CHECK(theta_at(constant_theta(1.0), 0) == 1.0);
  CHECK(theta_at(constant_theta(1.0), 12345) == 1.0);

  ThetaSchedule lin;
  lin.kind = ThetaKind::linear_decay;
  lin.theta0 = 1.0;
  lin.horizon = 100;
  CHECK(theta_at(lin, 50) == Approx(0.5).epsilon(1e-15));
  CHECK(theta_at(lin, 200) == 0.0);  // clamped past the horizon

  ThetaSchedule exp;
  exp.kind = ThetaKind::exponential_decay;
  exp.theta0 = 0.5;
  exp.rate = 0.9;
  CHECK(theta_at(exp, 0) == 0.5);
  CHECK(theta_at(exp, 2) == Approx(0.5 * 0.81).epsilon(1e-15));

  CHECK_THROWS_AS(theta_at(constant_theta(1.5), 0), invalid_input_error);
  CHECK_THROWS_AS(theta_at(constant_theta(1.0), -1), invalid_input_error);
}

TEST_CASE("every schedule stays in [0,1] and never increases") {
  Xoshiro256StarStar rng(55);
  for (int trial = 0; trial < 1000; ++trial) {
    ThetaSchedule s;
    const auto kind = rng.below(3);
    s.kind = kind == 0 ? ThetaKind::constant
                       : kind == 1 ? ThetaKind::linear_decay : ThetaKind::exponential_decay;
    s.theta0 = rng.uniform01();
    s.horizon = 1 + static_cast<long>(rng.below(500));
    s.rate = rng.uniform01();
    double prev = 1.0;
    for (long k = 0; k < 200; k += 1 + static_cast<long>(rng.below(5))) {
      const double th = theta_at(s, k);
      REQUIRE(th >= 0.0);
      REQUIRE(th <= 1.0);
      REQUIRE(th <= prev + 1e-15);
      prev = th;
    }
  }
}

TEST_CASE("epoch criterion fires exactly at the threshold") {
  SwitchCriterion c = SwitchCriterion::epoch(5.0);
  const Point g({1.0});
  for (long epoch = 0; epoch <= 4; ++epoch) {
    CHECK_FALSE(criterion_update_and_test(c, epoch, epoch, 1.0, g));
  }
  CHECK(criterion_update_and_test(c, 5, 5, 1.0, g));
}

TEST_CASE("grad_norm criterion triggers at the hand-computed call") {
  // squared norms 4, 2, 0.5 -> cumulative means 4, 3, 2.1667 with zeta = 3:
  // the mean must fall strictly below zeta, so the boundary mean of 3 at the
  // second call must NOT fire
  SwitchCriterion c = SwitchCriterion::grad_norm(3.0);
  CHECK_FALSE(criterion_update_and_test(c, 0, 0, 1.0, Point({2.0, 0.0})));
  CHECK_FALSE(criterion_update_and_test(c, 1, 0, 1.0, Point({1.0, 1.0})));
  CHECK(criterion_update_and_test(c, 2, 0, 1.0, Point({0.5, 0.5})));
}

TEST_CASE("grad_norm criterion with a moving window") {
  SwitchCriterion c = SwitchCriterion::grad_norm(1.0, 2);
  CHECK_FALSE(criterion_update_and_test(c, 0, 0, 0.0, Point({3.0})));   // window mean 9
  CHECK_FALSE(criterion_update_and_test(c, 1, 0, 0.0, Point({1.0})));   // mean (9+1)/2 = 5
  CHECK_FALSE(criterion_update_and_test(c, 2, 0, 0.0, Point({1.0})));   // mean (1+1)/2 = 1, not < 1
  CHECK(criterion_update_and_test(c, 3, 0, 0.0, Point({0.5})));         // mean (1+0.25)/2 < 1
}

TEST_CASE("loss_diff criterion triggers on the worked epoch means") {
  SwitchCriterion c = SwitchCriterion::loss_diff(0.01);
  CHECK_FALSE(criterion_update_and_test(c, 0, 0, 1.00, Point({1.0})));
  CHECK_FALSE(criterion_update_and_test(c, 1, 1, 0.50, Point({1.0})));
  CHECK(criterion_update_and_test(c, 2, 2, 0.495, Point({1.0})));
}

TEST_CASE("loss_diff smooths within an epoch") {
  SwitchCriterion c = SwitchCriterion::loss_diff(0.05);
  // epoch 0 mean = 1.0
  CHECK_FALSE(criterion_update_and_test(c, 0, 0, 1.2, Point({1.0})));
  CHECK_FALSE(criterion_update_and_test(c, 1, 0, 0.8, Point({1.0})));
  // epoch 1: first batch is far from 1.0, the epoch mean closes in
  CHECK_FALSE(criterion_update_and_test(c, 2, 1, 0.7, Point({1.0})));
  CHECK(criterion_update_and_test(c, 3, 1, 1.25, Point({1.0})));  // running mean 0.975
}

TEST_CASE("trigger latches: once true, always true") {
  Xoshiro256StarStar rng(777);
  for (int trial = 0; trial < 2000; ++trial) {
    SwitchCriterion c;
    const auto kind = rng.below(3);
    if (kind == 0) {
      c = SwitchCriterion::epoch(static_cast<double>(rng.below(10)));
    } else if (kind == 1) {
      c = SwitchCriterion::grad_norm(rng.uniform(0.1, 2.0));
    } else {
      c = SwitchCriterion::loss_diff(rng.uniform(0.01, 0.5));
    }
    bool seen = false;
    for (long k = 0; k < 60; ++k) {
      const long epoch = k / 5;
      const double loss = rng.uniform(0.0, 2.0);
      const Point g({rng.uniform(-2.0, 2.0)});
      const bool now = criterion_update_and_test(c, k, epoch, loss, g);
      if (seen) REQUIRE(now);
      seen = seen || now;
    }
  }
}

TEST_CASE("criterion replay triggers at the same index") {
  Xoshiro256StarStar rng(31337);
  std::vector<double> losses;
  std::vector<Point> grads;
  for (int k = 0; k < 50; ++k) {
    losses.push_back(rng.uniform(0.0, 2.0));
    grads.push_back(Point({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)}));
  }
  const auto first_trigger = [&](SwitchCriterion c) {
    for (long k = 0; k < 50; ++k) {
      if (criterion_update_and_test(c, k, k / 4, losses[static_cast<std::size_t>(k)],
                                    grads[static_cast<std::size_t>(k)])) {
        return k;
      }
    }
    return -1L;
  };
  const long a = first_trigger(SwitchCriterion::grad_norm(1.9));
  const long b = first_trigger(SwitchCriterion::grad_norm(1.9));
  CHECK(a == b);
  const long c1 = first_trigger(SwitchCriterion::loss_diff(0.2));
  const long c2 = first_trigger(SwitchCriterion::loss_diff(0.2));
  CHECK(c1 == c2);
}

TEST_CASE("fuse blend is the exact convex combination") {
  const AnalyticObjective obj(2, &rosenbrock2d);
  const Point x({-1.2, 1.0});
  const Eval e = obj.eval_full(x);

  FuseState st = FuseState::init(2, constant_theta(0.5));
  const AdamResult adam = adam_step(st.adam, x, e.gradient);
  const LbfgsStepResult lb = lbfgs_step(st.lbfgs, obj, kFull, x, e.loss, e.gradient);

  const FuseStepResult r = fuse_step(st, obj, kFull, x);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r.x_next[i] == 0.5 * adam.x_next[i] + 0.5 * lb.x_next[i]);
  }
  CHECK(r.record.theta.has_value());
  CHECK(*r.record.theta == 0.5);
  CHECK(r.record.phase == Phase::fuse);
  CHECK(r.state.k == 1);
}

TEST_CASE("fuse with theta 1 walks exactly like adam") {
  const AnalyticObjective obj(2, &rosenbrock2d);
  FuseState fuse = FuseState::init(2, constant_theta(1.0));
  AdamState adam = AdamState::init(2);
  Point xf({-1.2, 1.0});
  Point xa({-1.2, 1.0});
  for (int i = 0; i < 100; ++i) {
    const FuseStepResult rf = fuse_step(fuse, obj, kFull, xf);
    const AdamResult ra = adam_step(adam, xa, obj.eval_full(xa).gradient);
    fuse = rf.state;
    adam = ra.state;
    xf = rf.x_next;
    xa = ra.x_next;
    REQUIRE(std::abs(xf[0] - xa[0]) <= 1e-12);
    REQUIRE(std::abs(xf[1] - xa[1]) <= 1e-12);
  }
}

TEST_CASE("fuse with theta 0 walks exactly like lbfgs") {
  const AnalyticObjective obj(2, &rosenbrock2d);
  FuseState fuse = FuseState::init(2, constant_theta(0.0));
  LbfgsState lb;
  Point xf({-1.2, 1.0});
  Point xl({-1.2, 1.0});
  for (int i = 0; i < 100; ++i) {
    const FuseStepResult rf = fuse_step(fuse, obj, kFull, xf);
    const Eval e = obj.eval_full(xl);
    const LbfgsStepResult rl = lbfgs_step(lb, obj, kFull, xl, e.loss, e.gradient);
    fuse = rf.state;
    lb = rl.state;
    xf = rf.x_next;
    xl = rl.x_next;
    REQUIRE(std::abs(xf[0] - xl[0]) <= 1e-12);
    REQUIRE(std::abs(xf[1] - xl[1]) <= 1e-12);
  }
}

TEST_CASE("fuse-pv that never switches equals pure adam") {
  const AnalyticObjective obj(2, &rosenbrock2d);
  FusePvState pv = FusePvState::init(2, SwitchCriterion::epoch(1e18));
  AdamState adam = AdamState::init(2);
  Point xp({-1.2, 1.0});
  Point xa({-1.2, 1.0});
  for (int i = 0; i < 100; ++i) {
    const FusePvStepResult rp = fuse_pv_step(pv, obj, kFull, xp, i);
    const AdamResult ra = adam_step(adam, xa, obj.eval_full(xa).gradient);
    pv = rp.state;
    adam = ra.state;
    xp = rp.x_next;
    xa = ra.x_next;
    REQUIRE(rp.record.phase == Phase::adam);
    REQUIRE(xp == xa);
  }
  CHECK_FALSE(pv.switch_iter.has_value());
}

TEST_CASE("fuse-pv with epoch threshold 0 equals pure lbfgs from the start") {
  const AnalyticObjective obj(2, &rosenbrock2d);
  FusePvState pv = FusePvState::init(2, SwitchCriterion::epoch(0.0));
  LbfgsState lb;
  Point xp({-1.2, 1.0});
  Point xl({-1.2, 1.0});
  for (int i = 0; i < 60; ++i) {
    const FusePvStepResult rp = fuse_pv_step(pv, obj, kFull, xp, i);
    const Eval e = obj.eval_full(xl);
    const LbfgsStepResult rl = lbfgs_step(lb, obj, kFull, xl, e.loss, e.gradient);
    pv = rp.state;
    lb = rl.state;
    xp = rp.x_next;
    xl = rl.x_next;
    REQUIRE(rp.record.phase == Phase::lbfgs);
    REQUIRE(xp == xl);
  }
  REQUIRE(pv.switch_iter.has_value());
  CHECK(*pv.switch_iter == 0);
}

TEST_CASE("fuse-pv phase labels form a first-order prefix and second-order suffix") {
  const AnalyticObjective obj(2, &rosenbrock2d);
  FusePvState pv = FusePvState::init(2, SwitchCriterion::epoch(25.0));
  Point x({-1.2, 1.0});
  std::vector<Phase> phases;
  for (int i = 0; i < 80; ++i) {
    const FusePvStepResult r = fuse_pv_step(pv, obj, kFull, x, i);
    phases.push_back(r.record.phase);
    pv = r.state;
    x = r.x_next;
  }
  bool switched = false;
  for (const Phase p : phases) {
    if (p == Phase::lbfgs) switched = true;
    REQUIRE(p == (switched ? Phase::lbfgs : Phase::adam));
  }
  CHECK(switched);
  CHECK(*pv.switch_iter == 25);
}

TEST_CASE("fuse-pv with an sgd second phase applies plain gradient steps") {
  const AnalyticObjective obj(2, &rosenbrock2d);
  FusePvState pv =
      FusePvState::init(2, SwitchCriterion::epoch(0.0), SecondPhaseKind::sgd);
  pv.sgd.alpha = 0.001;
  const Point x({-1.2, 1.0});
  const Eval e = obj.eval_full(x);
  const FusePvStepResult r = fuse_pv_step(pv, obj, kFull, x, 0);
  CHECK(r.record.phase == Phase::sgd);
  CHECK(r.x_next == add_scaled(x, -0.001, e.gradient));
}
