#ifndef FUSEOPT_HARNESS_HPP
#define FUSEOPT_HARNESS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fuseopt/dataset.hpp"
#include "fuseopt/fuse.hpp"
#include "fuseopt/gradient_check.hpp"
#include "fuseopt/logistic.hpp"
#include "fuseopt/rng.hpp"
#include "fuseopt/test_functions.hpp"
#include "fuseopt/trace.hpp"

namespace fuseopt {

struct HeldoutConfig {
  double frac = 0.2;
  std::optional<std::uint64_t> seed;  // defaults to the run seed
};

/// Fully resolved description of one experiment. Parsed from a JSON object;
/// see parse_run_config for the key set.
struct RunConfig {
  std::string label;  // used by races and plot data

  // objective
  std::string objective_name;
  std::vector<double> quad_diag;              // quadratic
  std::vector<double> quad_b;                 // quadratic, optional
  std::size_t synth_n = 2000;                 // synthetic_logistic
  std::size_t synth_d = 20;
  double synth_separation = 4.0;
  std::uint64_t synth_seed = 0;
  std::string csv_path;                       // csv_logistic
  std::string csv_label_column = "label";

  // optimizer
  std::string optimizer_name;
  double alpha = -1.0;  // adam / sgd step size; <0 means per-optimizer default
  double beta1 = 0.9;
  double beta2 = 0.999;
  double stabilizer = 1e-8;
  AdamVariant adam_variant = AdamVariant::paper;
  std::size_t lbfgs_history = 10;
  LineSearchConfig line_search{};
  double curvature_eps = 1e-10;
  double fallback_alpha = 1e-3;
  double sgd_alpha = 1e-2;  // second phase of adam_sgd

  std::optional<ThetaSchedule> schedule;      // fuse
  std::optional<SwitchCriterion> criterion;   // fuse_pv / adam_sgd

  std::uint64_t seed = 0;
  long max_epochs = 1;
  std::size_t batch_size = 32;
  std::optional<std::vector<double>> start;
  std::optional<HeldoutConfig> heldout;       // dataset objectives; defaulted there
  bool timing = false;                        // live wall_ns column (off keeps traces reproducible)
  std::string output;                         // trace CSV path; empty = no file
};

struct RunSummary {
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  double best_loss = std::numeric_limits<double>::quiet_NaN();
  long iterations = 0;
  std::optional<long> switch_iter;
  std::optional<double> test_accuracy;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string failure;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  RunSummary summary;
};

// ---------------------------------------------------------------------------
// config parsing

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& j, const char* key,
                                          const char* where) {
  if (!j.contains(key)) {
    throw config_error(std::string(where) + ": missing key '" + key + "'");
  }
  return j.at(key);
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline SwitchCriterion parse_criterion(const nlohmann::json& j) {
  const std::string kind = require_key(j, "kind", "criterion").get<std::string>();
  const double threshold = require_key(j, "threshold", "criterion").get<double>();
  SwitchCriterion c;
  if (kind == "epoch") {
    c = SwitchCriterion::epoch(threshold);
  } else if (kind == "grad_norm") {
    std::optional<std::size_t> window;
    if (j.contains("window")) window = j.at("window").get<std::size_t>();
    c = SwitchCriterion::grad_norm(threshold, window);
  } else if (kind == "loss_diff") {
    c = SwitchCriterion::loss_diff(threshold);
  } else {
    throw config_error("unknown criterion kind: '" + kind + "'");
  }
  try {
    c.validate();
  } catch (const invalid_input_error& e) {
    throw config_error(e.what());
  }
  return c;
}

inline ThetaSchedule parse_schedule(const nlohmann::json& j) {
  const std::string kind = require_key(j, "kind", "schedule").get<std::string>();
  ThetaSchedule s;
  if (kind == "constant") {
    s.kind = ThetaKind::constant;
  } else if (kind == "linear_decay") {
    s.kind = ThetaKind::linear_decay;
  } else if (kind == "exponential_decay") {
    s.kind = ThetaKind::exponential_decay;
  } else {
    throw config_error("unknown schedule kind: '" + kind + "'");
  }
  s.theta0 = get_or(j, "theta0", 1.0);
  s.horizon = get_or(j, "horizon", long{1});
  s.rate = get_or(j, "rate", 1.0);
  try {
    s.validate();
  } catch (const invalid_input_error& e) {
    throw config_error(e.what());
  }
  return s;
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  using detail::get_or;
  using detail::require_key;

  RunConfig cfg;
  cfg.label = get_or<std::string>(j, "label", "");

  const auto& obj = require_key(j, "objective", "config");
  cfg.objective_name = require_key(obj, "name", "objective").get<std::string>();
  if (cfg.objective_name == "quadratic") {
    cfg.quad_diag = require_key(obj, "diag", "quadratic objective").get<std::vector<double>>();
    cfg.quad_b = get_or(obj, "b", std::vector<double>{});
  } else if (cfg.objective_name == "synthetic_logistic") {
    cfg.synth_n = get_or<std::size_t>(obj, "n", 2000);
    cfg.synth_d = get_or<std::size_t>(obj, "d", 20);
    cfg.synth_separation = get_or(obj, "separation", 4.0);
    cfg.synth_seed = get_or<std::uint64_t>(obj, "data_seed", 0);
  } else if (cfg.objective_name == "csv_logistic") {
    cfg.csv_path = require_key(obj, "path", "csv objective").get<std::string>();
    cfg.csv_label_column = get_or<std::string>(obj, "label_column", "label");
  } else if (cfg.objective_name != "rosenbrock" && cfg.objective_name != "rastrigin" &&
             cfg.objective_name != "ackley" && cfg.objective_name != "himmelblau") {
    throw config_error("unknown objective: '" + cfg.objective_name + "'");
  }

  const auto& opt = require_key(j, "optimizer", "config");
  cfg.optimizer_name = require_key(opt, "name", "optimizer").get<std::string>();
  static const char* known[] = {"sgd", "adam", "lbfgs", "fuse", "fuse_pv", "adam_sgd"};
  if (std::find_if(std::begin(known), std::end(known), [&](const char* n) {
        return cfg.optimizer_name == n;
      }) == std::end(known)) {
    throw config_error("unknown optimizer: '" + cfg.optimizer_name + "'");
  }
  cfg.alpha = get_or(opt, "alpha", -1.0);
  cfg.beta1 = get_or(opt, "beta1", 0.9);
  cfg.beta2 = get_or(opt, "beta2", 0.999);
  cfg.stabilizer = get_or(opt, "a", 1e-8);
  const std::string variant = get_or<std::string>(opt, "variant", "paper");
  if (variant == "paper") {
    cfg.adam_variant = AdamVariant::paper;
  } else if (variant == "conventional") {
    cfg.adam_variant = AdamVariant::conventional;
  } else {
    throw config_error("unknown adam variant: '" + variant + "'");
  }
  cfg.lbfgs_history = get_or<std::size_t>(opt, "history", 10);
  cfg.line_search.c1 = get_or(opt, "c1", 1e-4);
  cfg.line_search.c2 = get_or(opt, "c2", 0.9);
  cfg.line_search.alpha_init = get_or(opt, "alpha_init", 1.0);
  cfg.line_search.alpha_max = get_or(opt, "alpha_max", 10.0);
  cfg.line_search.max_evals = get_or(opt, "max_evals", 25);
  cfg.curvature_eps = get_or(opt, "curvature_eps", 1e-10);
  cfg.fallback_alpha = get_or(opt, "fallback_alpha", 1e-3);
  cfg.sgd_alpha = get_or(opt, "sgd_alpha", 1e-2);

  if (j.contains("criterion")) cfg.criterion = detail::parse_criterion(j.at("criterion"));
  if (j.contains("schedule")) cfg.schedule = detail::parse_schedule(j.at("schedule"));
  if ((cfg.optimizer_name == "fuse_pv" || cfg.optimizer_name == "adam_sgd") && !cfg.criterion) {
    throw config_error(cfg.optimizer_name + " requires a 'criterion' block");
  }
  if (cfg.optimizer_name == "fuse" && !cfg.schedule) {
    throw config_error("fuse requires a 'schedule' block");
  }

  cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
  cfg.max_epochs = require_key(j, "max_epochs", "config").get<long>();
  if (cfg.max_epochs < 1) throw config_error("max_epochs must be >= 1");
  cfg.batch_size = get_or<std::size_t>(j, "batch_size", 32);
  if (cfg.batch_size < 1) throw config_error("batch_size must be >= 1");
  if (j.contains("start")) cfg.start = j.at("start").get<std::vector<double>>();
  if (j.contains("heldout")) {
    const auto& h = j.at("heldout");
    HeldoutConfig hc;
    hc.frac = get_or(h, "frac", 0.2);
    if (h.contains("seed")) hc.seed = h.at("seed").get<std::uint64_t>();
    if (!(hc.frac > 0.0 && hc.frac < 1.0)) {
      throw config_error("heldout frac must lie in (0, 1)");
    }
    cfg.heldout = hc;
  }
  cfg.timing = get_or(j, "timing", false);
  cfg.output = get_or<std::string>(j, "output", "");
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config parse failure in " + path + ": " + e.what());
  }
  return parse_run_config(j);
}

// ---------------------------------------------------------------------------
// held-out split

/// Deterministic split of [0, n): a seeded permutation whose first
/// round(frac * n) entries become the held-out side. Both sides are
/// returned sorted so row order is reproducible.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, std::uint64_t seed, double frac) {
  if (!(frac > 0.0 && frac < 1.0)) throw config_error("split fraction must lie in (0, 1)");
  const auto n_test = static_cast<std::size_t>(std::lround(frac * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) {
    throw config_error("degenerate held-out split: " + std::to_string(n_test) + " of " +
                       std::to_string(n) + " samples");
  }
  auto perm = identity_permutation(n);
  Xoshiro256StarStar rng(seed);
  fisher_yates(perm, rng);
  std::vector<std::size_t> test(perm.begin(), perm.begin() + n_test);
  std::vector<std::size_t> train(perm.begin() + n_test, perm.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {std::move(train), std::move(test)};
}

/// Fraction of held-out samples whose predicted class matches the label.
/// Prediction thresholds the logit at zero, ties predicting class 1, so a
/// zero-weight model predicts 1 everywhere.
inline double heldout_accuracy(const Point& x, const Dataset& data, std::uint64_t split_seed,
                               double split_frac) {
  const std::size_t d = data.feature_dim();
  require_dim(x, d + 1, "heldout_accuracy");
  const auto [train, test] = split_indices(data.size(), split_seed, split_frac);
  (void)train;
  std::size_t hits = 0;
  for (std::size_t idx : test) {
    double z = x[d];
    for (std::size_t j = 0; j < d; ++j) z += x[j] * data.feature(idx, j);
    const double predicted = z >= 0.0 ? 1.0 : 0.0;
    if (predicted == data.label(idx)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

// ---------------------------------------------------------------------------
// experiment loop

namespace detail {

struct ExperimentSetup {
  std::shared_ptr<Objective> objective;
  std::optional<Dataset> full_data;  // dataset objectives only
  std::uint64_t split_seed = 0;
  double split_frac = 0.2;
  Point start;
  Phase base_phase = Phase::adam;
};

inline Point default_start(const std::string& objective_name, std::size_t dim) {
  if (objective_name == "rosenbrock") return Point({-1.2, 1.0});
  if (objective_name == "rastrigin") return Point({4.5, 4.5});
  if (objective_name == "ackley") return Point({3.0, -3.0});
  if (objective_name == "himmelblau") return Point({0.0, 0.0});
  if (objective_name == "quadratic") return Point::ones(dim);
  return Point::zeros(dim);  // logistic models start at zero weights
}

inline ExperimentSetup build_setup(const RunConfig& cfg) {
  std::shared_ptr<Objective> objective;
  std::optional<Dataset> full_data;
  std::uint64_t split_seed = cfg.seed;
  double split_frac = 0.2;

  if (cfg.objective_name == "rosenbrock") {
    objective = std::make_shared<AnalyticObjective>(2, &rosenbrock2d);
  } else if (cfg.objective_name == "rastrigin") {
    objective = std::make_shared<AnalyticObjective>(2, &rastrigin2d);
  } else if (cfg.objective_name == "ackley") {
    objective = std::make_shared<AnalyticObjective>(2, &ackley2d);
  } else if (cfg.objective_name == "himmelblau") {
    objective = std::make_shared<AnalyticObjective>(2, &himmelblau);
  } else if (cfg.objective_name == "quadratic") {
    const std::size_t d = cfg.quad_diag.size();
    if (d == 0) throw config_error("quadratic objective needs a non-empty diag");
    Matrix a(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      if (!(cfg.quad_diag[i] > 0.0)) throw config_error("quadratic diag entries must be > 0");
      a(i, i) = cfg.quad_diag[i];
    }
    Point b = cfg.quad_b.empty() ? Point::zeros(d) : Point(cfg.quad_b);
    try {
      objective = std::make_shared<QuadraticObjective>(std::move(a), std::move(b));
    } catch (const error& e) {
      throw config_error(e.what());
    }
  } else {
    // dataset objectives
    Dataset data = cfg.objective_name == "synthetic_logistic"
                       ? make_synthetic_classification(cfg.synth_n, cfg.synth_d,
                                                       cfg.synth_separation, cfg.synth_seed)
                       : load_csv_dataset(cfg.csv_path, cfg.csv_label_column);
    if (cfg.heldout && cfg.heldout->seed) split_seed = *cfg.heldout->seed;
    if (cfg.heldout) split_frac = cfg.heldout->frac;
    const auto [train_idx, test_idx] = split_indices(data.size(), split_seed, split_frac);
    (void)test_idx;
    Dataset train = data.subset(train_idx);
    if (cfg.batch_size > train.size()) {
      throw config_error("batch_size " + std::to_string(cfg.batch_size) +
                         " exceeds training set size " + std::to_string(train.size()));
    }
    objective = std::make_shared<LogisticObjective>(std::move(train));
    full_data = std::move(data);
  }

  Point start = cfg.start ? Point(*cfg.start) : default_start(cfg.objective_name, objective->dimension());
  if (start.size() != objective->dimension()) {
    throw config_error("start point has dimension " + std::to_string(start.size()) +
                       ", objective needs " + std::to_string(objective->dimension()));
  }

  Phase base = Phase::adam;
  if (cfg.optimizer_name == "sgd") base = Phase::sgd;
  if (cfg.optimizer_name == "lbfgs") base = Phase::lbfgs;
  if (cfg.optimizer_name == "fuse") base = Phase::fuse;
  return ExperimentSetup{std::move(objective), std::move(full_data),
                         split_seed, split_frac, std::move(start), base};
}

using OptimizerState = std::variant<SgdState, AdamState, LbfgsState, FuseState, FusePvState>;

inline OptimizerState build_optimizer(const RunConfig& cfg, std::size_t dim) {
  const double adam_alpha = cfg.alpha > 0.0 ? cfg.alpha : 1e-3;

  AdamState adam = AdamState::init(dim);
  adam.alpha = adam_alpha;
  adam.beta1 = cfg.beta1;
  adam.beta2 = cfg.beta2;
  adam.stabilizer = cfg.stabilizer;
  adam.variant = cfg.adam_variant;

  LbfgsState lbfgs;
  lbfgs.m_hist = cfg.lbfgs_history;
  lbfgs.line_search = cfg.line_search;
  lbfgs.curvature_eps = cfg.curvature_eps;
  lbfgs.fallback_alpha = cfg.fallback_alpha;

  try {
    adam.validate();
    lbfgs.validate();
  } catch (const invalid_input_error& e) {
    throw config_error(e.what());
  }

  if (cfg.optimizer_name == "sgd") {
    return SgdState{cfg.alpha > 0.0 ? cfg.alpha : 1e-2};
  }
  if (cfg.optimizer_name == "adam") {
    return adam;
  }
  if (cfg.optimizer_name == "lbfgs") {
    return lbfgs;
  }
  if (cfg.optimizer_name == "fuse") {
    return FuseState{std::move(adam), std::move(lbfgs), *cfg.schedule, 0};
  }
  FusePvState pv = FusePvState::init(dim, *cfg.criterion,
                                     cfg.optimizer_name == "adam_sgd" ? SecondPhaseKind::sgd
                                                                      : SecondPhaseKind::lbfgs);
  pv.adam = std::move(adam);
  pv.lbfgs = std::move(lbfgs);
  pv.sgd = SgdState{cfg.sgd_alpha};
  return pv;
}

/// Shuffle [0, n) and cut into batches of batch_size; the last batch keeps
/// the remainder. Every sample appears exactly once per epoch.
inline std::vector<BatchSelector> make_epoch_batches(std::size_t n, std::size_t batch_size,
                                                     Xoshiro256StarStar& rng) {
  auto order = identity_permutation(n);
  fisher_yates(order, rng);
  std::vector<BatchSelector> batches;
  for (std::size_t at = 0; at < n; at += batch_size) {
    BatchSelector b;
    const std::size_t end = std::min(n, at + batch_size);
    b.indices.assign(order.begin() + at, order.begin() + end);
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace detail

/// Runs one experiment: epoch loop with seeded shuffling for dataset
/// objectives, one full-gradient step per epoch for analytic functions.
/// Fully deterministic per (config, seed); a numeric failure aborts the
/// run and returns the partial trace with a failure flag in the summary.
inline RunResult run_experiment(const RunConfig& cfg) {
  detail::ExperimentSetup setup = detail::build_setup(cfg);
  const Objective& obj = *setup.objective;
  const bool dataset_run = setup.full_data.has_value();
  const std::size_t n_train =
      dataset_run ? obj.dataset()->size() : 1;

  detail::OptimizerState opt = detail::build_optimizer(cfg, obj.dimension());
  Xoshiro256StarStar rng(cfg.seed);

  RunResult out;
  out.summary.seed = cfg.seed;
  Point x = setup.start;
  long iter = 0;
  // With a single deterministic batch the gradient at x_next computed inside
  // lbfgs_step is next iteration's gradient; reuse it instead of re-evaluating.
  std::optional<std::pair<double, Point>> carried;

  const auto now_ns = [&]() -> long long {
    if (!cfg.timing) return 0;
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  };

  try {
    for (long epoch = 0; epoch < cfg.max_epochs; ++epoch) {
      std::vector<BatchSelector> batches;
      if (dataset_run) {
        batches = detail::make_epoch_batches(n_train, cfg.batch_size, rng);
      } else {
        batches.push_back(BatchSelector{{0}});
      }
      for (const auto& batch : batches) {
        const long long t0 = now_ns();
        StepRecord rec{0.0, 0.0, 0.0, std::nullopt, setup.base_phase};
        Point x_next = x;

        if (auto* sgd = std::get_if<SgdState>(&opt)) {
          const Eval e = obj.eval_batch(x, batch);
          x_next = sgd_step(*sgd, x, e.gradient);
          rec = StepRecord{e.loss, norm(e.gradient), sgd->alpha, std::nullopt, Phase::sgd};
        } else if (auto* adam = std::get_if<AdamState>(&opt)) {
          const Eval e = obj.eval_batch(x, batch);
          AdamResult r = adam_step(*adam, x, e.gradient);
          rec = StepRecord{e.loss, norm(e.gradient), adam->alpha, std::nullopt, Phase::adam};
          *adam = std::move(r.state);
          x_next = std::move(r.x_next);
        } else if (auto* lb = std::get_if<LbfgsState>(&opt)) {
          Eval e0 = carried ? Eval{carried->first, std::move(carried->second)}
                            : obj.eval_batch(x, batch);
          carried.reset();
          LbfgsStepResult r = lbfgs_step(*lb, obj, batch, x, e0.loss, e0.gradient);
          rec = StepRecord{e0.loss, norm(e0.gradient), r.alpha, std::nullopt, Phase::lbfgs};
          *lb = std::move(r.state);
          x_next = std::move(r.x_next);
          if (!dataset_run) carried = std::make_pair(r.f_next, std::move(r.g_next));
        } else if (auto* fuse = std::get_if<FuseState>(&opt)) {
          FuseStepResult r = fuse_step(*fuse, obj, batch, x);
          rec = r.record;
          *fuse = std::move(r.state);
          x_next = std::move(r.x_next);
        } else {
          auto& pv = std::get<FusePvState>(opt);
          FusePvStepResult r = fuse_pv_step(pv, obj, batch, x, epoch);
          rec = r.record;
          pv = std::move(r.state);
          x_next = std::move(r.x_next);
        }

        out.trace.push_back(TraceRecord{iter, epoch, rec.phase, rec.loss, rec.grad_norm,
                                        rec.step_size, rec.theta, now_ns() - t0});
        x = std::move(x_next);
        ++iter;
      }
    }
  } catch (const numeric_error& e) {
    out.summary.failed = true;
    out.summary.failure = e.what();
  }

  out.summary.iterations = iter;
  if (!out.trace.empty()) {
    out.summary.final_loss = out.trace.back().loss;
    double best = out.trace.front().loss;
    for (const auto& r : out.trace) best = std::min(best, r.loss);
    out.summary.best_loss = best;
  }
  if (auto* pv = std::get_if<FusePvState>(&opt)) {
    out.summary.switch_iter = pv->switch_iter;
  }
  if (dataset_run && !out.summary.failed) {
    out.summary.test_accuracy =
        heldout_accuracy(x, *setup.full_data, setup.split_seed, setup.split_frac);
  }
  return out;
}

// ---------------------------------------------------------------------------
// races

struct RaceRow {
  std::string label;
  std::string metric;  // "accuracy" for dataset objectives, "loss" otherwise
  std::size_t runs = 0;
  std::size_t failed = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();
  double loss_mean = std::numeric_limits<double>::quiet_NaN();
  double loss_std = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) {
    return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  }
  double mean = 0.0;
  for (double v : xs) mean += v;
  mean /= static_cast<double>(xs.size());
  if (xs.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : xs) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};  // unbiased
}

}  // namespace detail

/// Runs every (config, seed) pair and reports, per config, the mean and
/// unbiased standard deviation of the final metric: held-out accuracy for
/// dataset objectives, final loss for analytic ones. Final training loss
/// statistics ride along in the loss_mean/loss_std columns. Aborted runs
/// count in the `failed` column and are excluded from the statistics, never
/// silently dropped.
inline std::vector<RaceRow> run_race(const std::vector<RunConfig>& configs,
                                     const std::vector<std::uint64_t>& seeds) {
  if (configs.empty()) throw config_error("race needs at least one config");
  if (seeds.empty()) throw config_error("race needs at least one seed");
  std::vector<RaceRow> rows;
  for (const auto& base : configs) {
    RaceRow row;
    row.label = base.label.empty() ? base.optimizer_name : base.label;
    std::vector<double> metric_values;
    std::vector<double> loss_values;
    bool dataset_metric = false;
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = base;
      cfg.seed = seed;
      cfg.output.clear();  // races report summaries, not per-run traces
      RunResult r = run_experiment(cfg);
      ++row.runs;
      if (r.summary.failed) {
        ++row.failed;
        continue;
      }
      loss_values.push_back(r.summary.final_loss);
      if (r.summary.test_accuracy) {
        dataset_metric = true;
        metric_values.push_back(*r.summary.test_accuracy);
      } else {
        metric_values.push_back(r.summary.final_loss);
      }
    }
    row.metric = dataset_metric ? "accuracy" : "loss";
    std::tie(row.mean, row.stddev) = detail::mean_std(metric_values);
    std::tie(row.loss_mean, row.loss_std) = detail::mean_std(loss_values);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_race_csv(std::ostream& out, const std::vector<RaceRow>& rows) {
  out << "label,metric,runs,failed,mean,std,loss_mean,loss_std\n";
  for (const auto& r : rows) {
    out << r.label << ',' << r.metric << ',' << r.runs << ',' << r.failed << ','
        << format_double17(r.mean) << ',' << format_double17(r.stddev) << ','
        << format_double17(r.loss_mean) << ',' << format_double17(r.loss_std) << "\n";
  }
}

inline void write_race_csv(const std::string& path, const std::vector<RaceRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open race table for writing: " + path);
  write_race_csv(out, rows);
  if (!out) throw io_error("race table write failed: " + path);
}

}  // namespace fuseopt

#endif  // FUSEOPT_HARNESS_HPP
