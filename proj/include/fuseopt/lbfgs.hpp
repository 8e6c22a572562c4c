#ifndef FUSEOPT_LBFGS_HPP
#define FUSEOPT_LBFGS_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "fuseopt/errors.hpp"
#include "fuseopt/objective.hpp"
#include "fuseopt/point.hpp"

namespace fuseopt {

/// One curvature pair: s = x_next - x, y = g_next - g, with the inner
/// product cached. Pairs are only ever stored when s'y clears the
/// curvature threshold, which keeps the implicit inverse Hessian positive
/// definite.
struct CurvaturePair {
  Point s;
  Point y;
  double sy;
};

struct LineSearchConfig {
  double c1 = 1e-4;       // sufficient-decrease constant
  double c2 = 0.9;        // curvature constant
  double alpha_init = 1.0;
  double alpha_max = 10.0;
  int max_evals = 25;     // objective evaluations, value and gradient together

  void validate() const {
    if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0)) {
      throw invalid_input_error("line search: need 0 < c1 < c2 < 1");
    }
    if (!(alpha_init > 0.0 && alpha_init <= alpha_max)) {
      throw invalid_input_error("line search: need 0 < alpha_init <= alpha_max");
    }
    if (max_evals < 1) throw invalid_input_error("line search: max_evals must be >= 1");
  }
};

struct LbfgsState {
  std::vector<CurvaturePair> history;  // newest last, size <= m_hist
  std::size_t m_hist = 10;
  LineSearchConfig line_search{};
  double curvature_eps = 1e-10;   // accept pair iff s'y > curvature_eps * |s||y|
  double fallback_alpha = 1e-3;   // gradient step size when the search fails

  static LbfgsState init(std::size_t m_hist_ = 10) {
    LbfgsState st;
    st.m_hist = m_hist_;
    return st;
  }

  void validate() const {
    if (m_hist == 0) throw invalid_input_error("lbfgs: history size must be >= 1");
    if (!(fallback_alpha > 0.0)) throw invalid_input_error("lbfgs: fallback alpha must be > 0");
    line_search.validate();
  }
};

/// Two-loop recursion: returns p = -H g for the inverse Hessian
/// approximation H implied by the history, without forming a matrix.
/// First loop walks newest to oldest on q = g, then q is scaled by
/// gamma = s'y / y'y of the newest pair (1 with no history), and the
/// second loop walks oldest to newest. Cost O(m d).
inline Point two_loop_direction(const Point& g, const std::vector<CurvaturePair>& history) {
  for (const auto& pair : history) {
    require_same_dim(pair.s, g, "two_loop_direction");
    if (!(pair.sy > 0.0)) {
      throw internal_error("two_loop_direction: stored pair with s'y <= 0");
    }
  }

  std::vector<double> q = g.coords();
  std::vector<double> alpha(history.size(), 0.0);
  for (std::size_t n = history.size(); n-- > 0;) {
    const auto& pair = history[n];
    double sq = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) sq += pair.s[i] * q[i];
    alpha[n] = sq / pair.sy;
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[n] * pair.y[i];
  }

  double gamma = 1.0;
  if (!history.empty()) {
    const auto& last = history.back();
    gamma = last.sy / dot(last.y, last.y);
  }
  for (auto& qi : q) qi *= gamma;

  for (std::size_t n = 0; n < history.size(); ++n) {
    const auto& pair = history[n];
    double yr = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) yr += pair.y[i] * q[i];
    const double beta = yr / pair.sy;
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[n] - beta) * pair.s[i];
  }

  for (auto& qi : q) qi = -qi;
  return Point(std::move(q));
}

/// Test oracle: builds the same inverse Hessian approximation explicitly
/// via H <- (I - rho s y') H (I - rho y s') + rho s s', rho = 1/(s'y),
/// pairs applied oldest to newest, starting from gamma * I with gamma from
/// the newest pair. two_loop_direction(g, h) must equal -oracle(h) * g.
inline Matrix dense_bfgs_oracle(const std::vector<CurvaturePair>& history, std::size_t d) {
  double gamma = 1.0;
  if (!history.empty()) {
    const auto& last = history.back();
    gamma = last.sy / dot(last.y, last.y);
  }
  Matrix h(d, d);
  for (std::size_t i = 0; i < d; ++i) h(i, i) = gamma;

  for (const auto& pair : history) {
    require_dim(pair.s, d, "dense_bfgs_oracle");
    if (!(pair.sy > 0.0)) {
      throw internal_error("dense_bfgs_oracle: stored pair with s'y <= 0");
    }
    const double rho = 1.0 / pair.sy;
    // v = I - rho * s y'
    Matrix v(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        v(i, j) = (i == j ? 1.0 : 0.0) - rho * pair.s[i] * pair.y[j];
      }
    }
    Matrix vh(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        const double vik = v(i, k);
        if (vik == 0.0) continue;
        for (std::size_t j = 0; j < d; ++j) vh(i, j) += vik * h(k, j);
      }
    Matrix next(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        const double vhik = vh(i, k);
        for (std::size_t j = 0; j < d; ++j) next(i, j) += vhik * v(j, k);
      }
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) next(i, j) += rho * pair.s[i] * pair.s[j];
    h = next;
  }
  return h;
}

enum class LineSearchStatus {
  wolfe,        // both strong Wolfe conditions hold
  armijo_only,  // budget exhausted; best sufficient-decrease point returned
  failed,       // no acceptable point found; alpha = 0
};

struct LineSearchResult {
  double alpha = 0.0;
  double f_new = 0.0;
  Point g_new;
  LineSearchStatus status = LineSearchStatus::failed;
  int evals = 0;
};

namespace detail {

/// Minimizer of the quadratic through (lo, f_lo) with slope d_lo and
/// (hi, f_hi); falls back to bisection when the fit is degenerate or the
/// minimizer crowds an endpoint. Exact on quadratic objectives.
inline double interpolate_step(double lo, double f_lo, double d_lo, double hi, double f_hi) {
  const double mid = 0.5 * (lo + hi);
  const double den = 2.0 * (f_hi - f_lo - d_lo * (hi - lo));
  if (den == 0.0 || !std::isfinite(den)) return mid;
  const double cand = lo - d_lo * (hi - lo) * (hi - lo) / den;
  const double lo_end = std::min(lo, hi), hi_end = std::max(lo, hi);
  const double margin = 0.1 * (hi_end - lo_end);
  if (!std::isfinite(cand) || cand < lo_end + margin || cand > hi_end - margin) return mid;
  return cand;
}

}  // namespace detail

/// Strong-Wolfe line search along p from x (bracketing plus zoom,
/// Nocedal-Wright style). Every evaluation uses the given batch, so the
/// search and any curvature pair formed from its endpoint see one
/// consistent objective. f0 and g0 must be the evaluation at x on that
/// same batch.
///
/// Returns status wolfe with alpha satisfying
///   f(x + a p) <= f0 + c1 a g0'p   and   |g(x + a p)'p| <= c2 |g0'p|;
/// if the evaluation budget runs out first, the best Armijo point seen is
/// returned with status armijo_only; failing even that, status failed and
/// alpha 0. A non-descent direction (g0'p >= 0) throws
/// invalid_direction_error.
inline LineSearchResult wolfe_line_search(const Objective& obj, const BatchSelector& batch,
                                          const Point& x, const Point& p, double f0,
                                          const Point& g0, const LineSearchConfig& cfg) {
  cfg.validate();
  require_same_dim(x, p, "wolfe_line_search");
  const double d0 = dot(g0, p);
  if (!(d0 < 0.0)) {
    throw invalid_direction_error("wolfe_line_search: not a descent direction (g'p = " +
                                  std::to_string(d0) + ")");
  }

  int evals = 0;
  const auto armijo_ok = [&](double a, double fa) { return fa <= f0 + cfg.c1 * a * d0; };
  const auto curvature_ok = [&](double da) { return std::abs(da) <= -cfg.c2 * d0; };

  struct Sample {
    double a, f, d;
    Point g;
  };
  const auto probe = [&](double a) -> Sample {
    Eval e = obj.eval_batch(add_scaled(x, a, p), batch);
    ++evals;
    return {a, e.loss, dot(e.gradient, p), std::move(e.gradient)};
  };

  const auto finish = [&](const Sample& s, LineSearchStatus st) -> LineSearchResult {
    return {s.a, s.f, s.g, st, evals};
  };

  std::optional<Sample> best_armijo;  // lowest f among Armijo-satisfying probes
  const auto remember = [&](const Sample& s) {
    if (armijo_ok(s.a, s.f) && (!best_armijo || s.f < best_armijo->f)) best_armijo = s;
  };
  const auto give_up = [&]() -> LineSearchResult {
    if (best_armijo) return finish(*best_armijo, LineSearchStatus::armijo_only);
    return {0.0, f0, g0, LineSearchStatus::failed, evals};
  };

  // zoom: lo satisfies Armijo with the lowest f seen, hi brackets a Wolfe
  // point from the other side (d_lo * (hi - lo) < 0 on entry).
  const auto zoom = [&](Sample lo, Sample hi) -> LineSearchResult {
    while (evals < cfg.max_evals) {
      if (std::abs(hi.a - lo.a) <= 1e-16 * std::max(1.0, std::abs(lo.a))) break;
      const double aj = detail::interpolate_step(lo.a, lo.f, lo.d, hi.a, hi.f);
      Sample sj = probe(aj);
      remember(sj);
      if (!armijo_ok(sj.a, sj.f) || sj.f >= lo.f) {
        hi = std::move(sj);
      } else {
        if (curvature_ok(sj.d)) return finish(sj, LineSearchStatus::wolfe);
        if (sj.d * (hi.a - lo.a) >= 0.0) hi = std::move(lo);
        lo = std::move(sj);
      }
    }
    return give_up();
  };

  Sample prev{0.0, f0, d0, g0};
  double a = std::min(cfg.alpha_init, cfg.alpha_max);
  bool first = true;
  while (evals < cfg.max_evals) {
    Sample cur = probe(a);
    remember(cur);
    if (!armijo_ok(cur.a, cur.f) || (!first && cur.f >= prev.f)) {
      return zoom(std::move(prev), std::move(cur));
    }
    if (curvature_ok(cur.d)) return finish(cur, LineSearchStatus::wolfe);
    if (cur.d >= 0.0) {
      return zoom(std::move(cur), std::move(prev));
    }
    if (cur.a >= cfg.alpha_max) break;  // still descending at the cap
    prev = std::move(cur);
    a = std::min(2.0 * a, cfg.alpha_max);
    first = false;
  }
  return give_up();
}

struct LbfgsStepResult {
  LbfgsState state;
  Point x_next;
  double f_next = 0.0;
  Point g_next;
  double alpha = 0.0;                // step size actually taken
  LineSearchStatus line_search_status = LineSearchStatus::failed;
  bool used_fallback = false;        // safeguarded gradient step taken
  bool pair_stored = false;
  int evals = 0;
};

/// One L-BFGS iteration: direction from the two-loop recursion, strong-Wolfe
/// step on the same batch, curvature-pair update with threshold test and
/// oldest-first eviction. f0 and g must be the evaluation at x on `batch`.
///
/// If the line search fails outright (or the direction degenerates, e.g.
/// g = 0), a safeguarded gradient step of size fallback_alpha is taken and
/// flagged in the result. Pure: input state is untouched; a numeric error
/// propagates before any new state exists.
inline LbfgsStepResult lbfgs_step(const LbfgsState& state, const Objective& obj,
                                  const BatchSelector& batch, const Point& x,
                                  double f0, const Point& g) {
  state.validate();
  require_same_dim(x, g, "lbfgs_step");

  LbfgsStepResult out{state, x, f0, g};

  std::optional<LineSearchResult> ls;
  try {
    const Point p = two_loop_direction(g, state.history);
    ls = wolfe_line_search(obj, batch, x, p, f0, g, state.line_search);
    if (ls->status != LineSearchStatus::failed) {
      out.x_next = add_scaled(x, ls->alpha, p);
      out.f_next = ls->f_new;
      out.g_next = ls->g_new;
      out.alpha = ls->alpha;
      out.line_search_status = ls->status;
      out.evals = ls->evals;
    }
  } catch (const invalid_direction_error&) {
    // fall through to the safeguarded step
  }

  if (!ls || ls->status == LineSearchStatus::failed) {
    out.x_next = add_scaled(x, -state.fallback_alpha, g);
    Eval e = obj.eval_batch(out.x_next, batch);
    out.f_next = e.loss;
    out.g_next = std::move(e.gradient);
    out.alpha = state.fallback_alpha;
    out.line_search_status = LineSearchStatus::failed;
    out.used_fallback = true;
    out.evals = (ls ? ls->evals : 0) + 1;
  }

  const Point s = subtract(out.x_next, x);
  const Point y = subtract(out.g_next, g);
  const double sy = dot(s, y);
  if (sy > state.curvature_eps * norm(s) * norm(y)) {
    out.state.history.push_back(CurvaturePair{s, y, sy});
    if (out.state.history.size() > out.state.m_hist) {
      out.state.history.erase(out.state.history.begin());
    }
    out.pair_stored = true;
  }
  return out;
}

}  // namespace fuseopt

#endif  // FUSEOPT_LBFGS_HPP
