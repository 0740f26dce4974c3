#include "hatescan/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

namespace hatescan {

namespace {

constexpr double kCurvature = 0.9;
constexpr double kRoundingSlack = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct CurvaturePair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion: returns -H * g for the implicit inverse Hessian H.
std::vector<double> search_direction(const std::deque<CurvaturePair>& history, std::span<const double> g) {
  std::vector<double> q(g.begin(), g.end());
  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    const auto& p = history[i];
    alpha[i] = p.rho * dot(p.s, q);
    for (std::size_t k = 0; k < q.size(); ++k) q[k] -= alpha[i] * p.y[k];
  }
  if (!history.empty()) {
    const auto& last = history.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (auto& v : q) v *= gamma;
  }
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& p = history[i];
    const double beta = p.rho * dot(p.y, q);
    for (std::size_t k = 0; k < q.size(); ++k) q[k] += (alpha[i] - beta) * p.s[k];
  }
  for (auto& v : q) v = -v;
  return q;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& objective, std::vector<double> x0, const LbfgsConfig& cfg,
                           const IterationObserver& observer) {
  if (cfg.memory < 1) throw ParameterError("lbfgs: memory must be >= 1");
  const std::size_t n = x0.size();
  LbfgsResult result;
  result.x = std::move(x0);
  std::vector<double> g(n);
  double f = objective(result.x, g);
  if (!std::isfinite(f) || !all_finite(g)) {
    throw Error("lbfgs: objective is not finite at the starting point");
  }

  std::deque<CurvaturePair> history;
  std::vector<double> x_new(n), g_new(n);
  const auto& ls = cfg.line_search;

  for (int iter = 0;; ++iter) {
    result.grad_inf_norm = inf_norm(g);
    if (result.grad_inf_norm <= cfg.tol) {
      result.converged = true;
      result.iterations = iter;
      break;
    }
    if (iter >= cfg.max_iter) {
      result.iterations = iter;
      break;
    }

    auto d = search_direction(history, g);
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      // Lost positive definiteness numerically; restart from steepest descent.
      history.clear();
      d.assign(g.begin(), g.end());
      for (auto& v : d) v = -v;
      slope = dot(g, d);
    }
    double step = history.empty() ? std::min(1.0, 1.0 / std::sqrt(dot(g, g))) : 1.0;

    bool accepted = false;
    double f_new = f;
    for (int bt = 0; bt <= ls.max_backtracks; ++bt, step *= ls.shrink) {
      for (std::size_t k = 0; k < n; ++k) x_new[k] = result.x[k] + step * d[k];
      f_new = objective(x_new, g_new);
      if (!std::isfinite(f_new) || !all_finite(g_new)) continue;
      // Armijo only means something while the predicted decrease is
      // representable next to f.
      const double target = f + ls.c1 * step * slope;
      if (target < f && f_new <= target) {
        accepted = true;
        break;
      }
      // Otherwise fall back on the directional derivative (approximate
      // Wolfe): it must have shrunk enough that the step made progress, but
      // not flipped so far that the step overshot. f may only move by
      // rounding noise.
      const double slope_new = dot(g_new, d);
      if (f_new <= f + kRoundingSlack * std::abs(f) && slope_new >= kCurvature * slope &&
          slope_new <= (1.0 - 2.0 * ls.c1) * std::abs(slope)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw LineSearchError("lbfgs: line search failed after " + std::to_string(ls.max_backtracks) +
                                " backtracks at iteration " + std::to_string(iter + 1),
                            result.x, f);
    }

    CurvaturePair pair{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t k = 0; k < n; ++k) {
      pair.s[k] = x_new[k] - result.x[k];
      pair.y[k] = g_new[k] - g[k];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-12 * dot(pair.y, pair.y) && sy > 0.0) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (history.size() > static_cast<std::size_t>(cfg.memory)) history.pop_front();
    }
    result.x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    if (observer) observer(iter + 1, f);
  }
  result.f = f;
  return result;
}

}  // namespace hatescan
