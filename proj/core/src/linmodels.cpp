#include "hatescan/linmodels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>

#include "hatescan/error.hpp"
#include "hatescan/hashing.hpp"
#include "hatescan/random.hpp"

namespace hatescan {

std::string_view to_string(Algo a) { return a == Algo::Lr ? "lr" : "svm"; }
std::string_view to_string(Task t) { return t == Task::Hate ? "hate" : "sentiment"; }

std::optional<Algo> parse_algo(std::string_view text) {
  if (text == "lr") return Algo::Lr;
  if (text == "svm") return Algo::Svm;
  return std::nullopt;
}

std::optional<Task> parse_task(std::string_view text) {
  if (text == "hate") return Task::Hate;
  if (text == "sentiment") return Task::Sentiment;
  return std::nullopt;
}

LrConfig LrConfig::from_penalty(double lambda) {
  if (!(lambda > 0.0)) throw ParameterError("lr: penalty lambda must be positive");
  LrConfig cfg;
  cfg.c_inverse_reg = 1.0 / lambda;
  cfg.set_as_penalty = true;
  return cfg;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_training_input(std::span<const SparseVector> X, std::span<const int> y) {
  if (X.size() != y.size()) {
    throw DataError("training data: " + std::to_string(X.size()) + " vectors but " +
                    std::to_string(y.size()) + " labels");
  }
  if (X.size() < 2) throw DataError("training data: need at least 2 examples");
  bool pos = false, neg = false;
  for (int label : y) {
    if (label == 1) {
      pos = true;
    } else if (label == -1) {
      neg = true;
    } else {
      throw DataError("binary labels must be -1 or +1, got " + std::to_string(label));
    }
  }
  if (!pos || !neg) throw DataError("training data contains a single class");
  const auto dim = X.front().dimension();
  for (const auto& x : X) {
    if (x.dimension() != dim) throw DataError("training data: inconsistent vector dimensions");
  }
}

// log(1 + exp(-m)) without overflow.
double logistic_loss(double margin) {
  return margin > 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logreg_objective(std::span<const SparseVector> X, std::span<const int> y, double c_inverse_reg,
                        bool fit_bias, std::span<const double> params, std::span<double> grad) {
  const std::size_t dim = params.size() - (fit_bias ? 1 : 0);
  const double bias = fit_bias ? params[dim] : 0.0;
  const auto w = params.first(dim);
  const double inv_c = 1.0 / c_inverse_reg;

  double f = 0.5 * inv_c * std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
  const bool want_grad = !grad.empty();
  if (want_grad) {
    for (std::size_t k = 0; k < dim; ++k) grad[k] = inv_c * w[k];
    if (fit_bias) grad[dim] = 0.0;
  }
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double yi = static_cast<double>(y[i]);
    const double margin = yi * (X[i].dot(w) + bias);
    f += logistic_loss(margin);
    if (want_grad) {
      // d/dz log(1 + exp(-y z)) = -y * sigmoid(-y z)
      const double coef = -yi * sigmoid(-margin);
      X[i].add_to(grad.first(dim), coef);
      if (fit_bias) grad[dim] += coef;
    }
  }
  return f;
}

LinearModel train_logreg(std::span<const SparseVector> X, std::span<const int> y, const LrConfig& lr,
                         const LbfgsConfig& lbfgs) {
  check_training_input(X, y);
  if (!(lr.c_inverse_reg > 0.0)) throw ParameterError("lr: c_inverse_reg must be positive");
  if (!(lr.tol > 0.0)) throw ParameterError("lr: tol must be positive");
  const std::size_t dim = X.front().dimension();

  LbfgsConfig opt = lbfgs;
  opt.tol = lr.tol;
  opt.max_iter = lr.max_iter;
  auto objective = [&](std::span<const double> p, std::span<double> g) {
    return logreg_objective(X, y, lr.c_inverse_reg, lr.fit_bias, p, g);
  };
  const auto result =
      lbfgs_minimize(objective, std::vector<double>(dim + (lr.fit_bias ? 1 : 0), 0.0), opt);

  LinearModel model;
  model.algo = Algo::Lr;
  model.weights.assign(result.x.begin(), result.x.begin() + static_cast<std::ptrdiff_t>(dim));
  model.bias = lr.fit_bias ? result.x[dim] : 0.0;
  model.converged = result.converged;
  model.iterations = result.iterations;
  model.positive_class = "positive";
  model.config_fingerprint = sha256_hex(
      "lr c=" + fmt_double(lr.c_inverse_reg) + " tol=" + fmt_double(lr.tol) +
      " max_iter=" + std::to_string(lr.max_iter) + " fit_bias=" + std::to_string(lr.fit_bias) +
      " seed=" + std::to_string(lr.seed) + " memory=" + std::to_string(lbfgs.memory) +
      " c1=" + fmt_double(lbfgs.line_search.c1) + " shrink=" + fmt_double(lbfgs.line_search.shrink) +
      " backtracks=" + std::to_string(lbfgs.line_search.max_backtracks));
  return model;
}

double svm_primal_objective(std::span<const SparseVector> X, std::span<const int> y, double c,
                            std::span<const double> weights, double bias) {
  double f = 0.5 * (std::inner_product(weights.begin(), weights.end(), weights.begin(), 0.0) + bias * bias);
  for (std::size_t i = 0; i < X.size(); ++i) {
    f += c * std::max(0.0, 1.0 - static_cast<double>(y[i]) * (X[i].dot(weights) + bias));
  }
  return f;
}

double svm_dual_objective(std::span<const SparseVector> X, std::span<const int> y,
                          std::span<const double> alpha) {
  const std::size_t dim = X.empty() ? 0 : X.front().dimension();
  std::vector<double> w(dim, 0.0);
  double b = 0.0;
  double sum_alpha = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double ay = alpha[i] * static_cast<double>(y[i]);
    X[i].add_to(w, ay);
    b += ay;
    sum_alpha += alpha[i];
  }
  return sum_alpha - 0.5 * (std::inner_product(w.begin(), w.end(), w.begin(), 0.0) + b * b);
}

SvmSolution solve_linear_svm(std::span<const SparseVector> X, std::span<const int> y, const SvmConfig& cfg) {
  check_training_input(X, y);
  if (!(cfg.c > 0.0)) throw ParameterError("svm: c must be positive");
  const std::size_t n = X.size();
  const std::size_t dim = X.front().dimension();

  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) qd[i] = X[i].squared_norm() + 1.0;

  SvmSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> w(dim, 0.0);
  double b = 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed);

  auto projected_gradient = [&](std::size_t i) {
    const double g = static_cast<double>(y[i]) * (X[i].dot(w) + b) - 1.0;
    if (sol.alpha[i] <= 0.0) return std::pair{g, std::min(g, 0.0)};
    if (sol.alpha[i] >= cfg.c) return std::pair{g, std::max(g, 0.0)};
    return std::pair{g, g};
  };

  auto exact_violation = [&] {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v = std::max(v, std::abs(projected_gradient(i).second));
    return v;
  };

  for (sol.epochs = 0; sol.epochs < cfg.max_iter;) {
    ++sol.epochs;
    rng.shuffle(std::span(order));
    double sweep_violation = 0.0;
    for (auto i : order) {
      const auto [g, pg] = projected_gradient(i);
      sweep_violation = std::max(sweep_violation, std::abs(pg));
      if (std::abs(pg) <= 1e-12) continue;
      const double old = sol.alpha[i];
      sol.alpha[i] = std::clamp(old - g / qd[i], 0.0, cfg.c);
      const double delta = (sol.alpha[i] - old) * static_cast<double>(y[i]);
      X[i].add_to(w, delta);
      b += delta;
    }
    // The sweep saw each violation before its own updates; confirm on the final iterate.
    if (sweep_violation <= cfg.tol && exact_violation() <= cfg.tol) break;
  }

  sol.max_violation = exact_violation();

  LinearModel& model = sol.model;
  model.algo = Algo::Svm;
  model.weights = std::move(w);
  model.bias = b;
  model.converged = sol.max_violation <= cfg.tol;
  model.iterations = sol.epochs;
  model.positive_class = "positive";
  model.config_fingerprint =
      sha256_hex("svm c=" + fmt_double(cfg.c) + " tol=" + fmt_double(cfg.tol) + " max_iter=" +
                 std::to_string(cfg.max_iter) + " seed=" + std::to_string(cfg.seed) + " bias=augmented");
  sol.primal = svm_primal_objective(X, y, cfg.c, model.weights, model.bias);
  sol.dual = svm_dual_objective(X, y, sol.alpha);
  return sol;
}

LinearModel train_linear_svm(std::span<const SparseVector> X, std::span<const int> y, const SvmConfig& cfg) {
  return solve_linear_svm(X, y, cfg).model;
}

OvrModel train_ovr(std::span<const SparseVector> X, std::span<const SentimentLabel> y,
                   const OvrTrainConfig& cfg) {
  if (X.size() != y.size()) throw DataError("training data: vectors/labels length mismatch");
  for (auto cls : kSentimentOrder) {
    if (std::find(y.begin(), y.end(), cls) == y.end()) {
      throw DataError("sentiment training data has no \"" + std::string(to_string(cls)) + "\" examples");
    }
  }
  auto train_component = [&](SentimentLabel cls) {
    std::vector<int> binary(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) binary[i] = y[i] == cls ? 1 : -1;
    LinearModel m = cfg.base == Algo::Lr ? train_logreg(X, binary, cfg.lr, cfg.lbfgs)
                                         : train_linear_svm(X, binary, cfg.svm);
    m.role = ModelRole::SentimentOvrComponent;
    m.positive_class = std::string(to_string(cls));
    return m;
  };
  // Components are independent problems; each is deterministic on its own.
  std::array<std::future<LinearModel>, 3> pending;
  for (std::size_t c = 0; c < 3; ++c) {
    pending[c] = std::async(std::launch::async, train_component, kSentimentOrder[c]);
  }
  OvrModel model;
  for (std::size_t c = 0; c < 3; ++c) model.components[c] = pending[c].get();
  return model;
}

double decision_score(const LinearModel& model, const SparseVector& x) {
  if (x.dimension() != model.weights.size()) {
    throw DataError("decision_score: vector dimension " + std::to_string(x.dimension()) +
                    " does not match model dimension " + std::to_string(model.weights.size()));
  }
  return x.dot(model.weights) + model.bias;
}

double predict_proba(const LinearModel& model, const SparseVector& x) {
  if (model.algo != Algo::Lr) {
    throw UnsupportedOperation("predict_proba: SVM models expose decision scores only");
  }
  return sigmoid(decision_score(model, x));
}

bool predict_positive(const LinearModel& model, const SparseVector& x, double threshold) {
  if (model.algo == Algo::Lr) return predict_proba(model, x) >= threshold;
  return decision_score(model, x) >= 0.0;
}

std::array<double, 3> decision_scores(const OvrModel& model, const SparseVector& x) {
  return {decision_score(model.components[0], x), decision_score(model.components[1], x),
          decision_score(model.components[2], x)};
}

SentimentLabel argmax_label(const std::array<double, 3>& scores) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < 3; ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return kSentimentOrder[best];
}

SentimentLabel predict(const OvrModel& model, const SparseVector& x) {
  return argmax_label(decision_scores(model, x));
}

}  // namespace hatescan
