#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hatescan/corpus.hpp"
#include "hatescan/features.hpp"
#include "hatescan/lbfgs.hpp"

namespace hatescan {

enum class Algo { Lr, Svm };
enum class Task { Hate, Sentiment };
enum class ModelRole { Hate, SentimentOvrComponent };

std::string_view to_string(Algo a);
std::string_view to_string(Task t);
std::optional<Algo> parse_algo(std::string_view text);
std::optional<Task> parse_task(std::string_view text);

struct LrConfig {
  double c_inverse_reg = 0.1;
  double tol = 1e-6;
  int max_iter = 1000;
  bool fit_bias = true;
  std::uint64_t seed = 0;
  // Whether the strength was given as the raw penalty lambda = 1 / C.
  bool set_as_penalty = false;

  static LrConfig from_penalty(double lambda);
};

struct SvmConfig {
  double c = 1.0;
  double tol = 1e-4;
  int max_iter = 2000;  // epochs over the data
  std::uint64_t seed = 0;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  Algo algo = Algo::Lr;
  ModelRole role = ModelRole::Hate;
  std::string positive_class;
  FeatureMode feature_mode = FeatureMode::Bow;
  std::string config_fingerprint;
  bool converged = false;
  int iterations = 0;

  bool operator==(const LinearModel&) const = default;
};

// One binary component per sentiment class, indexed by SentimentLabel.
struct OvrModel {
  std::array<LinearModel, 3> components;

  bool operator==(const OvrModel&) const = default;
};

// L(w, b) = ||w||^2 / (2C) + sum_i log(1 + exp(-y_i (w.x_i + b))); the bias
// (last parameter, present when fit_bias) is not penalized. Writes the
// gradient when `grad` is non-empty.
double logreg_objective(std::span<const SparseVector> X, std::span<const int> y, double c_inverse_reg,
                        bool fit_bias, std::span<const double> params, std::span<double> grad);

// y in {-1, +1}.
LinearModel train_logreg(std::span<const SparseVector> X, std::span<const int> y, const LrConfig& lr,
                         const LbfgsConfig& lbfgs);

struct SvmSolution {
  LinearModel model;
  std::vector<double> alpha;
  double primal = 0.0;
  double dual = 0.0;
  double max_violation = 0.0;
  int epochs = 0;
};

// Dual coordinate descent for min 0.5 ||w~||^2 + C sum_i hinge(y_i w~.x~_i),
// where x~ = (x, 1) carries the bias as an extra coordinate. Coordinates are
// visited in a seeded random order each epoch.
SvmSolution solve_linear_svm(std::span<const SparseVector> X, std::span<const int> y, const SvmConfig& cfg);
LinearModel train_linear_svm(std::span<const SparseVector> X, std::span<const int> y, const SvmConfig& cfg);

// Objectives of the bias-augmented problem, for duality checks.
double svm_primal_objective(std::span<const SparseVector> X, std::span<const int> y, double c,
                            std::span<const double> weights, double bias);
double svm_dual_objective(std::span<const SparseVector> X, std::span<const int> y,
                          std::span<const double> alpha);

struct OvrTrainConfig {
  Algo base = Algo::Lr;
  LrConfig lr;
  LbfgsConfig lbfgs;
  SvmConfig svm;
};

OvrModel train_ovr(std::span<const SparseVector> X, std::span<const SentimentLabel> y,
                   const OvrTrainConfig& cfg);

double decision_score(const LinearModel& model, const SparseVector& x);
double sigmoid(double z);
// Only defined for logistic-regression models.
double predict_proba(const LinearModel& model, const SparseVector& x);
// LR: probability >= threshold; SVM: score >= 0.
bool predict_positive(const LinearModel& model, const SparseVector& x, double threshold = 0.5);

std::array<double, 3> decision_scores(const OvrModel& model, const SparseVector& x);
// Argmax with ties resolved in neutral < israel < palestine order.
SentimentLabel argmax_label(const std::array<double, 3>& scores);
SentimentLabel predict(const OvrModel& model, const SparseVector& x);

}  // namespace hatescan
