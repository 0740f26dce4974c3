#include "hatescan/pipeline.hpp"

#include <algorithm>

#include "hatescan/error.hpp"
#include "hatescan/hashing.hpp"
#include "hatescan/random.hpp"

namespace hatescan {

using nlohmann::json;

std::vector<std::string> class_names(Task task) {
  if (task == Task::Hate) return {"no_hate", "hate"};
  return {"neutral", "israel", "palestine"};
}

json config_echo(const ModelSpec& spec) {
  json lr = {{"tol", spec.lr.tol}, {"max_iter", spec.lr.max_iter}, {"fit_bias", spec.lr.fit_bias}};
  if (spec.lr.set_as_penalty) {
    lr["lambda"] = 1.0 / spec.lr.c_inverse_reg;
    lr["regularization_key"] = "lambda";
  } else {
    lr["c_inverse_reg"] = spec.lr.c_inverse_reg;
    lr["regularization_key"] = "c_inverse_reg";
  }
  return json{
      {"task", to_string(spec.task)},
      {"algo", to_string(spec.algo)},
      {"features",
       {{"mode", to_string(spec.features.mode)},
        {"min_df", spec.features.min_df},
        {"sublinear_tf", spec.features.sublinear_tf},
        {"idf", "smooth_ln"},
        {"tfidf_l2_normalized", true}}},
      {"lr", lr},
      {"lbfgs",
       {{"memory", spec.lbfgs.memory},
        {"c1", spec.lbfgs.line_search.c1},
        {"shrink", spec.lbfgs.line_search.shrink},
        {"max_backtracks", spec.lbfgs.line_search.max_backtracks}}},
      {"svm",
       {{"c", spec.svm.c},
        {"tol", spec.svm.tol},
        {"max_iter", spec.svm.max_iter},
        {"loss", "hinge"},
        {"bias", "augmented"},
        {"grid", spec.svm_grid},
        {"tune_folds", spec.tune_folds}}},
      {"seed", spec.seed},
  };
}

std::vector<double> TrainedModel::scores(const SparseVector& x) const {
  if (binary) return {decision_score(*binary, x)};
  const auto s = decision_scores(*ovr, x);
  return {s.begin(), s.end()};
}

int TrainedModel::predict_class(const SparseVector& x, double threshold) const {
  if (binary) return predict_positive(*binary, x, threshold) ? 1 : 0;
  return static_cast<int>(predict(*ovr, x));
}

bool TrainedModel::converged() const {
  if (binary) return binary->converged;
  return std::all_of(ovr->components.begin(), ovr->components.end(),
                     [](const LinearModel& m) { return m.converged; });
}

int TrainedModel::iterations() const {
  if (binary) return binary->iterations;
  int total = 0;
  for (const auto& m : ovr->components) total = std::max(total, m.iterations);
  return total;
}

std::string train_fingerprint(std::span<const Example> train, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(train.size());
  for (const auto& e : train) ids.push_back(e.id);
  std::sort(ids.begin(), ids.end());
  std::string buf = "train/v1 seed=" + std::to_string(seed) + "\n";
  for (const auto& id : ids) buf += id + "\n";
  return sha256_hex(buf);
}

TrainedModel fit_model(std::span<const Example> train, const ModelSpec& spec) {
  if (train.empty()) throw DataError("cannot fit a model on an empty training set");
  const int k = num_classes(spec.task);
  for (const auto& e : train) {
    if (e.label < 0 || e.label >= k) {
      throw DataError("example \"" + e.id + "\" has label " + std::to_string(e.label) + " outside the " +
                      std::string(to_string(spec.task)) + " task");
    }
  }

  std::vector<TokenDoc> docs;
  docs.reserve(train.size());
  for (const auto& e : train) docs.push_back(e.doc);
  Featurizer featurizer(fit_vocabulary(docs, spec.features), spec.features);
  const auto X = featurizer.transform(docs);
  std::vector<int> labels;
  labels.reserve(train.size());
  for (const auto& e : train) labels.push_back(e.label);

  TrainedModel model;
  model.task = spec.task;
  model.algo = spec.algo;
  model.seed = spec.seed;
  model.pipeline_fingerprint = spec.pipeline_fingerprint;
  model.train_fingerprint = train_fingerprint(train, spec.seed);

  SvmConfig svm = spec.svm;
  svm.seed = derive_seed(spec.seed, "svm-order");
  if (spec.algo == Algo::Svm && !spec.svm_grid.empty()) {
    model.tuning = tune_svm_c(X, labels, k, spec.svm_grid, spec.tune_folds, derive_seed(spec.seed, "folds"), svm);
    svm.c = model.tuning->best_c;
  }
  ModelSpec effective = spec;
  effective.svm = svm;
  model.config = config_echo(effective);
  model.config_fingerprint = sha256_hex(model.config.dump());

  if (spec.task == Task::Hate) {
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == 1 ? 1 : -1;
    LinearModel m = spec.algo == Algo::Lr ? train_logreg(X, y, spec.lr, spec.lbfgs) : train_linear_svm(X, y, svm);
    m.role = ModelRole::Hate;
    m.positive_class = "hate";
    m.feature_mode = spec.features.mode;
    model.binary = std::move(m);
  } else {
    std::vector<SentimentLabel> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = static_cast<SentimentLabel>(labels[i]);
    OvrModel m = train_ovr(X, y, OvrTrainConfig{spec.algo, spec.lr, spec.lbfgs, svm});
    for (auto& c : m.components) c.feature_mode = spec.features.mode;
    model.ovr = std::move(m);
  }
  model.featurizer.emplace(std::move(featurizer));
  return model;
}

}  // namespace hatescan
