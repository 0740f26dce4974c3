#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hatescan/features.hpp"
#include "hatescan/linmodels.hpp"
#include "hatescan/textprep.hpp"
#include "hatescan/tuning.hpp"

namespace hatescan {

// A preprocessed, labeled training or evaluation item. `label` is the class
// index for the task: hate -> {0 no_hate, 1 hate}; sentiment -> SentimentLabel.
struct Example {
  std::string id;
  TokenDoc doc;
  int label = 0;
};

std::vector<std::string> class_names(Task task);
inline int num_classes(Task task) { return task == Task::Hate ? 2 : 3; }
inline StrataKey strata_key(Task task) { return task == Task::Hate ? StrataKey::Hate : StrataKey::Sentiment; }

// Everything needed to fit a model from Examples.
struct ModelSpec {
  Task task = Task::Hate;
  Algo algo = Algo::Lr;
  FeatureConfig features;
  LrConfig lr;
  LbfgsConfig lbfgs;
  SvmConfig svm;
  // Non-empty together with algo == Svm: sweep c by k-fold CV before fitting.
  std::vector<double> svm_grid;
  int tune_folds = 10;
  std::uint64_t seed = 0;
  std::string pipeline_fingerprint;
};

nlohmann::json config_echo(const ModelSpec& spec);

class TrainedModel {
 public:
  Task task = Task::Hate;
  Algo algo = Algo::Lr;
  std::optional<Featurizer> featurizer;
  std::optional<LinearModel> binary;  // task == Hate
  std::optional<OvrModel> ovr;        // task == Sentiment
  nlohmann::json config;              // echo of every training parameter
  std::string config_fingerprint;
  std::string train_fingerprint;      // hash of training ids + seed
  std::string pipeline_fingerprint;
  std::uint64_t seed = 0;
  std::optional<SvmTuning> tuning;

  const Vocabulary& vocabulary() const { return featurizer->vocabulary(); }
  const FeatureConfig& features() const { return featurizer->config(); }
  SparseVector featurize(const TokenDoc& doc) const { return (*featurizer)(doc); }

  // Binary: {w.x + b}; sentiment: one score per class in SentimentLabel order.
  std::vector<double> scores(const SparseVector& x) const;
  // Class index; `threshold` applies to LR hate probabilities.
  int predict_class(const SparseVector& x, double threshold = 0.5) const;
  bool converged() const;
  int iterations() const;
};

std::string train_fingerprint(std::span<const Example> train, std::uint64_t seed);

TrainedModel fit_model(std::span<const Example> train, const ModelSpec& spec);

}  // namespace hatescan
