#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hatescan/corpus.hpp"
#include "hatescan/pipeline.hpp"

namespace hatescan {

// counts[predicted][true] over class indices 0..n-1.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> class_order);

  std::size_t num_classes() const { return class_order_.size(); }
  const std::vector<std::string>& class_order() const { return class_order_; }
  std::size_t at(std::size_t predicted, std::size_t truth) const { return counts_[predicted][truth]; }
  void add(std::size_t predicted, std::size_t truth, std::size_t n = 1) { counts_[predicted][truth] += n; }
  std::size_t total() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> class_order_;
  std::vector<std::vector<std::size_t>> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::vector<std::string> class_order);

// Binary convenience: class 0 negative, class 1 positive.
ConfusionMatrix binary_confusion(std::size_t tn, std::size_t fp, std::size_t fn, std::size_t tp);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  bool zero_division = false;  // a precision or recall denominator was 0
};

struct Metrics {
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
};

double f1_score(double precision, double recall);
Metrics metrics_from_cm(const ConfusionMatrix& cm);

// Mann-Whitney rank statistic with midranks for ties. y_true holds 0/1.
double auroc_binary(std::span<const double> scores, std::span<const int> y_true);
// `scores` is row-major items x num_classes; y_true holds class indices.
std::vector<double> auroc_ovr(std::span<const double> scores, std::size_t num_classes,
                              std::span<const int> y_true);

struct EvalReport {
  Metrics metrics;
  ConfusionMatrix confusion{{}};
  // Per class, in class order. Binary tasks report one value, for the
  // positive class. Absent when the class is missing from the evaluated set.
  std::vector<std::pair<std::string, std::optional<double>>> auroc;
  std::optional<double> training_accuracy;
  bool model_converged = true;
};

EvalReport evaluate_model(const TrainedModel& model, std::span<const Example> items, double threshold = 0.5);
double accuracy_on(const TrainedModel& model, std::span<const Example> items, double threshold = 0.5);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct CvReport {
  FoldPlan plan;
  std::vector<EvalReport> per_fold;
  // Terms of each fold's vocabulary; fitted on the other k-1 folds only.
  std::vector<std::vector<std::string>> fold_vocabularies;
  MeanStd accuracy;
  MeanStd macro_f1;
  MeanStd weighted_f1;
  std::vector<std::pair<std::string, MeanStd>> auroc;
};

// Aggregates recomputed from per_fold (unweighted mean, population std).
void aggregate(CvReport& report);

CvReport cross_validate(std::span<const Example> items, const ModelSpec& spec, const FoldPlan& plan);

nlohmann::json to_json(const ConfusionMatrix& cm);
nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const CvReport& report);
// One row per class: fold,class,precision,recall,f1,support,auroc.
void write_csv_header(std::ostream& out);
void write_csv_rows(std::ostream& out, const EvalReport& report, const std::string& fold);
void write_csv(std::ostream& out, const CvReport& report);

}  // namespace hatescan
