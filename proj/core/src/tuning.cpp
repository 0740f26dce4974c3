#include "hatescan/tuning.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "hatescan/corpus.hpp"
#include "hatescan/error.hpp"
#include "hatescan/eval.hpp"

namespace hatescan {

using nlohmann::json;

SvmTuning tune_svm_c(std::span<const SparseVector> X, std::span<const int> classes, int num_classes,
                     std::span<const double> grid, int k, std::uint64_t seed, const SvmConfig& base) {
  if (grid.empty()) throw ParameterError("svm tuning: empty c grid");
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw ParameterError("svm tuning: c grid must be strictly ascending");
  }
  if (num_classes != 2 && num_classes != 3) throw ParameterError("svm tuning: 2 or 3 classes supported");
  if (X.size() != classes.size()) throw DataError("svm tuning: vectors/labels length mismatch");

  const auto folds = stratified_fold_assignment(classes, k, seed);
  std::vector<std::string> names;
  for (int c = 0; c < num_classes; ++c) names.push_back(std::to_string(c));

  SvmTuning out;
  out.k = k;
  out.seed = seed;
  for (double c : grid) {
    CGridRow row;
    row.c = c;
    SvmConfig cfg = base;
    cfg.c = c;
    for (int f = 0; f < k; ++f) {
      std::vector<SparseVector> train_x, test_x;
      std::vector<int> train_y, test_y;
      for (std::size_t i = 0; i < X.size(); ++i) {
        if (folds[i] == f) {
          test_x.push_back(X[i]);
          test_y.push_back(classes[i]);
        } else {
          train_x.push_back(X[i]);
          train_y.push_back(classes[i]);
        }
      }
      std::vector<int> predicted;
      predicted.reserve(test_x.size());
      if (num_classes == 2) {
        for (auto& y : train_y) y = y == 1 ? 1 : -1;
        const auto model = train_linear_svm(train_x, train_y, cfg);
        for (const auto& x : test_x) predicted.push_back(decision_score(model, x) >= 0.0 ? 1 : 0);
      } else {
        std::vector<SentimentLabel> labels;
        for (int y : train_y) labels.push_back(static_cast<SentimentLabel>(y));
        OvrTrainConfig ovr_cfg;
        ovr_cfg.base = Algo::Svm;
        ovr_cfg.svm = cfg;
        const auto model = train_ovr(train_x, labels, ovr_cfg);
        for (const auto& x : test_x) predicted.push_back(static_cast<int>(predict(model, x)));
      }
      row.fold_macro_f1.push_back(metrics_from_cm(confusion_matrix(test_y, predicted, names)).macro_f1);
    }
    double sum = 0.0;
    for (double v : row.fold_macro_f1) sum += v;
    row.mean_macro_f1 = sum / static_cast<double>(k);
    double var = 0.0;
    for (double v : row.fold_macro_f1) var += (v - row.mean_macro_f1) * (v - row.mean_macro_f1);
    row.std_macro_f1 = std::sqrt(var / static_cast<double>(k));
    out.table.push_back(std::move(row));
  }
  // Strict improvement required, so ties keep the smaller c.
  const CGridRow* best = &out.table.front();
  for (const auto& row : out.table) {
    if (row.mean_macro_f1 > best->mean_macro_f1) best = &row;
  }
  out.best_c = best->c;
  return out;
}

json to_json(const SvmTuning& t) {
  json rows = json::array();
  for (const auto& r : t.table) {
    rows.push_back({{"c", r.c},
                    {"mean_macro_f1", r.mean_macro_f1},
                    {"std_macro_f1", r.std_macro_f1},
                    {"fold_macro_f1", r.fold_macro_f1}});
  }
  return json{{"best_c", t.best_c}, {"k", t.k}, {"seed", t.seed}, {"table", rows}};
}

SvmTuning tuning_from_json(const json& j) {
  SvmTuning t;
  t.best_c = j.at("best_c").get<double>();
  t.k = j.at("k").get<int>();
  t.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& r : j.at("table")) {
    t.table.push_back(CGridRow{r.at("c").get<double>(), r.at("mean_macro_f1").get<double>(),
                               r.at("std_macro_f1").get<double>(),
                               r.at("fold_macro_f1").get<std::vector<double>>()});
  }
  return t;
}

}  // namespace hatescan
