#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hatescan/features.hpp"
#include "hatescan/linmodels.hpp"

namespace hatescan {

inline const std::vector<double> kDefaultSvmGrid = {0.01, 0.05, 0.1, 0.5, 1.0};

struct CGridRow {
  double c = 0.0;
  double mean_macro_f1 = 0.0;
  double std_macro_f1 = 0.0;
  std::vector<double> fold_macro_f1;
};

struct SvmTuning {
  double best_c = 0.0;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<CGridRow> table;
};

// Stratified k-fold sweep over `grid` (ascending). `classes` holds class
// indices; two classes train a binary SVM (class 1 positive), three train a
// one-vs-rest SVM. best_c maximizes mean macro-F1, ties going to the smaller c.
SvmTuning tune_svm_c(std::span<const SparseVector> X, std::span<const int> classes, int num_classes,
                     std::span<const double> grid, int k, std::uint64_t seed, const SvmConfig& base);

nlohmann::json to_json(const SvmTuning& tuning);
SvmTuning tuning_from_json(const nlohmann::json& j);

}  // namespace hatescan
