#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hatescan/augment.hpp"
#include "hatescan/corpus.hpp"
#include "hatescan/date.hpp"
#include "hatescan/features.hpp"
#include "hatescan/lbfgs.hpp"
#include "hatescan/linmodels.hpp"
#include "hatescan/textprep.hpp"

namespace hatescan::cli {

struct Paths {
  std::filesystem::path comments;
  CommentFormat comments_format = CommentFormat::Jsonl;
  std::filesystem::path labels;
  std::vector<std::filesystem::path> augmented;
  std::filesystem::path stopwords;
  std::filesystem::path negations;
  std::filesystem::path lemmas;
  std::filesystem::path replay_store;
  std::filesystem::path hate_suite;
  std::filesystem::path field_comments;
  CommentFormat field_comments_format = CommentFormat::Jsonl;
  std::filesystem::path output_dir = "out";
};

struct EvalSettings {
  double split_ratio = 0.8;
  int k = 10;
  bool include_augmented_in_test = false;
  bool cross_validate = true;
};

struct FieldSettings {
  Date range_start{2023, 10, 2};
  Date range_end{2023, 11, 20};
  double threshold = 0.5;
  std::size_t top_n = 50;
  std::filesystem::path hate_model;
  std::filesystem::path sentiment_model;
};

struct AugmentSettings {
  ClientMode mode = ClientMode::Replay;
  bool record = false;  // live mode: write responses into the replay store
  std::size_t max_in_flight = 4;
  BackTranslateOptions backtranslate;
  std::vector<GenerationSpec> generate;
};

struct RunConfig {
  std::uint64_t seed = 42;
  Paths paths;
  LanguageFilter language_filter;
  FeatureConfig features;
  LrConfig lr;
  LbfgsConfig lbfgs;
  SvmConfig svm;
  std::vector<double> svm_grid;
  int tune_folds = 10;
  EvalSettings eval;
  FieldSettings field;
  AugmentSettings augment;
};

// Unknown keys are rejected; relative paths resolve against the config file's
// directory. Throws ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

// ConfigError naming `what` and the path unless it is an existing file.
void require_file(const std::filesystem::path& path, const char* what);

PipelineConfig load_pipeline(const RunConfig& cfg);

}  // namespace hatescan::cli
