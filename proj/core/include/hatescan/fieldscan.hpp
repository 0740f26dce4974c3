#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hatescan/corpus.hpp"
#include "hatescan/date.hpp"
#include "hatescan/pipeline.hpp"
#include "hatescan/textprep.hpp"

namespace hatescan {

inline constexpr int kReportFormatVersion = 1;

struct Prediction {
  std::string comment_id;
  std::optional<Source> source;
  std::optional<Date> published_at;
  double hate_prob = 0.0;
  HateLabel hate_label = HateLabel::NoHate;
  std::array<double, 3> sentiment_scores{};  // SentimentLabel order
  SentimentLabel sentiment_label = SentimentLabel::Neutral;
};

struct ApplyOptions {
  double threshold = 0.5;  // on the LR hate probability
  // When set, each model's vocabulary fingerprint must equal these.
  std::optional<std::string> hate_vocabulary;
  std::optional<std::string> sentiment_vocabulary;
};

struct FieldPredictions {
  std::vector<Prediction> predictions;  // cleaned-corpus order
  std::vector<Drop> dropped;
};

// Requires an LR hate model and a sentiment model that were both trained
// under `cfg` (pipeline fingerprints must agree). Sentiment ties go to the
// earliest class in SentimentLabel order.
FieldPredictions apply_models(std::span<const Comment> corpus, const TrainedModel& hate_model,
                              const TrainedModel& sentiment_model, const PipelineConfig& cfg,
                              const ApplyOptions& opts = {});

struct SourceStats {
  std::size_t n = 0;
  std::size_t hate = 0;
  std::array<std::size_t, 3> sentiment{};
  double hate_rate = 0.0;     // hate / n
  double no_hate_rate = 0.0;  // (n - hate) / n
  std::array<double, 3> sentiment_shares{};
};

// Counts `preds` into a cell and derives the rates.
SourceStats tally(std::span<const Prediction* const> preds);

struct SourceBreakdown {
  std::map<Source, SourceStats> per_source;  // only sources with n > 0
  std::vector<std::string> notices;
};

SourceBreakdown aggregate_by_source(std::span<const Prediction> preds);

struct WeekBucket {
  Date start;
  Date end;  // inclusive
  std::map<Source, SourceStats> cells;  // empty cells absent
};

struct WeeklySeries {
  Date range_start;
  Date range_end;
  std::vector<WeekBucket> buckets;
  std::size_t out_of_range = 0;
  std::size_t undated = 0;
};

// Consecutive 7-day buckets anchored on range_start; the last bucket absorbs
// the remainder and ends on range_end.
std::vector<std::pair<Date, Date>> weekly_bucket_spans(Date range_start, Date range_end);
WeeklySeries aggregate_weekly(std::span<const Prediction> preds, Date range_start, Date range_end);

struct TermFreq {
  std::string term;
  double doc_fraction = 0.0;
  std::size_t doc_count = 0;
  std::size_t rank = 0;  // 1-based
};

struct TermFreqTable {
  std::vector<TermFreq> rows;  // descending fraction, ties lexicographic
  std::size_t n_docs = 0;
  std::size_t top_n = 0;
};

TermFreqTable term_frequencies(std::span<const Comment> corpus, const PipelineConfig& cfg, std::size_t top_n);

nlohmann::json to_json(const SourceBreakdown& breakdown, std::uint64_t seed);

struct ReportFiles {
  std::filesystem::path source_breakdown;
  std::filesystem::path weekly_series;
  std::filesystem::path term_freq;
};

// Writes source_breakdown.json, weekly_series.csv and term_freq.csv.
ReportFiles emit_reports(const SourceBreakdown& breakdown, const WeeklySeries& series, const TermFreqTable& freqs,
                         const std::filesystem::path& out_dir, std::uint64_t seed);

}  // namespace hatescan
