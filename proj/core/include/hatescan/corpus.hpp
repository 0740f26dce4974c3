#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hatescan/date.hpp"

namespace hatescan {

enum class Source { Public, Private };
enum class HateLabel { NoHate, Hate };
enum class SentimentLabel { Neutral, ProIsrael, ProPalestine };
enum class Origin { Scraped, BackTranslated, Generated };
enum class StrataKey { Hate, Sentiment };
enum class CommentFormat { Jsonl, Csv };

inline constexpr std::array<SentimentLabel, 3> kSentimentOrder = {
    SentimentLabel::Neutral, SentimentLabel::ProIsrael, SentimentLabel::ProPalestine};

// Wire names: "public"/"private", "0"/"1" (label file) or "no_hate"/"hate",
// "neutral"/"israel"/"palestine", "scraped"/"back_translated"/"generated".
std::string_view to_string(Source s);
std::string_view to_string(HateLabel h);
std::string_view to_string(SentimentLabel s);
std::string_view to_string(Origin o);
std::string_view to_string(StrataKey k);
std::optional<Source> parse_source(std::string_view text);
std::optional<SentimentLabel> parse_sentiment(std::string_view text);
std::optional<Origin> parse_origin(std::string_view text);

struct Comment {
  std::string id;
  std::string video_id;
  std::optional<Source> source;
  std::optional<Date> published_at;
  std::string raw_text;

  bool operator==(const Comment&) const = default;
};

struct LabeledComment {
  Comment comment;
  std::optional<HateLabel> hate;
  std::optional<SentimentLabel> sentiment;
  Origin origin = Origin::Scraped;

  const std::string& id() const { return comment.id; }
  bool operator==(const LabeledComment&) const = default;
};

// Class index of an item under a stratification key: hate -> {0 no_hate,
// 1 hate}, sentiment -> {0 neutral, 1 israel, 2 palestine}.
std::optional<int> class_of(const LabeledComment& item, StrataKey key);
int num_classes(StrataKey key);

// Loads a scraped-comment dump. Every record must carry all five fields.
std::vector<Comment> load_comments(const std::filesystem::path& path, CommentFormat format);
std::vector<Comment> read_comments_jsonl(std::istream& in);
std::vector<Comment> read_comments_csv(std::istream& in);
void write_comments_jsonl(std::ostream& out, std::span<const Comment> comments);

struct LabelSummary {
  std::size_t total = 0;
  std::array<std::size_t, 2> hate{};       // indexed by HateLabel
  std::array<std::size_t, 3> sentiment{};  // indexed by SentimentLabel
  std::array<std::size_t, 2> source{};     // indexed by Source
  std::size_t hate_annotated() const { return hate[0] + hate[1]; }
  std::size_t sentiment_annotated() const { return sentiment[0] + sentiment[1] + sentiment[2]; }
  // Percentages of the annotated items for the respective task.
  double hate_percent(HateLabel h) const;
  double sentiment_percent(SentimentLabel s) const;
  double source_percent(Source s) const;
};

LabelSummary summarize(std::span<const LabeledComment> items);
nlohmann::json to_json(const LabelSummary& summary);

struct LabeledSet {
  std::vector<LabeledComment> items;
  LabelSummary summary;
};

// Joins a label CSV (id,hate,sentiment) onto a corpus. Comments without a
// label row are not part of the result; rows keep corpus order.
LabeledSet load_labels(const std::filesystem::path& path, std::span<const Comment> corpus);
LabeledSet read_labels(std::istream& in, std::span<const Comment> corpus);

// Label-joined JSONL with an `origin` field (augmentation output schema).
void write_labeled_jsonl(std::ostream& out, std::span<const LabeledComment> items);
std::vector<LabeledComment> read_labeled_jsonl(std::istream& in);
std::vector<LabeledComment> load_labeled_jsonl(const std::filesystem::path& path);

struct SplitPlan {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  double ratio = 0.8;
  std::uint64_t seed = 0;
  StrataKey strata_key = StrataKey::Hate;
  bool include_augmented_in_test = false;
};

struct FoldPlan {
  int k = 0;
  std::vector<std::string> ids;  // training-set ids in input order
  std::vector<int> fold_of;      // parallel to ids
  std::uint64_t seed = 0;
  StrataKey strata_key = StrataKey::Hate;

  std::vector<std::string> members(int fold) const;
};

struct IndexSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Index-level primitives behind stratified_split / make_folds; `classes`
// holds one class index per item.
IndexSplit stratified_split_indices(std::span<const int> classes, double ratio, std::uint64_t seed);
std::vector<int> stratified_fold_assignment(std::span<const int> classes, int k, std::uint64_t seed);

// Stratified train/test partition. Per-class train counts use largest-remainder
// apportionment; equal remainders and member selection follow a seeded shuffle.
// Augmented items go to train unless include_augmented_in_test is set.
SplitPlan stratified_split(std::span<const LabeledComment> labeled, double ratio, StrataKey key,
                           std::uint64_t seed, bool include_augmented_in_test = false);

FoldPlan make_folds(std::span<const LabeledComment> train, int k, StrataKey key, std::uint64_t seed);

nlohmann::json to_json(const SplitPlan& plan);
nlohmann::json to_json(const FoldPlan& plan);

// Items of `all` whose ids appear in `ids`, in the order of `all`.
std::vector<LabeledComment> select_ids(std::span<const LabeledComment> all,
                                       std::span<const std::string> ids);

}  // namespace hatescan
