#include "hatescan/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "hatescan/csv.hpp"
#include "hatescan/error.hpp"
#include "hatescan/random.hpp"

namespace hatescan {

using nlohmann::json;

std::string_view to_string(Source s) { return s == Source::Public ? "public" : "private"; }
std::string_view to_string(HateLabel h) { return h == HateLabel::Hate ? "hate" : "no_hate"; }

std::string_view to_string(SentimentLabel s) {
  switch (s) {
    case SentimentLabel::Neutral: return "neutral";
    case SentimentLabel::ProIsrael: return "israel";
    case SentimentLabel::ProPalestine: return "palestine";
  }
  return "neutral";
}

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::Scraped: return "scraped";
    case Origin::BackTranslated: return "back_translated";
    case Origin::Generated: return "generated";
  }
  return "scraped";
}

std::string_view to_string(StrataKey k) { return k == StrataKey::Hate ? "hate" : "sentiment"; }

std::optional<Source> parse_source(std::string_view text) {
  if (text == "public") return Source::Public;
  if (text == "private") return Source::Private;
  return std::nullopt;
}

std::optional<SentimentLabel> parse_sentiment(std::string_view text) {
  if (text == "neutral") return SentimentLabel::Neutral;
  if (text == "israel" || text == "pro_israel") return SentimentLabel::ProIsrael;
  if (text == "palestine" || text == "pro_palestine") return SentimentLabel::ProPalestine;
  return std::nullopt;
}

std::optional<Origin> parse_origin(std::string_view text) {
  if (text == "scraped") return Origin::Scraped;
  if (text == "back_translated") return Origin::BackTranslated;
  if (text == "generated") return Origin::Generated;
  return std::nullopt;
}

std::optional<int> class_of(const LabeledComment& item, StrataKey key) {
  if (key == StrataKey::Hate) {
    if (!item.hate) return std::nullopt;
    return static_cast<int>(*item.hate);
  }
  if (!item.sentiment) return std::nullopt;
  return static_cast<int>(*item.sentiment);
}

int num_classes(StrataKey key) { return key == StrataKey::Hate ? 2 : 3; }

namespace {

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Tracks id uniqueness across a file.
class IdRegistry {
 public:
  void add(const std::string& id, std::size_t line) {
    auto [it, inserted] = first_line_.emplace(id, line);
    if (!inserted) {
      throw DataError(at_line(line) + "duplicate comment id \"" + id + "\" (first seen on line " +
                      std::to_string(it->second) + ")");
    }
  }

 private:
  std::unordered_map<std::string, std::size_t> first_line_;
};

Comment make_comment(std::string id, std::string video_id, std::string_view source,
                     std::string_view date, std::string raw_text, std::size_t line) {
  if (id.empty()) throw DataError(at_line(line) + "empty comment id");
  auto src = parse_source(source);
  if (!src) {
    throw DataError(at_line(line) + "invalid source \"" + std::string(source) +
                    "\" (expected \"public\" or \"private\")");
  }
  auto when = Date::parse(date);
  if (!when) {
    throw DataError(at_line(line) + "malformed published_at \"" + std::string(date) +
                    "\" (expected YYYY-MM-DD)");
  }
  return Comment{std::move(id), std::move(video_id), src, when, std::move(raw_text)};
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw DataError(at_line(line) + "missing or non-string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(at_line(line) + "field \"" + key + "\" must be a string");
  return it->get<std::string>();
}

json parse_json_line(const std::string& text, std::size_t line) {
  try {
    json obj = json::parse(text);
    if (!obj.is_object()) throw DataError(at_line(line) + "expected a JSON object");
    return obj;
  } catch (const json::parse_error& e) {
    throw DataError(at_line(line) + "invalid JSON: " + e.what());
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<Comment> read_comments_jsonl(std::istream& in) {
  std::vector<Comment> out;
  IdRegistry ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    const json obj = parse_json_line(text, line);
    Comment c = make_comment(require_string(obj, "id", line), require_string(obj, "video_id", line),
                             require_string(obj, "source", line),
                             require_string(obj, "published_at", line),
                             require_string(obj, "raw_text", line), line);
    ids.add(c.id, line);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Comment> read_comments_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) return {};
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < row.size(); ++i) col[std::string(trim(row[i]))] = i;
  for (const char* key : {"id", "video_id", "source", "published_at", "raw_text"}) {
    if (!col.count(key)) throw DataError(std::string("comment csv: missing column \"") + key + "\"");
  }
  std::vector<Comment> out;
  IdRegistry ids;
  while (reader.next(row)) {
    const std::size_t line = reader.record_line();
    if (row.size() == 1 && trim(row[0]).empty()) continue;
    if (row.size() != col.size()) {
      throw DataError(at_line(line) + "expected " + std::to_string(col.size()) + " fields, got " +
                      std::to_string(row.size()));
    }
    Comment c = make_comment(row[col["id"]], row[col["video_id"]], trim(row[col["source"]]),
                             trim(row[col["published_at"]]), row[col["raw_text"]], line);
    ids.add(c.id, line);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Comment> load_comments(const std::filesystem::path& path, CommentFormat format) {
  auto in = open_input(path);
  try {
    return format == CommentFormat::Jsonl ? read_comments_jsonl(in) : read_comments_csv(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

namespace {

json comment_fields(const Comment& c) {
  json obj;
  obj["id"] = c.id;
  obj["video_id"] = c.video_id;
  obj["source"] = c.source ? json(to_string(*c.source)) : json(nullptr);
  obj["published_at"] = c.published_at ? json(c.published_at->iso()) : json(nullptr);
  obj["raw_text"] = c.raw_text;
  return obj;
}

}  // namespace

void write_comments_jsonl(std::ostream& out, std::span<const Comment> comments) {
  for (const auto& c : comments) out << comment_fields(c).dump() << '\n';
}

double LabelSummary::hate_percent(HateLabel h) const {
  const auto n = hate_annotated();
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(hate[static_cast<int>(h)]) / static_cast<double>(n);
}

double LabelSummary::sentiment_percent(SentimentLabel s) const {
  const auto n = sentiment_annotated();
  return n == 0 ? 0.0
                : 100.0 * static_cast<double>(sentiment[static_cast<int>(s)]) / static_cast<double>(n);
}

double LabelSummary::source_percent(Source s) const {
  const auto n = source[0] + source[1];
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(source[static_cast<int>(s)]) / static_cast<double>(n);
}

LabelSummary summarize(std::span<const LabeledComment> items) {
  LabelSummary s;
  s.total = items.size();
  for (const auto& item : items) {
    if (item.hate) ++s.hate[static_cast<int>(*item.hate)];
    if (item.sentiment) ++s.sentiment[static_cast<int>(*item.sentiment)];
    if (item.comment.source) ++s.source[static_cast<int>(*item.comment.source)];
  }
  return s;
}

json to_json(const LabelSummary& s) {
  json j;
  j["total"] = s.total;
  for (auto h : {HateLabel::Hate, HateLabel::NoHate}) {
    j["hate"][std::string(to_string(h))] = {{"count", s.hate[static_cast<int>(h)]},
                                            {"percent", s.hate_percent(h)}};
  }
  for (auto c : kSentimentOrder) {
    j["sentiment"][std::string(to_string(c))] = {{"count", s.sentiment[static_cast<int>(c)]},
                                                 {"percent", s.sentiment_percent(c)}};
  }
  for (auto src : {Source::Public, Source::Private}) {
    j["source"][std::string(to_string(src))] = {{"count", s.source[static_cast<int>(src)]},
                                                {"percent", s.source_percent(src)}};
  }
  return j;
}

LabeledSet read_labels(std::istream& in, std::span<const Comment> corpus) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) throw DataError("label file is empty");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < row.size(); ++i) col[std::string(trim(row[i]))] = i;
  for (const char* key : {"id", "hate", "sentiment"}) {
    if (!col.count(key)) throw DataError(std::string("label file: missing column \"") + key + "\"");
  }

  struct Row {
    std::optional<HateLabel> hate;
    std::optional<SentimentLabel> sentiment;
  };
  std::unordered_map<std::string, Row> labels;
  std::unordered_set<std::string> corpus_ids;
  for (const auto& c : corpus) corpus_ids.insert(c.id);
  std::vector<std::string> orphans;

  while (reader.next(row)) {
    const std::size_t line = reader.record_line();
    if (row.size() == 1 && trim(row[0]).empty()) continue;
    if (row.size() != col.size()) {
      throw DataError(at_line(line) + "expected " + std::to_string(col.size()) + " fields");
    }
    const std::string id(trim(row[col["id"]]));
    const auto hate_text = trim(row[col["hate"]]);
    const auto sent_text = trim(row[col["sentiment"]]);
    Row r;
    if (hate_text == "1") {
      r.hate = HateLabel::Hate;
    } else if (hate_text == "0") {
      r.hate = HateLabel::NoHate;
    } else if (!hate_text.empty()) {
      throw DataError(at_line(line) + "invalid hate value \"" + std::string(hate_text) +
                      "\" (expected 0, 1 or empty)");
    }
    if (!sent_text.empty()) {
      r.sentiment = parse_sentiment(sent_text);
      if (!r.sentiment) {
        throw DataError(at_line(line) + "invalid sentiment \"" + std::string(sent_text) +
                        "\" (expected neutral, israel, palestine or empty)");
      }
    }
    if (!r.hate && !r.sentiment) {
      throw DataError(at_line(line) + "label row for \"" + id + "\" has neither hate nor sentiment");
    }
    if (!corpus_ids.count(id)) {
      orphans.push_back(id);
      continue;
    }
    if (!labels.emplace(id, r).second) {
      throw DataError(at_line(line) + "duplicate label row for \"" + id + "\"");
    }
  }
  if (!orphans.empty()) {
    std::string msg = "label ids not present in corpus (" + std::to_string(orphans.size()) + "):";
    for (const auto& id : orphans) msg += " " + id;
    throw DataError(msg);
  }

  LabeledSet out;
  for (const auto& c : corpus) {
    auto it = labels.find(c.id);
    if (it == labels.end()) continue;
    out.items.push_back(LabeledComment{c, it->second.hate, it->second.sentiment, Origin::Scraped});
  }
  out.summary = summarize(out.items);
  return out;
}

LabeledSet load_labels(const std::filesystem::path& path, std::span<const Comment> corpus) {
  auto in = open_input(path);
  try {
    return read_labels(in, corpus);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_labeled_jsonl(std::ostream& out, std::span<const LabeledComment> items) {
  for (const auto& item : items) {
    json obj = comment_fields(item.comment);
    obj["hate"] = item.hate ? json(static_cast<int>(*item.hate)) : json(nullptr);
    obj["sentiment"] = item.sentiment ? json(to_string(*item.sentiment)) : json(nullptr);
    obj["origin"] = to_string(item.origin);
    out << obj.dump() << '\n';
  }
}

std::vector<LabeledComment> read_labeled_jsonl(std::istream& in) {
  std::vector<LabeledComment> out;
  IdRegistry ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    const json obj = parse_json_line(text, line);
    LabeledComment item;
    const auto origin_text = optional_string(obj, "origin", line).value_or("scraped");
    const auto origin = parse_origin(origin_text);
    if (!origin) throw DataError(at_line(line) + "invalid origin \"" + origin_text + "\"");
    item.origin = *origin;

    Comment& c = item.comment;
    c.id = require_string(obj, "id", line);
    c.video_id = optional_string(obj, "video_id", line).value_or("");
    c.raw_text = require_string(obj, "raw_text", line);
    if (auto s = optional_string(obj, "source", line)) {
      c.source = parse_source(*s);
      if (!c.source) throw DataError(at_line(line) + "invalid source \"" + *s + "\"");
    }
    if (auto d = optional_string(obj, "published_at", line)) {
      c.published_at = Date::parse(*d);
      if (!c.published_at) throw DataError(at_line(line) + "malformed published_at \"" + *d + "\"");
    }
    if (item.origin == Origin::Scraped && (c.video_id.empty() || !c.published_at)) {
      throw DataError(at_line(line) + "scraped item \"" + c.id +
                      "\" requires video_id and published_at");
    }

    if (auto it = obj.find("hate"); it != obj.end() && !it->is_null()) {
      if (!it->is_number_integer() || (it->get<int>() != 0 && it->get<int>() != 1)) {
        throw DataError(at_line(line) + "hate must be 0, 1 or null");
      }
      item.hate = it->get<int>() == 1 ? HateLabel::Hate : HateLabel::NoHate;
    }
    if (auto s = optional_string(obj, "sentiment", line)) {
      item.sentiment = parse_sentiment(*s);
      if (!item.sentiment) throw DataError(at_line(line) + "invalid sentiment \"" + *s + "\"");
    }
    if (!item.hate && !item.sentiment) {
      throw DataError(at_line(line) + "item \"" + c.id + "\" carries no label");
    }
    ids.add(c.id, line);
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<LabeledComment> load_labeled_jsonl(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return read_labeled_jsonl(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

namespace {

std::map<int, std::vector<std::size_t>> group_by_class(std::span<const int> classes) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < classes.size(); ++i) groups[classes[i]].push_back(i);
  return groups;
}

void require_two_per_class(const std::map<int, std::vector<std::size_t>>& groups) {
  for (const auto& [cls, members] : groups) {
    if (members.size() < 2) {
      throw StratificationError("class " + std::to_string(cls) + " has " +
                                std::to_string(members.size()) +
                                " member(s); stratification needs at least 2");
    }
  }
}

}  // namespace

IndexSplit stratified_split_indices(std::span<const int> classes, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ParameterError("split ratio must lie strictly between 0 and 1, got " + std::to_string(ratio));
  }
  auto groups = group_by_class(classes);
  require_two_per_class(groups);
  const auto n = static_cast<long long>(classes.size());
  if (n < 2) throw StratificationError("need at least 2 items to split");
  const long long target = std::clamp<long long>(std::llround(ratio * static_cast<double>(n)), 1, n - 1);

  struct Quota {
    std::vector<std::size_t>* members;
    long long take;
    long long remainder;  // numerator over n, compared exactly
    std::size_t tie_rank;
  };
  Rng rng(seed);
  std::vector<std::size_t> tie_order(groups.size());
  std::iota(tie_order.begin(), tie_order.end(), std::size_t{0});
  rng.shuffle(std::span(tie_order));

  std::vector<Quota> quotas;
  long long assigned = 0;
  std::size_t g = 0;
  for (auto& [cls, members] : groups) {
    const long long scaled = static_cast<long long>(members.size()) * target;
    quotas.push_back({&members, scaled / n, scaled % n, tie_order[g++]});
    assigned += scaled / n;
  }
  std::vector<Quota*> by_remainder;
  for (auto& q : quotas) by_remainder.push_back(&q);
  std::sort(by_remainder.begin(), by_remainder.end(), [](const Quota* a, const Quota* b) {
    if (a->remainder != b->remainder) return a->remainder > b->remainder;
    return a->tie_rank < b->tie_rank;
  });
  for (long long slack = target - assigned, i = 0; slack > 0; --slack, ++i) {
    ++by_remainder[static_cast<std::size_t>(i)]->take;
  }

  IndexSplit split;
  for (auto& q : quotas) {
    rng.shuffle(std::span(*q.members));
    for (std::size_t i = 0; i < q.members->size(); ++i) {
      (static_cast<long long>(i) < q.take ? split.train : split.test).push_back((*q.members)[i]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<int> stratified_fold_assignment(std::span<const int> classes, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > classes.size()) {
    throw ParameterError("fold count k=" + std::to_string(k) + " must satisfy 2 <= k <= " +
                         std::to_string(classes.size()));
  }
  auto groups = group_by_class(classes);
  require_two_per_class(groups);
  Rng rng(seed);
  std::vector<int> fold(classes.size(), -1);
  std::size_t position = 0;
  // Dealing the concatenated, per-class shuffled members round-robin keeps
  // fold sizes and per-class fold counts within one of each other.
  for (auto& [cls, members] : groups) {
    rng.shuffle(std::span(members));
    for (auto idx : members) fold[idx] = static_cast<int>(position++ % static_cast<std::size_t>(k));
  }
  return fold;
}

namespace {

std::vector<int> classes_for(std::span<const LabeledComment> items, StrataKey key) {
  std::vector<int> classes;
  classes.reserve(items.size());
  for (const auto& item : items) {
    auto c = class_of(item, key);
    if (!c) {
      throw DataError("item \"" + item.id() + "\" has no " + std::string(to_string(key)) + " label");
    }
    classes.push_back(*c);
  }
  return classes;
}

}  // namespace

SplitPlan stratified_split(std::span<const LabeledComment> labeled, double ratio, StrataKey key,
                           std::uint64_t seed, bool include_augmented_in_test) {
  std::vector<std::size_t> pool;
  std::vector<std::size_t> always_train;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    if (include_augmented_in_test || labeled[i].origin == Origin::Scraped) {
      pool.push_back(i);
    } else {
      always_train.push_back(i);
    }
  }
  std::vector<LabeledComment> pool_items;
  pool_items.reserve(pool.size());
  for (auto i : pool) pool_items.push_back(labeled[i]);
  const auto classes = classes_for(pool_items, key);
  classes_for(labeled, key);  // every member must carry the stratum label

  const auto split = stratified_split_indices(classes, ratio, seed);
  std::vector<bool> in_train(labeled.size(), false);
  for (auto i : split.train) in_train[pool[i]] = true;
  for (auto i : always_train) in_train[i] = true;

  SplitPlan plan;
  plan.ratio = ratio;
  plan.seed = seed;
  plan.strata_key = key;
  plan.include_augmented_in_test = include_augmented_in_test;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    (in_train[i] ? plan.train_ids : plan.test_ids).push_back(labeled[i].id());
  }
  return plan;
}

FoldPlan make_folds(std::span<const LabeledComment> train, int k, StrataKey key, std::uint64_t seed) {
  const auto classes = classes_for(train, key);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.strata_key = key;
  plan.fold_of = stratified_fold_assignment(classes, k, seed);
  for (const auto& item : train) plan.ids.push_back(item.id());
  return plan;
}

std::vector<std::string> FoldPlan::members(int fold) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(ids[i]);
  }
  return out;
}

json to_json(const SplitPlan& plan) {
  return json{{"format_version", 1},
              {"ratio", plan.ratio},
              {"seed", plan.seed},
              {"strata_key", to_string(plan.strata_key)},
              {"include_augmented_in_test", plan.include_augmented_in_test},
              {"train_ids", plan.train_ids},
              {"test_ids", plan.test_ids}};
}

json to_json(const FoldPlan& plan) {
  json folds = json::array();
  for (int f = 0; f < plan.k; ++f) folds.push_back(plan.members(f));
  return json{{"format_version", 1},
              {"k", plan.k},
              {"seed", plan.seed},
              {"strata_key", to_string(plan.strata_key)},
              {"folds", folds}};
}

std::vector<LabeledComment> select_ids(std::span<const LabeledComment> all,
                                       std::span<const std::string> ids) {
  const std::unordered_set<std::string> wanted(ids.begin(), ids.end());
  std::vector<LabeledComment> out;
  for (const auto& item : all) {
    if (wanted.count(item.id())) out.push_back(item);
  }
  return out;
}

}  // namespace hatescan
