#include "hatescan/fieldscan.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "hatescan/csv.hpp"
#include "hatescan/error.hpp"

namespace hatescan {

using nlohmann::json;

namespace {

void check_model(const TrainedModel& model, Task task, const std::string& pipeline,
                 const std::optional<std::string>& vocabulary, const char* what) {
  if (model.task != task) throw ConfigError(std::string(what) + " model was trained for a different task");
  if (model.pipeline_fingerprint != pipeline) {
    throw ConfigError(std::string(what) + " model was trained with pipeline " + model.pipeline_fingerprint +
                      " but the current pipeline is " + pipeline);
  }
  if (vocabulary && model.vocabulary().fingerprint() != *vocabulary) {
    throw ConfigError(std::string(what) + " model vocabulary " + model.vocabulary().fingerprint() +
                      " does not match expected " + *vocabulary);
  }
}

}  // namespace

FieldPredictions apply_models(std::span<const Comment> corpus, const TrainedModel& hate_model,
                              const TrainedModel& sentiment_model, const PipelineConfig& cfg,
                              const ApplyOptions& opts) {
  const auto pipeline = cfg.fingerprint();
  check_model(hate_model, Task::Hate, pipeline, opts.hate_vocabulary, "hate");
  check_model(sentiment_model, Task::Sentiment, pipeline, opts.sentiment_vocabulary, "sentiment");
  if (hate_model.algo != Algo::Lr) throw ConfigError("field analysis needs a logistic-regression hate model");

  FieldPredictions out;
  auto cleaned = clean_corpus(corpus, cfg);
  out.dropped = std::move(cleaned.dropped);
  const auto docs = preprocess_all(cleaned.kept, cfg);
  out.predictions.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& c = cleaned.kept[i];
    Prediction p;
    p.comment_id = c.id;
    p.source = c.source;
    p.published_at = c.published_at;
    const auto xh = hate_model.featurize(docs[i]);
    p.hate_prob = predict_proba(*hate_model.binary, xh);
    p.hate_label = p.hate_prob >= opts.threshold ? HateLabel::Hate : HateLabel::NoHate;
    const auto xs = sentiment_model.featurize(docs[i]);
    p.sentiment_scores = decision_scores(*sentiment_model.ovr, xs);
    p.sentiment_label = argmax_label(p.sentiment_scores);
    out.predictions.push_back(std::move(p));
  }
  return out;
}

SourceStats tally(std::span<const Prediction* const> preds) {
  SourceStats s;
  for (const auto* p : preds) {
    ++s.n;
    if (p->hate_label == HateLabel::Hate) ++s.hate;
    ++s.sentiment[static_cast<int>(p->sentiment_label)];
  }
  if (s.n == 0) return s;
  const auto n = static_cast<double>(s.n);
  s.hate_rate = static_cast<double>(s.hate) / n;
  s.no_hate_rate = static_cast<double>(s.n - s.hate) / n;
  for (std::size_t c = 0; c < 3; ++c) s.sentiment_shares[c] = static_cast<double>(s.sentiment[c]) / n;
  return s;
}

namespace {

std::map<Source, SourceStats> by_source(const std::vector<const Prediction*>& preds) {
  std::map<Source, std::vector<const Prediction*>> groups;
  for (const auto* p : preds) {
    if (p->source) groups[*p->source].push_back(p);
  }
  std::map<Source, SourceStats> out;
  for (const auto& [src, members] : groups) out[src] = tally(members);
  return out;
}

}  // namespace

SourceBreakdown aggregate_by_source(std::span<const Prediction> preds) {
  std::vector<const Prediction*> ptrs;
  std::size_t unsourced = 0;
  for (const auto& p : preds) {
    ptrs.push_back(&p);
    if (!p.source) ++unsourced;
  }
  SourceBreakdown out;
  out.per_source = by_source(ptrs);
  for (Source s : {Source::Public, Source::Private}) {
    if (!out.per_source.count(s)) {
      out.notices.push_back("no predictions for source " + std::string(to_string(s)) + "; omitted");
    }
  }
  if (unsourced > 0) out.notices.push_back(std::to_string(unsourced) + " predictions without a source were skipped");
  return out;
}

std::vector<std::pair<Date, Date>> weekly_bucket_spans(Date range_start, Date range_end) {
  if (range_end < range_start) {
    throw ParameterError("weekly range: start " + range_start.iso() + " is after end " + range_end.iso());
  }
  const int days = range_end.days_since(range_start) + 1;
  const int count = std::max(1, days / 7);
  std::vector<std::pair<Date, Date>> spans;
  for (int b = 0; b < count; ++b) {
    const Date start = range_start.plus_days(7 * b);
    spans.emplace_back(start, b + 1 == count ? range_end : start.plus_days(6));
  }
  return spans;
}

WeeklySeries aggregate_weekly(std::span<const Prediction> preds, Date range_start, Date range_end) {
  const auto spans = weekly_bucket_spans(range_start, range_end);
  WeeklySeries out;
  out.range_start = range_start;
  out.range_end = range_end;
  std::vector<std::vector<const Prediction*>> members(spans.size());
  for (const auto& p : preds) {
    if (!p.published_at) {
      ++out.undated;
      continue;
    }
    const Date d = *p.published_at;
    if (d < range_start || d > range_end) {
      ++out.out_of_range;
      continue;
    }
    const auto b = std::min<std::size_t>(static_cast<std::size_t>(d.days_since(range_start) / 7), spans.size() - 1);
    members[b].push_back(&p);
  }
  for (std::size_t b = 0; b < spans.size(); ++b) {
    out.buckets.push_back(WeekBucket{spans[b].first, spans[b].second, by_source(members[b])});
  }
  return out;
}

TermFreqTable term_frequencies(std::span<const Comment> corpus, const PipelineConfig& cfg, std::size_t top_n) {
  if (top_n < 1) throw ParameterError("term frequency top_n must be at least 1");
  const auto cleaned = clean_corpus(corpus, cfg);
  const auto docs = preprocess_all(cleaned.kept, cfg);
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> seen(doc.tokens.begin(), doc.tokens.end());
    for (auto t : seen) ++df[std::string(t)];
  }
  TermFreqTable table;
  table.n_docs = docs.size();
  table.top_n = top_n;
  for (auto& [term, count] : df) {
    table.rows.push_back(
        TermFreq{term, static_cast<double>(count) / static_cast<double>(docs.size()), count, 0});
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const TermFreq& a, const TermFreq& b) {
    return a.doc_count != b.doc_count ? a.doc_count > b.doc_count : a.term < b.term;
  });
  if (table.rows.size() > top_n) table.rows.resize(top_n);
  for (std::size_t i = 0; i < table.rows.size(); ++i) table.rows[i].rank = i + 1;
  return table;
}

namespace {

json stats_json(const SourceStats& s) {
  json shares = json::object();
  json counts = json::object();
  for (auto label : kSentimentOrder) {
    shares[std::string(to_string(label))] = s.sentiment_shares[static_cast<int>(label)];
    counts[std::string(to_string(label))] = s.sentiment[static_cast<int>(label)];
  }
  return json{{"n", s.n},
              {"hate_count", s.hate},
              {"hate_rate", s.hate_rate},
              {"no_hate_rate", s.no_hate_rate},
              {"sentiment_counts", counts},
              {"sentiment_shares", shares}};
}

std::string num(double v) { return json(v).dump(); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

json to_json(const SourceBreakdown& breakdown, std::uint64_t seed) {
  json per_source = json::object();
  for (const auto& [src, stats] : breakdown.per_source) per_source[std::string(to_string(src))] = stats_json(stats);
  return json{{"format_version", kReportFormatVersion},
              {"seed", seed},
              {"per_source", per_source},
              {"notices", breakdown.notices}};
}

ReportFiles emit_reports(const SourceBreakdown& breakdown, const WeeklySeries& series, const TermFreqTable& freqs,
                         const std::filesystem::path& out_dir, std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  ReportFiles files{out_dir / "source_breakdown.json", out_dir / "weekly_series.csv", out_dir / "term_freq.csv"};

  {
    auto out = open_out(files.source_breakdown);
    out << to_json(breakdown, seed).dump(2) << '\n';
    finish(out, files.source_breakdown);
  }
  {
    auto out = open_out(files.weekly_series);
    write_csv_row(out, {"week_start", "week_end", "source", "n", "hate_rate", "neutral_share", "israel_share",
                        "palestine_share"});
    for (const auto& b : series.buckets) {
      for (const auto& [src, s] : b.cells) {
        write_csv_row(out, {b.start.iso(), b.end.iso(), to_string(src), std::to_string(s.n), num(s.hate_rate),
                            num(s.sentiment_shares[0]), num(s.sentiment_shares[1]), num(s.sentiment_shares[2])});
      }
    }
    finish(out, files.weekly_series);
  }
  {
    auto out = open_out(files.term_freq);
    write_csv_row(out, {"term", "doc_fraction", "rank"});
    for (const auto& r : freqs.rows) write_csv_row(out, {r.term, num(r.doc_fraction), std::to_string(r.rank)});
    finish(out, files.term_freq);
  }
  return files;
}

}  // namespace hatescan
