#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hatescan/augment.hpp"
#include "hatescan/csv.hpp"
#include "hatescan/error.hpp"
#include "hatescan/eval.hpp"
#include "hatescan/fieldscan.hpp"
#include "hatescan/hashing.hpp"
#include "hatescan/model_io.hpp"
#include "hatescan/pipeline.hpp"
#include "hatescan/random.hpp"
#include "run_config.hpp"

namespace hatescan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  bool tune = false;
  std::string task = "hate";
  std::string algo = "lr";
  std::string model;
  std::string hate_model;
  std::string sentiment_model;
  std::string kind;
  std::string corpus = "comments";
};

struct Context {
  RunConfig cfg;
  std::ostream& out;
  std::ostream& err;
};

fs::path make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

// CSV and JSONL outputs cannot carry metadata inline, so every command
// records format version, seed and file digests next to its outputs.
void write_manifest(const fs::path& dir, std::string_view command, std::uint64_t seed,
                    const std::vector<fs::path>& files) {
  json entries = json::array();
  for (const auto& f : files) {
    entries.push_back({{"file", f.filename().string()}, {"sha256", sha256_hex(read_all(f))}});
  }
  write_json(dir / "manifest.json",
             {{"format_version", kReportFormatVersion}, {"command", command}, {"seed", seed}, {"files", entries}});
}

Task task_flag(const std::string& s) {
  auto t = parse_task(s);
  if (!t) throw ConfigError("unknown task \"" + s + "\" (expected hate or sentiment)");
  return *t;
}

Algo algo_flag(const std::string& s) {
  auto a = parse_algo(s);
  if (!a) throw ConfigError("unknown algo \"" + s + "\" (expected lr or svm)");
  return *a;
}

// Annotated corpus joined with labels, followed by any augmented files.
std::vector<LabeledComment> load_labeled(const RunConfig& cfg) {
  require_file(cfg.paths.comments, "comments");
  require_file(cfg.paths.labels, "labels");
  for (const auto& a : cfg.paths.augmented) require_file(a, "augmented");
  const auto corpus = load_comments(cfg.paths.comments, cfg.paths.comments_format);
  auto items = load_labels(cfg.paths.labels, corpus).items;
  std::unordered_set<std::string> ids;
  for (const auto& i : items) ids.insert(i.id());
  for (const auto& a : cfg.paths.augmented) {
    for (auto& item : load_labeled_jsonl(a)) {
      if (!ids.insert(item.id()).second) {
        throw DataError(a.string() + ": id \"" + item.id() + "\" already present in the labeled data");
      }
      items.push_back(std::move(item));
    }
  }
  return items;
}

std::vector<LabeledComment> labeled_for(const std::vector<LabeledComment>& items, Task task) {
  std::vector<LabeledComment> out;
  for (const auto& i : items) {
    if (class_of(i, strata_key(task))) out.push_back(i);
  }
  if (out.empty()) throw DataError("no items carry a " + std::string(to_string(task)) + " label");
  return out;
}

std::vector<Example> to_examples(std::span<const LabeledComment> items, Task task, const PipelineConfig& pcfg) {
  std::vector<Comment> comments;
  comments.reserve(items.size());
  for (const auto& i : items) comments.push_back(i.comment);
  auto docs = preprocess_all(comments, pcfg);
  std::vector<Example> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    out.push_back(Example{items[i].id(), std::move(docs[i]), *class_of(items[i], strata_key(task))});
  }
  return out;
}

ModelSpec model_spec(const RunConfig& cfg, Task task, Algo algo, bool tune, const PipelineConfig& pcfg) {
  ModelSpec spec;
  spec.task = task;
  spec.algo = algo;
  spec.features = cfg.features;
  spec.lr = cfg.lr;
  spec.lbfgs = cfg.lbfgs;
  spec.svm = cfg.svm;
  if (tune && algo == Algo::Svm) spec.svm_grid = cfg.svm_grid;
  spec.tune_folds = cfg.tune_folds;
  spec.seed = cfg.seed;
  spec.pipeline_fingerprint = pcfg.fingerprint();
  return spec;
}

struct Partition {
  SplitPlan plan;
  std::vector<LabeledComment> train;
  std::vector<LabeledComment> test;
};

Partition partition(const RunConfig& cfg, Task task) {
  const auto items = labeled_for(load_labeled(cfg), task);
  Partition p;
  p.plan = stratified_split(items, cfg.eval.split_ratio, strata_key(task), derive_seed(cfg.seed, "split"),
                            cfg.eval.include_augmented_in_test);
  p.train = select_ids(items, p.plan.train_ids);
  p.test = select_ids(items, p.plan.test_ids);
  return p;
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// ---- commands -------------------------------------------------------------

int cmd_prepare(Context& ctx, const Flags& flags) {
  const auto& cfg = ctx.cfg;
  const auto pcfg = load_pipeline(cfg);
  const bool field = flags.corpus == "field";
  if (!field && flags.corpus != "comments") throw ConfigError("--corpus must be comments or field");
  const auto& path = field ? cfg.paths.field_comments : cfg.paths.comments;
  require_file(path, field ? "field_comments" : "comments");
  const auto corpus = load_comments(path, field ? cfg.paths.field_comments_format : cfg.paths.comments_format);
  const auto result = clean_corpus(corpus, pcfg);

  const auto dir = make_dir(cfg.paths.output_dir / "prepare");
  const auto cleaned = dir / "cleaned.jsonl";
  const auto drops = dir / "drops.csv";
  {
    auto out = open_out(cleaned);
    write_comments_jsonl(out, result.kept);
  }
  {
    auto out = open_out(drops);
    write_csv_row(out, {"comment_id", "reason"});
    for (const auto& d : result.dropped) write_csv_row(out, {d.comment_id, to_string(d.reason)});
  }
  write_manifest(dir, "prepare", cfg.seed, {cleaned, drops});
  ctx.out << "kept " << result.kept.size() << ", dropped " << result.dropped.size() << '\n';
  return 0;
}

int cmd_stats(Context& ctx, const Flags&) {
  const auto& cfg = ctx.cfg;
  const auto items = load_labeled(cfg);
  std::vector<LabeledComment> scraped;
  std::array<std::size_t, 3> by_origin{};
  for (const auto& i : items) {
    ++by_origin[static_cast<int>(i.origin)];
    if (i.origin == Origin::Scraped) scraped.push_back(i);
  }
  const auto summary = summarize(scraped);
  json augmentation = json::object();
  for (auto o : {Origin::Scraped, Origin::BackTranslated, Origin::Generated}) {
    augmentation[std::string(to_string(o))] = by_origin[static_cast<int>(o)];
  }
  const auto dir = make_dir(cfg.paths.output_dir / "stats");
  write_json(dir / "stats.json", {{"format_version", kReportFormatVersion},
                                  {"seed", cfg.seed},
                                  {"labeled", to_json(summary)},
                                  {"by_origin", augmentation}});
  write_manifest(dir, "stats", cfg.seed, {dir / "stats.json"});

  auto& o = ctx.out;
  o << "labeled comments: " << summary.total << '\n';
  for (auto h : {HateLabel::Hate, HateLabel::NoHate}) {
    o << "  " << std::left << std::setw(10) << to_string(h) << summary.hate[static_cast<int>(h)] << " ("
      << fmt(summary.hate_percent(h), 2) << "%)\n";
  }
  for (auto s : kSentimentOrder) {
    o << "  " << std::left << std::setw(10) << to_string(s) << summary.sentiment[static_cast<int>(s)] << " ("
      << fmt(summary.sentiment_percent(s), 2) << "%)\n";
  }
  for (auto s : {Source::Public, Source::Private}) {
    o << "  " << std::left << std::setw(10) << to_string(s) << summary.source[static_cast<int>(s)] << " ("
      << fmt(summary.source_percent(s), 2) << "%)\n";
  }
  o << "augmented: back_translated " << by_origin[1] << ", generated " << by_origin[2] << '\n';
  return 0;
}

int cmd_train(Context& ctx, const Flags& flags) {
  const auto& cfg = ctx.cfg;
  const Task task = task_flag(flags.task);
  const Algo algo = algo_flag(flags.algo);
  const auto pcfg = load_pipeline(cfg);
  const auto part = partition(cfg, task);
  const auto train = to_examples(part.train, task, pcfg);
  const auto model = fit_model(train, model_spec(cfg, task, algo, flags.tune, pcfg));

  const auto dir = make_dir(cfg.paths.output_dir / ("train_" + std::string(to_string(task)) + "_" +
                                                    std::string(to_string(algo))));
  save_model(model, dir / "model.json");
  write_json(dir / "split.json", to_json(part.plan));
  write_manifest(dir, "train", cfg.seed, {dir / "model.json", dir / "split.json"});

  ctx.out << "model: " << (dir / "model.json").string() << '\n';
  ctx.out << "converged: " << (model.converged() ? "yes" : "no") << " after " << model.iterations()
          << " iterations\n";
  if (!model.converged()) ctx.err << "warning: training stopped at the iteration limit before converging\n";
  if (model.tuning) {
    for (const auto& row : model.tuning->table) {
      ctx.out << "  c=" << row.c << " macro_f1=" << fmt(row.mean_macro_f1) << " +/- " << fmt(row.std_macro_f1)
              << '\n';
    }
    ctx.out << "selected c=" << model.tuning->best_c << '\n';
  }
  ctx.out << "training accuracy: " << fmt(accuracy_on(model, train)) << '\n';
  return 0;
}

int cmd_evaluate(Context& ctx, const Flags& flags) {
  const auto& cfg = ctx.cfg;
  if (flags.model.empty()) throw ConfigError("evaluate needs --model");
  require_file(flags.model, "model");
  const auto model = load_model(flags.model);
  const auto pcfg = load_pipeline(cfg);
  if (model.pipeline_fingerprint != pcfg.fingerprint()) {
    throw DataError("model was trained with a different preprocessing pipeline (fingerprint " +
                    model.pipeline_fingerprint + ", current " + pcfg.fingerprint() + ")");
  }
  const auto part = partition(cfg, model.task);
  const auto train = to_examples(part.train, model.task, pcfg);
  const auto fp = train_fingerprint(train, cfg.seed);
  if (fp != model.train_fingerprint) {
    throw DataError("training fingerprint mismatch: the model was not trained on this split (model " +
                    model.train_fingerprint + ", recomputed " + fp + ")");
  }
  const auto test = to_examples(part.test, model.task, pcfg);
  const double threshold = flags.threshold.value_or(0.5);
  auto report = evaluate_model(model, test, threshold);
  report.training_accuracy = accuracy_on(model, train, threshold);

  std::optional<CvReport> cv;
  if (cfg.eval.cross_validate) {
    auto spec = model_spec(cfg, model.task, model.algo, false, pcfg);
    spec.svm.c = model.config.at("svm").at("c").get<double>();
    const auto plan = make_folds(part.train, cfg.eval.k, strata_key(model.task), derive_seed(cfg.seed, "folds"));
    cv = cross_validate(train, spec, plan);
  }

  const auto dir = make_dir(cfg.paths.output_dir / ("eval_" + std::string(to_string(model.task)) + "_" +
                                                    std::string(to_string(model.algo))));
  write_json(dir / "eval.json", {{"format_version", kReportFormatVersion},
                                 {"seed", cfg.seed},
                                 {"task", to_string(model.task)},
                                 {"algo", to_string(model.algo)},
                                 {"config_fingerprint", model.config_fingerprint},
                                 {"threshold", threshold},
                                 {"train_size", train.size()},
                                 {"test_size", test.size()},
                                 {"test", to_json(report)},
                                 {"cv", cv ? to_json(*cv) : json(nullptr)}});
  {
    auto out = open_out(dir / "cv.csv");
    if (cv) {
      write_csv(out, *cv);
    } else {
      write_csv_header(out);
    }
  }
  write_manifest(dir, "evaluate", cfg.seed, {dir / "eval.json", dir / "cv.csv"});

  auto& o = ctx.out;
  o << "test accuracy: " << fmt(report.metrics.accuracy) << "  macro-F1: " << fmt(report.metrics.macro_f1) << '\n';
  for (std::size_t c = 0; c < report.metrics.per_class.size(); ++c) {
    const auto& m = report.metrics.per_class[c];
    o << "  " << std::left << std::setw(10) << report.confusion.class_order()[c] << " P=" << fmt(m.precision)
      << " R=" << fmt(m.recall) << " F1=" << fmt(m.f1) << " n=" << m.support << '\n';
  }
  for (const auto& [name, value] : report.auroc) {
    o << "  AUROC " << name << ": " << (value ? fmt(*value) : std::string("undefined")) << '\n';
  }
  o << "training accuracy: " << fmt(*report.training_accuracy) << '\n';
  if (cv) {
    o << cfg.eval.k << "-fold CV accuracy: " << fmt(cv->accuracy.mean) << " +/- " << fmt(cv->accuracy.std)
      << "  macro-F1: " << fmt(cv->macro_f1.mean) << " +/- " << fmt(cv->macro_f1.std) << '\n';
  }
  return 0;
}

int cmd_field(Context& ctx, const Flags& flags) {
  const auto& cfg = ctx.cfg;
  const fs::path hate_path = flags.hate_model.empty() ? cfg.field.hate_model : fs::path(flags.hate_model);
  const fs::path sent_path = flags.sentiment_model.empty() ? cfg.field.sentiment_model : fs::path(flags.sentiment_model);
  require_file(hate_path, "hate model");
  require_file(sent_path, "sentiment model");
  require_file(cfg.paths.field_comments, "field_comments");
  const auto pcfg = load_pipeline(cfg);
  const auto hate_model = load_model(hate_path);
  const auto sentiment_model = load_model(sent_path);
  const auto corpus = load_comments(cfg.paths.field_comments, cfg.paths.field_comments_format);

  ApplyOptions opts;
  opts.threshold = flags.threshold.value_or(cfg.field.threshold);
  const auto applied = apply_models(corpus, hate_model, sentiment_model, pcfg, opts);
  const auto breakdown = aggregate_by_source(applied.predictions);
  const auto series = aggregate_weekly(applied.predictions, cfg.field.range_start, cfg.field.range_end);
  const auto terms = term_frequencies(corpus, pcfg, cfg.field.top_n);

  const auto dir = make_dir(cfg.paths.output_dir / "field");
  const auto files = emit_reports(breakdown, series, terms, dir, cfg.seed);
  {
    auto out = open_out(dir / "drops.csv");
    write_csv_row(out, {"comment_id", "reason"});
    for (const auto& d : applied.dropped) write_csv_row(out, {d.comment_id, to_string(d.reason)});
  }
  {
    auto out = open_out(dir / "predictions.csv");
    write_csv_row(out, {"comment_id", "source", "published_at", "hate_prob", "hate_label", "sentiment_label",
                        "neutral_score", "israel_score", "palestine_score"});
    auto num = [](double v) { return json(v).dump(); };
    for (const auto& p : applied.predictions) {
      write_csv_row(out, {p.comment_id, p.source ? to_string(*p.source) : "",
                          p.published_at ? p.published_at->iso() : "", num(p.hate_prob), to_string(p.hate_label),
                          to_string(p.sentiment_label), num(p.sentiment_scores[0]), num(p.sentiment_scores[1]),
                          num(p.sentiment_scores[2])});
    }
  }
  write_manifest(dir, "field", cfg.seed,
                 {files.source_breakdown, files.weekly_series, files.term_freq, dir / "drops.csv",
                  dir / "predictions.csv"});

  for (const auto& n : breakdown.notices) ctx.err << "notice: " << n << '\n';
  if (series.out_of_range > 0) {
    ctx.err << series.out_of_range << " predictions dated outside " << series.range_start.iso() << ".."
            << series.range_end.iso() << " were excluded from the weekly series\n";
  }
  if (series.undated > 0) ctx.err << series.undated << " predictions without a date were excluded\n";
  ctx.out << "scored " << applied.predictions.size() << " comments, dropped " << applied.dropped.size() << '\n';
  for (const auto& [src, s] : breakdown.per_source) {
    ctx.out << "  " << std::left << std::setw(8) << to_string(src) << " n=" << s.n
            << " hate=" << fmt(100.0 * s.hate_rate, 1) << "% no_hate=" << fmt(100.0 * s.no_hate_rate, 1)
            << "% neutral/israel/palestine=" << fmt(100.0 * s.sentiment_shares[0], 1) << "/"
            << fmt(100.0 * s.sentiment_shares[1], 1) << "/" << fmt(100.0 * s.sentiment_shares[2], 1) << '\n';
  }
  return 0;
}

int cmd_augment(Context& ctx, const Flags& flags) {
  const auto& cfg = ctx.cfg;
  const auto& acfg = cfg.augment;
  if (flags.kind != "backtranslate" && flags.kind != "generate") {
    throw ConfigError("--kind must be backtranslate or generate");
  }
  const bool backtranslate = flags.kind == "backtranslate";

  // Credentials are checked before any input is read.
  std::optional<LiveClientConfig> live;
  if (acfg.mode == ClientMode::Live) {
    live = backtranslate ? translation_config_from_env() : generation_config_from_env();
    live->max_in_flight = acfg.max_in_flight;
  }
  ReplayStore store;
  if (acfg.mode == ClientMode::Replay) {
    require_file(cfg.paths.replay_store, "replay_store");
    store = ReplayStore::load(cfg.paths.replay_store);
  } else if (acfg.record && !cfg.paths.replay_store.empty() && fs::exists(cfg.paths.replay_store)) {
    store = ReplayStore::load(cfg.paths.replay_store);
  }
  ReplayStore* recorder = acfg.mode == ClientMode::Live && acfg.record ? &store : nullptr;
  if (recorder && cfg.paths.replay_store.empty()) throw ConfigError("augment.record needs paths.replay_store");

  std::vector<LabeledComment> items;
  if (backtranslate) {
    require_file(cfg.paths.hate_suite, "hate_suite");
    const auto suite = load_hate_suite(cfg.paths.hate_suite);
    std::unique_ptr<TranslationClient> client;
    if (live) {
      client = std::make_unique<LiveTranslationClient>(*live, make_http_transport(), recorder);
    } else {
      client = std::make_unique<ReplayTranslationClient>(store);
    }
    items = back_translate_corpus(suite, acfg.backtranslate, *client);
  } else {
    if (acfg.generate.empty()) throw ConfigError("config: augment.generate.specs is empty");
    const auto pcfg = load_pipeline(cfg);
    std::unique_ptr<GenerationClient> client;
    if (live) {
      client = std::make_unique<LiveGenerationClient>(*live, make_http_transport(), recorder);
    } else {
      client = std::make_unique<ReplayGenerationClient>(store);
    }
    for (const auto& spec : acfg.generate) {
      auto batch = generate_labeled(spec, *client, pcfg);
      items.insert(items.end(), std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
    }
  }
  if (recorder) store.save(cfg.paths.replay_store);

  const auto dir = make_dir(cfg.paths.output_dir / ("augment_" + flags.kind));
  {
    auto out = open_out(dir / "augmented.jsonl");
    write_labeled_jsonl(out, items);
  }
  write_manifest(dir, "augment", cfg.seed, {dir / "augmented.jsonl"});
  ctx.out << "wrote " << items.size() << " " << (backtranslate ? "back-translated" : "generated") << " items to "
          << (dir / "augmented.jsonl").string() << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"German YouTube comment hate-speech and sentiment toolkit", "hatescan"};
  app.require_subcommand(1);
  Flags flags;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  auto* config_opt = app.add_option("-c,--config", flags.config, "Run configuration (JSON)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Override the run seed");
  (void)config_opt;

  auto* prepare = app.add_subcommand("prepare", "Clean a corpus and report dropped comments");
  prepare->add_option("--corpus", flags.corpus, "comments or field")->capture_default_str();
  auto* stats = app.add_subcommand("stats", "Label distribution of the annotated corpus");
  auto* train = app.add_subcommand("train", "Train a model on the training split");
  train->add_option("--task", flags.task, "hate or sentiment")->capture_default_str();
  train->add_option("--algo", flags.algo, "lr or svm")->capture_default_str();
  train->add_flag("--tune", flags.tune, "Sweep the SVM c grid by cross-validation");
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a model on the held-out split and by k-fold CV");
  evaluate->add_option("--model", flags.model, "Model artifact")->required();
  auto* eval_threshold = evaluate->add_option("--threshold", threshold, "Hate probability threshold");
  auto* field = app.add_subcommand("field", "Apply models to the field corpus and aggregate");
  field->add_option("--hate-model", flags.hate_model, "Hate model artifact (LR)");
  field->add_option("--sentiment-model", flags.sentiment_model, "Sentiment model artifact");
  auto* field_threshold = field->add_option("--threshold", threshold, "Hate probability threshold");
  auto* augment = app.add_subcommand("augment", "Produce augmented training data");
  augment->add_option("--kind", flags.kind, "backtranslate or generate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (*seed_opt) flags.seed = seed;
  if (*eval_threshold || *field_threshold) flags.threshold = threshold;

  try {
    Context ctx{load_run_config(flags.config), out, err};
    if (flags.seed) ctx.cfg.seed = *flags.seed;
    if (flags.threshold && !(*flags.threshold >= 0.0 && *flags.threshold <= 1.0)) {
      throw ParameterError("--threshold must lie in [0, 1]");
    }
    if (*prepare) return cmd_prepare(ctx, flags);
    if (*stats) return cmd_stats(ctx, flags);
    if (*train) return cmd_train(ctx, flags);
    if (*evaluate) return cmd_evaluate(ctx, flags);
    if (*field) return cmd_field(ctx, flags);
    if (*augment) return cmd_augment(ctx, flags);
    return 2;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace hatescan::cli
