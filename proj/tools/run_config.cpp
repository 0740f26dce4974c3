#include "run_config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "hatescan/error.hpp"
#include "hatescan/tuning.hpp"

namespace hatescan::cli {

using nlohmann::json;

namespace {

// Wraps one JSON object section: typed getters plus a check that every key
// was consumed, so a misspelled option fails loudly.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config: \"" + name_ + "\" must be an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: " + where(key) + " has the wrong type");
    }
  }

  void path(const std::string& key, std::filesystem::path& out, const std::filesystem::path& base) {
    std::string s;
    get(key, s);
    if (!s.empty()) out = resolve(s, base);
  }

  Section child(const std::string& key) {
    used_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, name_.empty() ? key : name_ + "." + key);
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  std::string where(const std::string& key) const { return "\"" + (name_.empty() ? key : name_ + "." + key) + "\""; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError("config: unknown key " + where(k));
    }
  }

  static std::filesystem::path resolve(const std::string& s, const std::filesystem::path& base) {
    std::filesystem::path p(s);
    return p.is_absolute() ? p : base / p;
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> used_;
};

CommentFormat parse_format(const std::string& s, const std::string& where) {
  if (s == "jsonl") return CommentFormat::Jsonl;
  if (s == "csv") return CommentFormat::Csv;
  throw ConfigError("config: " + where + " must be \"jsonl\" or \"csv\"");
}

Date parse_date(const std::string& s, const std::string& where) {
  auto d = Date::parse(s);
  if (!d) throw ConfigError("config: " + where + " is not a YYYY-MM-DD date");
  return *d;
}

}  // namespace

RunConfig parse_run_config(const json& j, const std::filesystem::path& base) {
  RunConfig cfg;
  Section root(j, "");
  root.get("seed", cfg.seed);

  {
    auto s = root.child("paths");
    auto& p = cfg.paths;
    s.path("comments", p.comments, base);
    std::string fmt = "jsonl";
    s.get("comments_format", fmt);
    p.comments_format = parse_format(fmt, s.where("comments_format"));
    s.path("labels", p.labels, base);
    std::vector<std::string> augmented;
    s.get("augmented", augmented);
    for (const auto& a : augmented) p.augmented.push_back(Section::resolve(a, base));
    s.path("stopwords", p.stopwords, base);
    s.path("negations", p.negations, base);
    s.path("lemmas", p.lemmas, base);
    s.path("replay_store", p.replay_store, base);
    s.path("hate_suite", p.hate_suite, base);
    s.path("field_comments", p.field_comments, base);
    fmt = "jsonl";
    s.get("field_comments_format", fmt);
    p.field_comments_format = parse_format(fmt, s.where("field_comments_format"));
    p.output_dir = base / "out";
    s.path("output_dir", p.output_dir, base);
    s.finish();
  }
  {
    auto s = root.child("pipeline");
    s.get("stopword_hit_threshold", cfg.language_filter.stopword_hit_threshold);
    s.get("min_tokens", cfg.language_filter.min_tokens);
    s.finish();
  }
  {
    auto s = root.child("features");
    std::string mode = "bow";
    s.get("mode", mode);
    auto m = parse_feature_mode(mode);
    if (!m) throw ConfigError("config: " + s.where("mode") + " must be \"bow\" or \"tfidf\"");
    cfg.features.mode = *m;
    s.get("min_df", cfg.features.min_df);
    s.get("sublinear_tf", cfg.features.sublinear_tf);
    s.finish();
  }
  {
    auto s = root.child("lr");
    const bool has_c = s.has("c_inverse_reg");
    const bool has_lambda = s.has("lambda");
    if (has_c && has_lambda) throw ConfigError("config: set either lr.c_inverse_reg or lr.lambda, not both");
    if (has_lambda) {
      double lambda = 0.0;
      s.get("lambda", lambda);
      if (!(lambda > 0.0)) throw ParameterError("config: lr.lambda must be positive");
      cfg.lr = LrConfig::from_penalty(lambda);
    }
    s.get("c_inverse_reg", cfg.lr.c_inverse_reg);
    if (!(cfg.lr.c_inverse_reg > 0.0)) throw ParameterError("config: lr.c_inverse_reg must be positive");
    s.get("tol", cfg.lr.tol);
    s.get("max_iter", cfg.lr.max_iter);
    s.get("fit_bias", cfg.lr.fit_bias);
    s.finish();
  }
  {
    auto s = root.child("lbfgs");
    s.get("memory", cfg.lbfgs.memory);
    s.get("c1", cfg.lbfgs.line_search.c1);
    s.get("shrink", cfg.lbfgs.line_search.shrink);
    s.get("max_backtracks", cfg.lbfgs.line_search.max_backtracks);
    s.finish();
  }
  {
    auto s = root.child("svm");
    s.get("c", cfg.svm.c);
    if (!(cfg.svm.c > 0.0)) throw ParameterError("config: svm.c must be positive");
    s.get("tol", cfg.svm.tol);
    s.get("max_iter", cfg.svm.max_iter);
    cfg.svm_grid.assign(kDefaultSvmGrid.begin(), kDefaultSvmGrid.end());
    s.get("grid", cfg.svm_grid);
    s.get("tune_folds", cfg.tune_folds);
    s.finish();
  }
  {
    auto s = root.child("eval");
    s.get("split_ratio", cfg.eval.split_ratio);
    s.get("k", cfg.eval.k);
    s.get("include_augmented_in_test", cfg.eval.include_augmented_in_test);
    s.get("cross_validate", cfg.eval.cross_validate);
    s.finish();
  }
  {
    auto s = root.child("field");
    std::string d;
    if (s.has("range_start")) {
      s.get("range_start", d);
      cfg.field.range_start = parse_date(d, s.where("range_start"));
    }
    if (s.has("range_end")) {
      s.get("range_end", d);
      cfg.field.range_end = parse_date(d, s.where("range_end"));
    }
    s.get("threshold", cfg.field.threshold);
    s.get("top_n", cfg.field.top_n);
    s.path("hate_model", cfg.field.hate_model, base);
    s.path("sentiment_model", cfg.field.sentiment_model, base);
    s.finish();
  }
  {
    auto s = root.child("augment");
    std::string mode = "replay";
    s.get("mode", mode);
    if (mode != "replay" && mode != "live") throw ConfigError("config: " + s.where("mode") + " must be replay or live");
    cfg.augment.mode = mode == "live" ? ClientMode::Live : ClientMode::Replay;
    s.get("record", cfg.augment.record);
    s.get("max_in_flight", cfg.augment.max_in_flight);
    {
      auto bt = s.child("backtranslate");
      bt.get("source_lang", cfg.augment.backtranslate.source_lang);
      bt.get("target_lang", cfg.augment.backtranslate.target_lang);
      bt.get("round_trip", cfg.augment.backtranslate.round_trip);
      bt.finish();
    }
    {
      auto gen = s.child("generate");
      std::size_t batch_size = 25;
      gen.get("batch_size", batch_size);
      if (gen.has("specs")) {
        const auto& specs = gen.raw("specs");
        if (!specs.is_array()) throw ConfigError("config: augment.generate.specs must be an array");
        for (const auto& item : specs) {
          Section spec(item, "augment.generate.specs[]");
          GenerationSpec g;
          g.batch_size = batch_size;
          std::string label;
          spec.get("label", label);
          auto parsed = parse_sentiment(label);
          if (!parsed) throw ConfigError("config: unknown generation label \"" + label + "\"");
          g.label = *parsed;
          spec.get("count", g.count);
          spec.get("prompt_template", g.prompt_template);
          spec.finish();
          cfg.augment.generate.push_back(std::move(g));
        }
      }
      gen.finish();
    }
    s.finish();
  }
  root.finish();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

void require_file(const std::filesystem::path& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("config: no ") + what + " path configured");
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw ConfigError(std::string(what) + " file not found: " + path.string());
  }
}

PipelineConfig load_pipeline(const RunConfig& cfg) {
  require_file(cfg.paths.stopwords, "stopwords");
  require_file(cfg.paths.negations, "negations");
  require_file(cfg.paths.lemmas, "lemmas");
  auto p = PipelineConfig::from_files(cfg.paths.stopwords, cfg.paths.negations, cfg.paths.lemmas);
  p.language_filter = cfg.language_filter;
  return p;
}

}  // namespace hatescan::cli
