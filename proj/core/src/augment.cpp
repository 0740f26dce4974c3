#include "hatescan/augment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "hatescan/csv.hpp"
#include "hatescan/hashing.hpp"

namespace hatescan {

using nlohmann::json;

namespace {

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ch);
  }
  return out;
}

json canonicalize(const json& v) {
  if (v.is_string()) return collapse_whitespace(v.get_ref<const std::string&>());
  if (v.is_array()) {
    json out = json::array();
    for (const auto& e : v) out.push_back(canonicalize(e));
    return out;
  }
  if (v.is_object()) {
    // nlohmann objects iterate in key order already.
    json out = json::object();
    for (const auto& [k, e] : v.items()) out[k] = canonicalize(e);
    return out;
  }
  return v;
}

}  // namespace

std::string canonical_json(const json& value) { return canonicalize(value).dump(); }

std::string request_hash(std::string_view operation, const json& request) {
  std::string buf(operation);
  buf += '\n';
  buf += canonical_json(request);
  return sha256_hex(buf);
}

ReplayMiss::ReplayMiss(std::string hash, std::string_view operation)
    : DataError("replay miss: no recorded " + std::string(operation) + " response for request hash " + hash),
      hash_(std::move(hash)) {}

ReplayStore ReplayStore::read(std::istream& in) {
  ReplayStore store;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      ReplayEntry e{j.at("hash").get<std::string>(), j.at("operation").get<std::string>(), j.at("request"),
                    j.at("response")};
      const auto expected = request_hash(e.operation, e.request);
      if (e.hash != expected) {
        throw DataError("replay store line " + std::to_string(lineno) + ": hash " + e.hash +
                        " does not match its request (expected " + expected + ")");
      }
      if (!store.entries_.emplace(e.hash, e).second) {
        throw DataError("replay store line " + std::to_string(lineno) + ": duplicate hash " + e.hash);
      }
    } catch (const json::exception& ex) {
      throw DataError("replay store line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return store;
}

ReplayStore ReplayStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open replay store " + path.string());
  return read(in);
}

const ReplayEntry* ReplayStore::find(const std::string& hash) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(hash);
  return it == entries_.end() ? nullptr : &it->second;
}

const json& ReplayStore::lookup(std::string_view operation, const json& request) const {
  auto hash = request_hash(operation, request);
  const auto* e = find(hash);
  if (!e) throw ReplayMiss(std::move(hash), operation);
  return e->response;
}

void ReplayStore::record(std::string_view operation, json request, json response) {
  auto hash = request_hash(operation, request);
  std::lock_guard lock(mu_);
  entries_.insert_or_assign(hash, ReplayEntry{hash, std::string(operation), std::move(request), std::move(response)});
}

void ReplayStore::write(std::ostream& out) const {
  std::lock_guard lock(mu_);
  for (const auto& [hash, e] : entries_) {
    out << json{{"hash", e.hash}, {"operation", e.operation}, {"request", e.request}, {"response", e.response}}.dump()
        << '\n';
  }
}

void ReplayStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write replay store " + path.string());
  write(out);
}

std::string_view to_string(ClientMode mode) { return mode == ClientMode::Live ? "live" : "replay"; }

json translation_request(std::string_view text, std::string_view source_lang, std::string_view target_lang) {
  return json{{"text", text}, {"source_lang", source_lang}, {"target_lang", target_lang}};
}

json generation_request(const std::string& prompt, std::string_view label, std::size_t count) {
  return json{{"prompt", prompt}, {"label", label}, {"count", count}};
}

std::vector<std::string> ReplayTranslationClient::translate(std::span<const std::string> texts,
                                                            std::string_view source_lang,
                                                            std::string_view target_lang) {
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    const auto& r = store_.lookup("translate", translation_request(t, source_lang, target_lang));
    out.push_back(r.at("text").get<std::string>());
  }
  return out;
}

std::vector<std::string> ReplayGenerationClient::generate(const std::string& prompt, std::string_view label,
                                                          std::size_t count) {
  const auto& r = store_.lookup("generate", generation_request(prompt, label, count));
  auto texts = r.at("texts").get<std::vector<std::string>>();
  if (texts.size() != count) {
    throw DataError("replay store: generation response holds " + std::to_string(texts.size()) + " texts, expected " +
                    std::to_string(count));
  }
  return texts;
}

HttpResponse post_with_retry(HttpTransport& transport, const HttpRequest& request, const RetryPolicy& policy) {
  auto delay = policy.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= std::max(1, policy.max_attempts); ++attempt) {
    if (attempt > 1) {
      if (policy.sleep) {
        policy.sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
      delay = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(delay.count()) * policy.multiplier));
    }
    HttpResponse resp;
    try {
      resp = transport.post(request);
    } catch (const IoError& e) {
      last_error = e.what();
      continue;
    }
    if (resp.status >= 200 && resp.status < 300) return resp;
    last_error = "HTTP " + std::to_string(resp.status) + " from " + request.url;
    if (resp.status != 429 && resp.status < 500) throw IoError(last_error + ": " + resp.body.substr(0, 200));
  }
  throw IoError("giving up after " + std::to_string(policy.max_attempts) + " attempts: " + last_error);
}

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

std::string require_env(const char* name, const char* purpose) {
  const char* v = std::getenv(name);
  if (!v || !*v) throw ConfigError(std::string("live ") + purpose + " requires the " + name + " environment variable");
  return v;
}

// Runs fn(i) for i in [0, n) on at most `width` threads; the first error wins.
template <typename Fn>
void bounded_for(std::size_t n, std::size_t width, Fn fn) {
  width = std::max<std::size_t>(1, std::min(width, n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < width; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
            next.store(n);
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

json parse_body(const HttpResponse& resp, const std::string& url) {
  try {
    return json::parse(resp.body);
  } catch (const json::parse_error& e) {
    throw IoError("unparseable response from " + url + ": " + e.what());
  }
}

}  // namespace

LiveClientConfig translation_config_from_env() {
  LiveClientConfig cfg;
  cfg.api_key = require_env("DEEPL_AUTH_KEY", "translation");
  cfg.endpoint = env_or("DEEPL_API_URL", "https://api-free.deepl.com/v2/translate");
  return cfg;
}

LiveClientConfig generation_config_from_env() {
  LiveClientConfig cfg;
  cfg.api_key = require_env("OPENAI_API_KEY", "generation");
  cfg.endpoint = env_or("OPENAI_API_URL", "https://api.openai.com/v1/chat/completions");
  cfg.model = env_or("OPENAI_MODEL", "gpt-4");
  return cfg;
}

LiveTranslationClient::LiveTranslationClient(LiveClientConfig cfg, std::shared_ptr<HttpTransport> transport,
                                             ReplayStore* recorder)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), recorder_(recorder) {}

std::vector<std::string> LiveTranslationClient::translate(std::span<const std::string> texts,
                                                          std::string_view source_lang, std::string_view target_lang) {
  std::vector<std::string> out(texts.size());
  bounded_for(texts.size(), cfg_.max_in_flight, [&](std::size_t i) {
    HttpRequest req;
    req.url = cfg_.endpoint;
    req.headers = {{"Authorization", "DeepL-Auth-Key " + cfg_.api_key}};
    req.body = json{{"text", {texts[i]}}, {"source_lang", source_lang}, {"target_lang", target_lang}}.dump();
    const auto body = parse_body(post_with_retry(*transport_, req, cfg_.retry), req.url);
    const auto& tr = body.at("translations");
    if (!tr.is_array() || tr.size() != 1) throw IoError("translation response without exactly one translation");
    out[i] = tr[0].at("text").get<std::string>();
    if (recorder_) recorder_->record("translate", translation_request(texts[i], source_lang, target_lang),
                                     json{{"text", out[i]}});
  });
  return out;
}

LiveGenerationClient::LiveGenerationClient(LiveClientConfig cfg, std::shared_ptr<HttpTransport> transport,
                                           ReplayStore* recorder)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), recorder_(recorder) {}

std::vector<std::string> LiveGenerationClient::generate(const std::string& prompt, std::string_view label,
                                                        std::size_t count) {
  HttpRequest req;
  req.url = cfg_.endpoint;
  req.headers = {{"Authorization", "Bearer " + cfg_.api_key}};
  req.body = json{{"model", cfg_.model},
                  {"temperature", cfg_.temperature},
                  {"messages", {{{"role", "user"}, {"content", prompt}}}}}
                 .dump();
  const auto body = parse_body(post_with_retry(*transport_, req, cfg_.retry), req.url);
  const auto reply = body.at("choices").at(0).at("message").at("content").get<std::string>();
  auto texts = split_generated_lines(reply);
  if (texts.size() < count) {
    throw IoError("generation returned " + std::to_string(texts.size()) + " comments, expected " +
                  std::to_string(count));
  }
  texts.resize(count);
  if (recorder_) recorder_->record("generate", generation_request(prompt, label, count), json{{"texts", texts}});
  return texts;
}

std::vector<std::string> split_generated_lines(std::string_view reply) {
  std::vector<std::string> out;
  std::istringstream in{std::string(reply)};
  std::string line;
  while (std::getline(in, line)) {
    std::size_t i = 0;
    auto skip_space = [&] {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    };
    skip_space();
    std::size_t digits = i;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
    if (digits > i && digits < line.size() && (line[digits] == '.' || line[digits] == ')')) {
      i = digits + 1;
    } else if (i < line.size() && (line[i] == '-' || line[i] == '*')) {
      ++i;
    }
    skip_space();
    auto text = collapse_whitespace(std::string_view(line).substr(i));
    if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = text.substr(1, text.size() - 2);
    if (!text.empty()) out.push_back(std::move(text));
  }
  return out;
}

std::vector<SourceItem> read_hate_suite(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) throw DataError("hate suite: empty file");
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < row.size(); ++i) col[row[i]] = i;
  const bool hatecheck = col.count("test_case") && col.count("label_gold");
  const std::string id_col = hatecheck ? "case_id" : "id";
  const std::string text_col = hatecheck ? "test_case" : "text";
  const std::string label_col = hatecheck ? "label_gold" : "hate";
  for (const auto& name : {id_col, text_col, label_col}) {
    if (!col.count(name)) throw DataError("hate suite: missing column \"" + name + "\"");
  }
  std::vector<SourceItem> out;
  std::unordered_map<std::string, std::size_t> seen;
  while (reader.next(row)) {
    const auto line = reader.record_line();
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() < col.size()) throw DataError("hate suite line " + std::to_string(line) + ": too few fields");
    SourceItem item{row[col[id_col]], row[col[text_col]], HateLabel::NoHate};
    const auto& label = row[col[label_col]];
    if (label == "1" || label == "hateful") {
      item.hate = HateLabel::Hate;
    } else if (label != "0" && label != "non-hateful") {
      throw DataError("hate suite line " + std::to_string(line) + ": invalid label \"" + label + "\"");
    }
    if (item.id.empty()) throw DataError("hate suite line " + std::to_string(line) + ": empty id");
    if (auto [it, fresh] = seen.emplace(item.id, line); !fresh) {
      throw DataError("hate suite: duplicate id \"" + item.id + "\" on lines " + std::to_string(it->second) +
                      " and " + std::to_string(line));
    }
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<SourceItem> load_hate_suite(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open hate suite " + path.string());
  return read_hate_suite(in);
}

std::vector<LabeledComment> back_translate_corpus(std::span<const SourceItem> items, const BackTranslateOptions& opts,
                                                  TranslationClient& client) {
  std::vector<std::string> texts;
  texts.reserve(items.size());
  for (const auto& item : items) texts.push_back(item.text);
  auto translated = client.translate(texts, opts.source_lang, opts.target_lang);
  if (opts.round_trip) {
    translated = client.translate(translated, opts.target_lang, opts.source_lang);
    translated = client.translate(translated, opts.source_lang, opts.target_lang);
  }
  if (translated.size() != items.size()) {
    throw DataError("translation client returned " + std::to_string(translated.size()) + " texts for " +
                    std::to_string(items.size()) + " inputs");
  }
  std::vector<LabeledComment> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    LabeledComment c;
    c.comment.id = "bt-" + items[i].id;
    c.comment.raw_text = std::move(translated[i]);
    c.hate = items[i].hate;
    c.origin = Origin::BackTranslated;
    out.push_back(std::move(c));
  }
  return out;
}

std::string render_prompt(const std::string& tmpl, std::string_view label, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 7, "{label}") == 0) {
      out += label;
      i += 7;
    } else if (tmpl.compare(i, 7, "{count}") == 0) {
      out += std::to_string(count);
      i += 7;
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

std::vector<LabeledComment> generate_labeled(const GenerationSpec& spec, GenerationClient& client,
                                             const PipelineConfig& cfg) {
  if (spec.count < 1) throw ParameterError("generation count must be at least 1");
  if (spec.batch_size < 1) throw ParameterError("generation batch_size must be at least 1");
  const std::string label(to_string(spec.label));
  std::vector<LabeledComment> out;
  out.reserve(spec.count);
  for (std::size_t done = 0; done < spec.count;) {
    const std::size_t n = std::min(spec.batch_size, spec.count - done);
    auto prompt = render_prompt(spec.prompt_template, label, n);
    // Distinct batches must hash differently even when the prompt lacks placeholders.
    if (done > 0) prompt += "\n\n(batch " + std::to_string(done / spec.batch_size + 1) + ")";
    const auto texts = client.generate(prompt, label, n);
    if (texts.size() != n) throw DataError("generation client returned the wrong number of texts");
    for (const auto& t : texts) {
      LabeledComment c;
      c.comment.id = "gen-" + label + "-" + std::to_string(++done);
      c.comment.raw_text = normalize_text(t, cfg);
      c.sentiment = spec.label;
      c.origin = Origin::Generated;
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace hatescan
