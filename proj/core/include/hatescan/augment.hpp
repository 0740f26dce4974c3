#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hatescan/corpus.hpp"
#include "hatescan/error.hpp"
#include "hatescan/textprep.hpp"

namespace hatescan {

// Sorted keys, strings with whitespace runs collapsed to one space and trimmed.
std::string canonical_json(const nlohmann::json& value);
// sha256 over "<operation>\n<canonical request>".
std::string request_hash(std::string_view operation, const nlohmann::json& request);

struct ReplayEntry {
  std::string hash;
  std::string operation;
  nlohmann::json request;
  nlohmann::json response;
};

class ReplayMiss : public DataError {
 public:
  ReplayMiss(std::string hash, std::string_view operation);
  const std::string& hash() const { return hash_; }

 private:
  std::string hash_;
};

// hash -> recorded response. Lookups are read-only; record() is only used by
// live clients that capture a new fixture and is internally synchronized.
class ReplayStore {
 public:
  static ReplayStore load(const std::filesystem::path& path);
  static ReplayStore read(std::istream& in);

  const ReplayEntry* find(const std::string& hash) const;
  // Throws ReplayMiss when absent.
  const nlohmann::json& lookup(std::string_view operation, const nlohmann::json& request) const;
  void record(std::string_view operation, nlohmann::json request, nlohmann::json response);

  std::size_t size() const { return entries_.size(); }
  // One line per entry, ordered by hash.
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  ReplayStore() = default;
  ReplayStore(ReplayStore&& other) noexcept : entries_(std::move(other.entries_)) {}
  ReplayStore& operator=(ReplayStore&& other) noexcept {
    entries_ = std::move(other.entries_);
    return *this;
  }

 private:
  std::map<std::string, ReplayEntry> entries_;
  mutable std::mutex mu_;
};

enum class ClientMode { Live, Replay };
std::string_view to_string(ClientMode mode);

class TranslationClient {
 public:
  virtual ~TranslationClient() = default;
  virtual ClientMode mode() const = 0;
  // Output has one entry per input, in input order.
  virtual std::vector<std::string> translate(std::span<const std::string> texts, std::string_view source_lang,
                                             std::string_view target_lang) = 0;
};

class GenerationClient {
 public:
  virtual ~GenerationClient() = default;
  virtual ClientMode mode() const = 0;
  // Exactly `count` texts for one rendered prompt.
  virtual std::vector<std::string> generate(const std::string& prompt, std::string_view label,
                                            std::size_t count) = 0;
};

// Request payloads shared by replay and live clients, so a fixture captured
// live replays without edits.
nlohmann::json translation_request(std::string_view text, std::string_view source_lang, std::string_view target_lang);
nlohmann::json generation_request(const std::string& prompt, std::string_view label, std::size_t count);

class ReplayTranslationClient : public TranslationClient {
 public:
  explicit ReplayTranslationClient(const ReplayStore& store) : store_(store) {}
  ClientMode mode() const override { return ClientMode::Replay; }
  std::vector<std::string> translate(std::span<const std::string> texts, std::string_view source_lang,
                                     std::string_view target_lang) override;

 private:
  const ReplayStore& store_;
};

class ReplayGenerationClient : public GenerationClient {
 public:
  explicit ReplayGenerationClient(const ReplayStore& store) : store_(store) {}
  ClientMode mode() const override { return ClientMode::Replay; }
  std::vector<std::string> generate(const std::string& prompt, std::string_view label, std::size_t count) override;

 private:
  const ReplayStore& store_;
};

// ---- live transport -------------------------------------------------------

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;  // JSON
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Throws IoError on connection failure.
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

std::unique_ptr<HttpTransport> make_http_transport(std::chrono::seconds timeout = std::chrono::seconds(60));

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  // Replaced in tests to avoid real sleeps.
  std::function<void(std::chrono::milliseconds)> sleep;
};

// Retries transport errors, 429 and 5xx; other statuses fail immediately.
HttpResponse post_with_retry(HttpTransport& transport, const HttpRequest& request, const RetryPolicy& policy);

struct LiveClientConfig {
  std::string endpoint;
  std::string api_key;
  std::string model;  // generation only
  double temperature = 1.0;
  std::size_t max_in_flight = 4;
  RetryPolicy retry;
};

// Reads DEEPL_AUTH_KEY (and optional DEEPL_API_URL). ConfigError when unset.
LiveClientConfig translation_config_from_env();
// Reads OPENAI_API_KEY (optional OPENAI_API_URL, OPENAI_MODEL). ConfigError when unset.
LiveClientConfig generation_config_from_env();

class LiveTranslationClient : public TranslationClient {
 public:
  // `recorder`, when set, receives every response so the run can be replayed.
  LiveTranslationClient(LiveClientConfig cfg, std::shared_ptr<HttpTransport> transport,
                        ReplayStore* recorder = nullptr);
  ClientMode mode() const override { return ClientMode::Live; }
  std::vector<std::string> translate(std::span<const std::string> texts, std::string_view source_lang,
                                     std::string_view target_lang) override;

 private:
  LiveClientConfig cfg_;
  std::shared_ptr<HttpTransport> transport_;
  ReplayStore* recorder_;
};

class LiveGenerationClient : public GenerationClient {
 public:
  LiveGenerationClient(LiveClientConfig cfg, std::shared_ptr<HttpTransport> transport,
                       ReplayStore* recorder = nullptr);
  ClientMode mode() const override { return ClientMode::Live; }
  std::vector<std::string> generate(const std::string& prompt, std::string_view label, std::size_t count) override;

 private:
  LiveClientConfig cfg_;
  std::shared_ptr<HttpTransport> transport_;
  ReplayStore* recorder_;
};

// Splits a chat reply into one comment per non-empty line, dropping list
// markers such as "1." or "-".
std::vector<std::string> split_generated_lines(std::string_view reply);

// ---- operations -----------------------------------------------------------

struct SourceItem {
  std::string id;
  std::string text;
  HateLabel hate = HateLabel::NoHate;
};

// Accepts either id,text,hate (0/1) or the HateCheck layout
// (case_id,test_case,label_gold with hateful/non-hateful).
std::vector<SourceItem> load_hate_suite(const std::filesystem::path& path);
std::vector<SourceItem> read_hate_suite(std::istream& in);

struct BackTranslateOptions {
  std::string source_lang = "EN";
  std::string target_lang = "DE";
  // Adds target -> source -> target after the directed pass.
  bool round_trip = false;
};

// Ids become "bt-<source id>"; the hate label is inherited unchanged.
std::vector<LabeledComment> back_translate_corpus(std::span<const SourceItem> items, const BackTranslateOptions& opts,
                                                  TranslationClient& client);

struct GenerationSpec {
  // "{label}" and "{count}" are substituted per request.
  std::string prompt_template;
  SentimentLabel label = SentimentLabel::Neutral;
  std::size_t count = 0;
  std::size_t batch_size = 25;
};

std::string render_prompt(const std::string& tmpl, std::string_view label, std::size_t count);

// Ids become "gen-<label>-<n>" (n from 1); texts are stored normalized.
std::vector<LabeledComment> generate_labeled(const GenerationSpec& spec, GenerationClient& client,
                                             const PipelineConfig& cfg);

}  // namespace hatescan
