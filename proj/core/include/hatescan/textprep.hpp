#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hatescan/corpus.hpp"

namespace hatescan {

struct LanguageFilter {
  double stopword_hit_threshold = 0.05;
  std::size_t min_tokens = 3;
};

// A substitution applied to lowercased code points before charset stripping.
// `from` may span several code points (e.g. a base letter plus U+0308).
struct Substitution {
  std::u32string from;
  std::string to;
};

std::vector<Substitution> default_umlaut_map();

struct PipelineConfig {
  std::vector<Substitution> umlaut_map = default_umlaut_map();
  std::unordered_set<std::string> stopwords;
  std::unordered_set<std::string> negation_whitelist;
  std::unordered_map<std::string, std::string> lemma_dict;
  LanguageFilter language_filter;

  // Loads the three shipped data files. Stopword and negation entries are
  // normalized on load; lemma entries must already be normalized single terms.
  static PipelineConfig from_files(const std::filesystem::path& stopwords,
                                   const std::filesystem::path& negations,
                                   const std::filesystem::path& lemmas);

  // Stable hash over every field that influences preprocess() and the
  // language filter. Model artifacts record it.
  std::string fingerprint() const;
};

// One term per line, '#' starts a comment, blank lines ignored.
std::vector<std::string> read_term_list(const std::filesystem::path& path);
// inflected<TAB>lemma per line.
std::unordered_map<std::string, std::string> read_lemma_table(const std::filesystem::path& path);

struct TokenDoc {
  std::string comment_id;
  std::vector<std::string> tokens;

  bool operator==(const TokenDoc&) const = default;
};

// Lowercase, fold umlauts and accented letters, replace every character
// outside [a-z] with a separator, collapse runs of separators. Total.
std::string normalize_text(std::string_view raw, const PipelineConfig& cfg);
std::vector<std::string> tokenize(std::string_view normalized);
std::vector<std::string> filter_stopwords(std::vector<std::string> tokens, const PipelineConfig& cfg);
std::vector<std::string> lemmatize(std::vector<std::string> tokens, const PipelineConfig& cfg);

TokenDoc preprocess(std::string_view raw, const PipelineConfig& cfg, std::string comment_id = {});

// Parallel map of preprocess() over comments; output order matches input.
// threads == 0 picks hardware concurrency.
std::vector<TokenDoc> preprocess_all(std::span<const Comment> comments, const PipelineConfig& cfg,
                                     unsigned threads = 0);

std::string render(const TokenDoc& doc);

// Fraction of tokens that are stopwords (before stopword removal).
double stopword_hit_rate(std::span<const std::string> tokens, const PipelineConfig& cfg);
bool passes_language_filter(std::span<const std::string> tokens, const PipelineConfig& cfg);

enum class DropReason { Duplicate, EmptyAfterCleaning, Language };
std::string_view to_string(DropReason reason);

struct Drop {
  std::string comment_id;
  DropReason reason;
};

struct CleanResult {
  std::vector<Comment> kept;
  std::vector<Drop> dropped;
};

// Drops exact raw_text duplicates (first kept), comments empty after
// preprocessing, and comments failing the language filter, in that order.
CleanResult clean_corpus(std::span<const Comment> corpus, const PipelineConfig& cfg);

}  // namespace hatescan
