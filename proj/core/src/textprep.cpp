#include "hatescan/textprep.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <thread>

#include "hatescan/error.hpp"
#include "hatescan/hashing.hpp"

namespace hatescan {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + static_cast<std::size_t>(len) > s.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong forms, surrogates and out-of-range values.
    static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (!ok || cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  // Latin-1 uppercase block, minus the multiplication sign.
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c == 0x0152) return 0x0153;  // Œ
  if (c == 0x1E9E) return 0xDF;    // capital sharp s
  return c;
}

bool is_combining_mark(char32_t c) { return c >= 0x0300 && c <= 0x036F; }

std::string_view trim_line(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<Substitution> default_umlaut_map() {
  std::vector<Substitution> m = {
      {U"ä", "ae"}, {U"ö", "oe"}, {U"ü", "ue"}, {U"ß", "ss"},
      // Decomposed umlauts (base letter + combining diaeresis).
      {U"a\u0308", "ae"}, {U"o\u0308", "oe"}, {U"u\u0308", "ue"},
  };
  // Other accented Latin letters fold to their base letter.
  const std::pair<std::u32string, const char*> accents[] = {
      {U"àáâãå", "a"}, {U"æ", "ae"}, {U"ç", "c"}, {U"èéêë", "e"}, {U"ìíîï", "i"},
      {U"ñ", "n"},     {U"òóôõø", "o"}, {U"œ", "oe"}, {U"ùúû", "u"}, {U"ýÿ", "y"},
  };
  for (const auto& [chars, to] : accents) {
    for (char32_t c : chars) m.push_back({std::u32string(1, c), to});
  }
  return m;
}

std::string normalize_text(std::string_view raw, const PipelineConfig& cfg) {
  std::u32string text = decode_utf8(raw);
  for (auto& c : text) c = to_lower(c);

  std::string out;
  out.reserve(text.size());
  auto separator = [&] {
    if (!out.empty() && out.back() != ' ') out.push_back(' ');
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const Substitution* best = nullptr;
    for (const auto& sub : cfg.umlaut_map) {
      if (sub.from.empty() || (best && sub.from.size() <= best->from.size())) continue;
      if (text.compare(i, sub.from.size(), sub.from) == 0) best = &sub;
    }
    if (best) {
      for (char ch : best->to) {
        if (ch >= 'a' && ch <= 'z') {
          out.push_back(ch);
        } else {
          separator();
        }
      }
      i += best->from.size();
      continue;
    }
    const char32_t c = text[i++];
    if (c >= U'a' && c <= U'z') {
      out.push_back(static_cast<char>(c));
    } else if (!is_combining_mark(c)) {
      separator();
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> tokenize(std::string_view normalized) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < normalized.size()) {
    auto end = normalized.find(' ', start);
    if (end == std::string_view::npos) end = normalized.size();
    if (end > start) tokens.emplace_back(normalized.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

std::vector<std::string> filter_stopwords(std::vector<std::string> tokens, const PipelineConfig& cfg) {
  std::erase_if(tokens, [&](const std::string& t) {
    return cfg.stopwords.count(t) && !cfg.negation_whitelist.count(t);
  });
  return tokens;
}

std::vector<std::string> lemmatize(std::vector<std::string> tokens, const PipelineConfig& cfg) {
  for (auto& t : tokens) {
    if (auto it = cfg.lemma_dict.find(t); it != cfg.lemma_dict.end()) t = it->second;
  }
  return tokens;
}

TokenDoc preprocess(std::string_view raw, const PipelineConfig& cfg, std::string comment_id) {
  return TokenDoc{std::move(comment_id),
                  lemmatize(filter_stopwords(tokenize(normalize_text(raw, cfg)), cfg), cfg)};
}

std::vector<TokenDoc> preprocess_all(std::span<const Comment> comments, const PipelineConfig& cfg,
                                     unsigned threads) {
  std::vector<TokenDoc> out(comments.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, comments.size() / 256)));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = preprocess(comments[i].raw_text, cfg, comments[i].id);
  };
  if (threads <= 1) {
    work(0, comments.size());
    return out;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (comments.size() + threads - 1) / threads;
  for (std::size_t begin = 0; begin < comments.size(); begin += chunk) {
    pool.emplace_back(work, begin, std::min(comments.size(), begin + chunk));
  }
  pool.clear();
  return out;
}

std::string render(const TokenDoc& doc) {
  std::string out;
  for (const auto& t : doc.tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

double stopword_hit_rate(std::span<const std::string> tokens, const PipelineConfig& cfg) {
  if (tokens.empty()) return 0.0;
  const auto hits = std::count_if(tokens.begin(), tokens.end(),
                                  [&](const std::string& t) { return cfg.stopwords.count(t) > 0; });
  return static_cast<double>(hits) / static_cast<double>(tokens.size());
}

bool passes_language_filter(std::span<const std::string> tokens, const PipelineConfig& cfg) {
  if (tokens.size() < cfg.language_filter.min_tokens) return true;
  return stopword_hit_rate(tokens, cfg) >= cfg.language_filter.stopword_hit_threshold;
}

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::Duplicate: return "duplicate";
    case DropReason::EmptyAfterCleaning: return "empty_after_cleaning";
    case DropReason::Language: return "language";
  }
  return "duplicate";
}

CleanResult clean_corpus(std::span<const Comment> corpus, const PipelineConfig& cfg) {
  CleanResult result;
  std::unordered_set<std::string_view> seen;
  for (const auto& c : corpus) {
    if (!seen.insert(c.raw_text).second) {
      result.dropped.push_back({c.id, DropReason::Duplicate});
      continue;
    }
    const auto tokens = tokenize(normalize_text(c.raw_text, cfg));
    if (lemmatize(filter_stopwords(tokens, cfg), cfg).empty()) {
      result.dropped.push_back({c.id, DropReason::EmptyAfterCleaning});
      continue;
    }
    if (!passes_language_filter(tokens, cfg)) {
      result.dropped.push_back({c.id, DropReason::Language});
      continue;
    }
    result.kept.push_back(c);
  }
  return result;
}

std::vector<std::string> read_term_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open term list " + path.string());
  std::vector<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    auto view = std::string_view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim_line(view);
    if (!view.empty()) terms.emplace_back(view);
  }
  return terms;
}

std::unordered_map<std::string, std::string> read_lemma_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lemma table " + path.string());
  std::unordered_map<std::string, std::string> table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = trim_line(line);
    if (view.empty() || view.front() == '#') continue;
    const auto tab = view.find('\t');
    if (tab == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected inflected<TAB>lemma");
    }
    table[std::string(trim_line(view.substr(0, tab)))] = std::string(trim_line(view.substr(tab + 1)));
  }
  return table;
}

PipelineConfig PipelineConfig::from_files(const std::filesystem::path& stopwords,
                                          const std::filesystem::path& negations,
                                          const std::filesystem::path& lemmas) {
  PipelineConfig cfg;
  auto normalized_terms = [&](const std::filesystem::path& path) {
    std::unordered_set<std::string> out;
    for (const auto& term : read_term_list(path)) {
      auto norm = normalize_text(term, cfg);
      if (norm.empty() || norm.find(' ') != std::string::npos) {
        throw ConfigError(path.string() + ": entry \"" + term + "\" does not normalize to a single term");
      }
      out.insert(std::move(norm));
    }
    return out;
  };
  cfg.stopwords = normalized_terms(stopwords);
  cfg.negation_whitelist = normalized_terms(negations);

  auto table = read_lemma_table(lemmas);
  auto is_term = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
  };
  for (const auto& [from, to] : table) {
    if (!is_term(from) || !is_term(to)) {
      throw ConfigError(lemmas.string() + ": entry \"" + from + "\" -> \"" + to +
                        "\" is not in normalized form");
    }
    if (auto it = table.find(to); it != table.end() && it->second != to) {
      throw ConfigError(lemmas.string() + ": lemma \"" + to + "\" is itself mapped to \"" + it->second +
                        "\"; chains break idempotence");
    }
    if (cfg.stopwords.count(to) && !cfg.negation_whitelist.count(to)) {
      throw ConfigError(lemmas.string() + ": lemma \"" + to + "\" is a stopword");
    }
  }
  cfg.lemma_dict = std::move(table);
  return cfg;
}

std::string PipelineConfig::fingerprint() const {
  // Sort every set so the hash is independent of hash-table iteration order.
  std::string buf = "pipeline/v1\n";
  for (const auto& sub : umlaut_map) {
    for (char32_t c : sub.from) buf += std::to_string(static_cast<unsigned long>(c)) + ",";
    buf += "=" + sub.to + "\n";
  }
  auto append_set = [&](const char* tag, const std::unordered_set<std::string>& s) {
    std::vector<std::string> sorted(s.begin(), s.end());
    std::sort(sorted.begin(), sorted.end());
    buf += tag;
    for (const auto& t : sorted) buf += " " + t;
    buf += "\n";
  };
  append_set("stop", stopwords);
  append_set("neg", negation_whitelist);
  std::map<std::string, std::string> lemmas(lemma_dict.begin(), lemma_dict.end());
  buf += "lemma";
  for (const auto& [k, v] : lemmas) buf += " " + k + ">" + v;
  buf += "\nlang " + std::to_string(language_filter.stopword_hit_threshold) + " " +
         std::to_string(language_filter.min_tokens) + "\n";
  return sha256_hex(buf);
}

}  // namespace hatescan
