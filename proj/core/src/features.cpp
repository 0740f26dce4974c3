#include "hatescan/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "hatescan/error.hpp"
#include "hatescan/hashing.hpp"

namespace hatescan {

using nlohmann::json;

std::string_view to_string(FeatureMode mode) { return mode == FeatureMode::Bow ? "bow" : "tfidf"; }

std::optional<FeatureMode> parse_feature_mode(std::string_view text) {
  if (text == "bow") return FeatureMode::Bow;
  if (text == "tfidf") return FeatureMode::Tfidf;
  return std::nullopt;
}

SparseVector SparseVector::from_entries(std::size_t dimension,
                                        std::vector<std::pair<Index, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseVector v(dimension);
  for (std::size_t i = 0; i < entries.size();) {
    const Index idx = entries[i].first;
    if (idx >= dimension) {
      throw DataError("sparse index " + std::to_string(idx) + " out of range for dimension " +
                      std::to_string(dimension));
    }
    double sum = 0.0;
    for (; i < entries.size() && entries[i].first == idx; ++i) sum += entries[i].second;
    if (sum != 0.0) {
      v.indices_.push_back(idx);
      v.values_.push_back(sum);
    }
  }
  return v;
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector v(dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      v.indices_.push_back(static_cast<Index>(i));
      v.values_.push_back(dense[i]);
    }
  }
  return v;
}

double SparseVector::dot(std::span<const double> dense) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < indices_.size(); ++k) sum += values_[k] * dense[indices_[k]];
  return sum;
}

double SparseVector::dot(const SparseVector& other) const {
  double sum = 0.0;
  std::size_t a = 0, b = 0;
  while (a < indices_.size() && b < other.indices_.size()) {
    if (indices_[a] < other.indices_[b]) {
      ++a;
    } else if (indices_[a] > other.indices_[b]) {
      ++b;
    } else {
      sum += values_[a++] * other.values_[b++];
    }
  }
  return sum;
}

double SparseVector::squared_norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return sum;
}

void SparseVector::add_to(std::span<double> dense, double scale) const {
  for (std::size_t k = 0; k < indices_.size(); ++k) dense[indices_[k]] += scale * values_[k];
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> out(dimension_, 0.0);
  add_to(out);
  return out;
}

SparseVector SparseVector::operator+(const SparseVector& other) const {
  if (dimension_ != other.dimension_) throw DataError("sparse vector dimension mismatch");
  SparseVector out(dimension_);
  std::size_t a = 0, b = 0;
  auto push = [&](Index idx, double v) {
    if (v != 0.0) {
      out.indices_.push_back(idx);
      out.values_.push_back(v);
    }
  };
  while (a < indices_.size() || b < other.indices_.size()) {
    if (b == other.indices_.size() || (a < indices_.size() && indices_[a] < other.indices_[b])) {
      push(indices_[a], values_[a]);
      ++a;
    } else if (a == indices_.size() || other.indices_[b] < indices_[a]) {
      push(other.indices_[b], other.values_[b]);
      ++b;
    } else {
      push(indices_[a], values_[a] + other.values_[b]);
      ++a;
      ++b;
    }
  }
  return out;
}

SparseVector& SparseVector::operator*=(double scale) {
  if (scale == 0.0) {
    indices_.clear();
    values_.clear();
    return *this;
  }
  for (auto& v : values_) v *= scale;
  return *this;
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq,
                       std::size_t n_docs, std::size_t min_df)
    : terms_(std::move(terms)), doc_freq_(std::move(doc_freq)), n_docs_(n_docs), min_df_(min_df) {
  if (terms_.size() != doc_freq_.size()) throw DataError("vocabulary: terms/doc_freq length mismatch");
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i > 0 && !(terms_[i - 1] < terms_[i])) {
      throw DataError("vocabulary: terms must be strictly ascending");
    }
    if (doc_freq_[i] < min_df_ || doc_freq_[i] > n_docs_) {
      throw DataError("vocabulary: doc_freq of \"" + terms_[i] + "\" outside [min_df, n_docs]");
    }
    index_.emplace(terms_[i], static_cast<SparseVector::Index>(i));
  }
}

std::optional<SparseVector::Index> Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::fingerprint() const {
  std::string buf = "vocab/v1 " + std::to_string(n_docs_) + " " + std::to_string(min_df_) + "\n";
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    buf += terms_[i] + "\t" + std::to_string(doc_freq_[i]) + "\n";
  }
  return sha256_hex(buf);
}

Vocabulary fit_vocabulary(std::span<const TokenDoc> docs, const FeatureConfig& cfg) {
  if (docs.empty()) throw DataError("cannot fit a vocabulary on an empty corpus");
  std::map<std::string, std::size_t> df;
  std::vector<std::string> unique;
  for (const auto& doc : docs) {
    unique.assign(doc.tokens.begin(), doc.tokens.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (auto& t : unique) ++df[t];
  }
  const std::size_t min_df = std::max<std::size_t>(1, cfg.min_df);
  std::vector<std::string> terms;
  std::vector<std::size_t> freqs;
  for (auto& [term, count] : df) {
    if (count >= min_df) {
      terms.push_back(term);
      freqs.push_back(count);
    }
  }
  return Vocabulary(std::move(terms), std::move(freqs), docs.size(), min_df);
}

namespace {

std::vector<std::pair<SparseVector::Index, double>> counts(std::span<const std::string> tokens,
                                                           const Vocabulary& vocab) {
  std::vector<std::pair<SparseVector::Index, double>> entries;
  entries.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (auto idx = vocab.index_of(t)) entries.emplace_back(*idx, 1.0);
  }
  return entries;
}

}  // namespace

SparseVector vectorize_bow(std::span<const std::string> tokens, const Vocabulary& vocab) {
  return SparseVector::from_entries(vocab.size(), counts(tokens, vocab));
}

std::vector<double> idf(const Vocabulary& vocab) {
  std::vector<double> out(vocab.size());
  const double n = static_cast<double>(vocab.n_docs());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(vocab.doc_freq(i)))) + 1.0;
  }
  return out;
}

SparseVector vectorize_tfidf(std::span<const std::string> tokens, const Vocabulary& vocab,
                             const FeatureConfig& cfg, std::span<const double> idf_weights) {
  SparseVector tf = vectorize_bow(tokens, vocab);
  std::vector<std::pair<SparseVector::Index, double>> entries;
  entries.reserve(tf.nnz());
  double norm2 = 0.0;
  for (std::size_t k = 0; k < tf.nnz(); ++k) {
    const auto idx = tf.indices()[k];
    const double count = tf.values()[k];
    const double w = (cfg.sublinear_tf ? 1.0 + std::log(count) : count) * idf_weights[idx];
    entries.emplace_back(idx, w);
    norm2 += w * w;
  }
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& e : entries) e.second *= inv;
  }
  return SparseVector::from_entries(vocab.size(), std::move(entries));
}

SparseVector vectorize_tfidf(const TokenDoc& doc, const Vocabulary& vocab, const FeatureConfig& cfg) {
  const auto weights = idf(vocab);
  return vectorize_tfidf(doc.tokens, vocab, cfg, weights);
}

Featurizer::Featurizer(Vocabulary vocab, FeatureConfig cfg)
    : vocab_(std::move(vocab)), cfg_(cfg), idf_(idf(vocab_)) {}

SparseVector Featurizer::operator()(const TokenDoc& doc) const {
  if (cfg_.mode == FeatureMode::Bow) return vectorize_bow(doc.tokens, vocab_);
  return vectorize_tfidf(doc.tokens, vocab_, cfg_, idf_);
}

std::vector<SparseVector> Featurizer::transform(std::span<const TokenDoc> docs) const {
  std::vector<SparseVector> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back((*this)(d));
  return out;
}

json to_json(const Vocabulary& vocab, const FeatureConfig& cfg) {
  return json{{"terms", std::vector<std::string>(vocab.terms().begin(), vocab.terms().end())},
              {"doc_freq", std::vector<std::size_t>(vocab.doc_freqs().begin(), vocab.doc_freqs().end())},
              {"n_docs", vocab.n_docs()},
              {"min_df", vocab.min_df()},
              {"feature_mode", to_string(cfg.mode)},
              {"sublinear_tf", cfg.sublinear_tf},
              {"idf", "smooth_ln"}};
}

std::pair<Vocabulary, FeatureConfig> vocabulary_from_json(const json& j) {
  try {
    FeatureConfig cfg;
    const auto mode = parse_feature_mode(j.at("feature_mode").get<std::string>());
    if (!mode) throw DataError("vocabulary: unknown feature_mode");
    cfg.mode = *mode;
    cfg.min_df = j.value("min_df", std::size_t{1});
    cfg.sublinear_tf = j.value("sublinear_tf", false);
    Vocabulary vocab(j.at("terms").get<std::vector<std::string>>(),
                     j.at("doc_freq").get<std::vector<std::size_t>>(), j.at("n_docs").get<std::size_t>(),
                     cfg.min_df);
    return {std::move(vocab), cfg};
  } catch (const json::exception& e) {
    throw DataError(std::string("vocabulary: ") + e.what());
  }
}

}  // namespace hatescan
