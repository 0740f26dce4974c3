#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hatescan/textprep.hpp"

namespace hatescan {

enum class FeatureMode { Bow, Tfidf };
std::string_view to_string(FeatureMode mode);
std::optional<FeatureMode> parse_feature_mode(std::string_view text);

struct FeatureConfig {
  FeatureMode mode = FeatureMode::Bow;
  std::size_t min_df = 1;
  bool sublinear_tf = false;

  bool operator==(const FeatureConfig&) const = default;
};

// Sorted (index, weight) pairs with no explicit zeros.
class SparseVector {
 public:
  using Index = std::uint32_t;

  SparseVector() = default;
  explicit SparseVector(std::size_t dimension) : dimension_(dimension) {}

  // Accepts unsorted entries with repeated indices; repeats are summed and
  // zero results dropped.
  static SparseVector from_entries(std::size_t dimension, std::vector<std::pair<Index, double>> entries);
  static SparseVector from_dense(std::span<const double> dense);

  std::size_t dimension() const { return dimension_; }
  std::size_t nnz() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  std::span<const Index> indices() const { return indices_; }
  std::span<const double> values() const { return values_; }

  double dot(std::span<const double> dense) const;
  double dot(const SparseVector& other) const;
  double squared_norm() const;
  // dense += scale * this
  void add_to(std::span<double> dense, double scale = 1.0) const;
  std::vector<double> to_dense() const;

  SparseVector operator+(const SparseVector& other) const;
  SparseVector& operator*=(double scale);

  bool operator==(const SparseVector&) const = default;

 private:
  std::size_t dimension_ = 0;
  std::vector<Index> indices_;
  std::vector<double> values_;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  // `terms` must be strictly ascending; doc_freq parallel to it.
  Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq, std::size_t n_docs,
             std::size_t min_df);

  std::size_t size() const { return terms_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  std::size_t min_df() const { return min_df_; }
  std::span<const std::string> terms() const { return terms_; }
  std::span<const std::size_t> doc_freqs() const { return doc_freq_; }
  const std::string& term(std::size_t i) const { return terms_[i]; }
  std::size_t doc_freq(std::size_t i) const { return doc_freq_[i]; }
  std::optional<SparseVector::Index> index_of(std::string_view term) const;

  std::string fingerprint() const;

  bool operator==(const Vocabulary& other) const {
    return terms_ == other.terms_ && doc_freq_ == other.doc_freq_ && n_docs_ == other.n_docs_ &&
           min_df_ == other.min_df_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> doc_freq_;
  std::size_t n_docs_ = 0;
  std::size_t min_df_ = 1;
  std::unordered_map<std::string, SparseVector::Index> index_;
};

// Indices follow lexicographic term order.
Vocabulary fit_vocabulary(std::span<const TokenDoc> docs, const FeatureConfig& cfg);

SparseVector vectorize_bow(std::span<const std::string> tokens, const Vocabulary& vocab);
inline SparseVector vectorize_bow(const TokenDoc& doc, const Vocabulary& vocab) {
  return vectorize_bow(doc.tokens, vocab);
}

// Smoothed inverse document frequency ln((1 + N) / (1 + df)) + 1.
std::vector<double> idf(const Vocabulary& vocab);

SparseVector vectorize_tfidf(std::span<const std::string> tokens, const Vocabulary& vocab,
                             const FeatureConfig& cfg, std::span<const double> idf_weights);
SparseVector vectorize_tfidf(const TokenDoc& doc, const Vocabulary& vocab, const FeatureConfig& cfg);

// A fitted vocabulary plus cached idf; maps documents to vectors per cfg.mode.
class Featurizer {
 public:
  Featurizer(Vocabulary vocab, FeatureConfig cfg);

  SparseVector operator()(const TokenDoc& doc) const;
  std::vector<SparseVector> transform(std::span<const TokenDoc> docs) const;

  const Vocabulary& vocabulary() const { return vocab_; }
  const FeatureConfig& config() const { return cfg_; }

 private:
  Vocabulary vocab_;
  FeatureConfig cfg_;
  std::vector<double> idf_;
};

nlohmann::json to_json(const Vocabulary& vocab, const FeatureConfig& cfg);
std::pair<Vocabulary, FeatureConfig> vocabulary_from_json(const nlohmann::json& j);

}  // namespace hatescan
