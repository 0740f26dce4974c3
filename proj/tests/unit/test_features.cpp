#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "hatescan/error.hpp"
#include "hatescan/features.hpp"
#include "hatescan/random.hpp"

using namespace hatescan;

namespace {

TokenDoc doc(std::vector<std::string> tokens) { return TokenDoc{"", std::move(tokens)}; }

double at(const SparseVector& v, SparseVector::Index i) {
  const auto idx = v.indices();
  for (std::size_t k = 0; k < idx.size(); ++k)
    if (idx[k] == i) return v.values()[k];
  return 0.0;
}

SparseVector random_sparse(Rng& rng, std::size_t dim) {
  std::vector<std::pair<SparseVector::Index, double>> e;
  const auto n = rng.below(dim);
  for (std::uint64_t i = 0; i < n; ++i)
    e.push_back({static_cast<SparseVector::Index>(rng.below(dim)), rng.uniform() * 4 - 2});
  return SparseVector::from_entries(dim, std::move(e));
}

std::vector<std::string> random_tokens(Rng& rng) {
  static const char* words[] = {"a", "b", "c", "d", "krieg", "frieden", "nicht", "zzz"};
  std::vector<std::string> t(rng.below(12));
  for (auto& w : t) w = words[rng.below(8)];
  return t;
}

}  // namespace

TEST(FitVocabulary, CountsDocumentFrequency) {
  const std::vector<TokenDoc> docs = {doc({"a", "b"}), doc({"b", "c", "b"})};
  const auto v = fit_vocabulary(docs, {});
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v.n_docs(), 2u);
  EXPECT_EQ(v.term(0), "a");
  EXPECT_EQ(v.term(2), "c");
  EXPECT_EQ(v.doc_freq(*v.index_of("b")), 2u);
  EXPECT_FALSE(v.index_of("zzz"));
}

TEST(FitVocabulary, MinDfThreshold) {
  FeatureConfig cfg;
  cfg.min_df = 2;
  const auto v = fit_vocabulary(std::vector<TokenDoc>{doc({"a", "b"}), doc({"b", "c"})}, cfg);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v.term(0), "b");
}

TEST(FitVocabulary, EmptyCorpusIsError) {
  EXPECT_THROW(fit_vocabulary(std::vector<TokenDoc>{}, {}), DataError);
}

TEST(FitVocabulary, DeterministicAndOrderIndependent) {
  Rng rng(9);
  std::vector<TokenDoc> docs;
  for (int i = 0; i < 50; ++i) docs.push_back(doc(random_tokens(rng)));
  const auto a = fit_vocabulary(docs, {});
  auto shuffled = docs;
  rng.shuffle(std::span(shuffled));
  EXPECT_EQ(fit_vocabulary(shuffled, {}), a);
  EXPECT_EQ(fit_vocabulary(shuffled, {}).fingerprint(), a.fingerprint());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_GE(a.doc_freq(i), a.min_df());
    EXPECT_LE(a.doc_freq(i), a.n_docs());
    EXPECT_EQ(*a.index_of(a.term(i)), i);
  }
}

TEST(VectorizeBow, CountsAndIgnoresOov) {
  const auto v = fit_vocabulary(std::vector<TokenDoc>{doc({"a", "b", "c"})}, {});
  const std::vector<std::string> t = {"b", "b", "c", "oov"};
  const auto x = vectorize_bow(t, v);
  EXPECT_EQ(x.dimension(), 3u);
  EXPECT_EQ(x.nnz(), 2u);
  EXPECT_EQ(at(x, 1), 2.0);
  EXPECT_EQ(at(x, 2), 1.0);
  const auto oov = vectorize_bow(std::vector<std::string>{"x", "y"}, v);
  EXPECT_TRUE(oov.empty());
  EXPECT_EQ(oov.dimension(), 3u);
  EXPECT_TRUE(vectorize_bow(std::vector<std::string>{}, v).empty());
}

TEST(Idf, SmoothedFormula) {
  const auto v = fit_vocabulary(std::vector<TokenDoc>{doc({"b", "c"}), doc({"b"})}, {});
  const auto w = idf(v);
  EXPECT_DOUBLE_EQ(w[*v.index_of("b")], 1.0);
  EXPECT_NEAR(w[*v.index_of("c")], std::log(1.5) + 1.0, 1e-12);
  EXPECT_NEAR(w[*v.index_of("c")], 1.405465, 1e-6);
  const auto all = idf(fit_vocabulary(std::vector<TokenDoc>{doc({"a", "b"}), doc({"b", "a"})}, {}));
  for (double x : all) EXPECT_DOUBLE_EQ(x, 1.0);
}

TEST(VectorizeTfidf, HandComputedWeights) {
  FeatureConfig cfg{FeatureMode::Tfidf, 1, false};
  const auto v = fit_vocabulary(std::vector<TokenDoc>{doc({"b", "c"}), doc({"b"})}, cfg);
  const auto x = vectorize_tfidf(doc({"b", "b", "c"}), v, cfg);
  const double wb = 2.0 * 1.0;
  const double wc = 1.0 * (std::log(1.5) + 1.0);
  const double norm = std::sqrt(wb * wb + wc * wc);
  EXPECT_NEAR(at(x, *v.index_of("b")), wb / norm, 1e-12);
  EXPECT_NEAR(at(x, *v.index_of("c")), wc / norm, 1e-12);
  EXPECT_NEAR(x.squared_norm(), 1.0, 1e-12);

  const auto single = vectorize_tfidf(doc({"c"}), v, cfg);
  EXPECT_EQ(single.nnz(), 1u);
  EXPECT_NEAR(single.values()[0], 1.0, 1e-12);
  EXPECT_TRUE(vectorize_tfidf(doc({}), v, cfg).empty());
}

TEST(VectorizeTfidf, SublinearTf) {
  FeatureConfig cfg{FeatureMode::Tfidf, 1, true};
  const auto v = fit_vocabulary(std::vector<TokenDoc>{doc({"b", "c"}), doc({"b"})}, cfg);
  const auto x = vectorize_tfidf(doc({"b", "b", "b", "c"}), v, cfg);
  const double wb = 1.0 + std::log(3.0);
  const double wc = std::log(1.5) + 1.0;
  EXPECT_NEAR(at(x, 0) / at(x, 1), wb / wc, 1e-12);
}

TEST(VectorizeTfidf, UnitNormProperty) {
  Rng rng(31);
  std::vector<TokenDoc> docs;
  for (int i = 0; i < 40; ++i) docs.push_back(doc(random_tokens(rng)));
  for (bool sub : {false, true}) {
    FeatureConfig cfg{FeatureMode::Tfidf, 1, sub};
    const Featurizer f(fit_vocabulary(docs, cfg), cfg);
    for (int i = 0; i < 200; ++i) {
      const auto x = f(doc(random_tokens(rng)));
      if (!x.empty()) ASSERT_NEAR(std::sqrt(x.squared_norm()), 1.0, 1e-9);
    }
  }
}

TEST(VectorizeBow, Linearity) {
  Rng rng(8);
  std::vector<TokenDoc> docs;
  for (int i = 0; i < 30; ++i) docs.push_back(doc(random_tokens(rng)));
  const auto v = fit_vocabulary(docs, {});
  for (int i = 0; i < 200; ++i) {
    auto a = random_tokens(rng);
    const auto b = random_tokens(rng);
    const auto sum = vectorize_bow(a, v) + vectorize_bow(b, v);
    a.insert(a.end(), b.begin(), b.end());
    ASSERT_EQ(vectorize_bow(a, v), sum);
  }
}

TEST(SparseVector, MatchesDenseArithmetic) {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t dim = 1 + rng.below(60);
    const auto a = random_sparse(rng, dim);
    const auto b = random_sparse(rng, dim);
    const auto da = a.to_dense();
    const auto db = b.to_dense();
    double dot = 0, sq = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      dot += da[i] * db[i];
      sq += da[i] * da[i];
    }
    ASSERT_NEAR(a.dot(b), dot, 1e-12);
    ASSERT_NEAR(a.dot(std::span<const double>(db)), dot, 1e-12);
    ASSERT_NEAR(a.squared_norm(), sq, 1e-12);
    const auto s = (a + b).to_dense();
    for (std::size_t i = 0; i < dim; ++i) ASSERT_NEAR(s[i], da[i] + db[i], 1e-12);
    std::vector<double> acc = db;
    a.add_to(acc, 0.5);
    for (std::size_t i = 0; i < dim; ++i) ASSERT_NEAR(acc[i], db[i] + 0.5 * da[i], 1e-12);
    // Storage invariants.
    const auto idx = a.indices();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      ASSERT_LT(idx[k], dim);
      ASSERT_NE(a.values()[k], 0.0);
      if (k) ASSERT_LT(idx[k - 1], idx[k]);
    }
    ASSERT_EQ(SparseVector::from_dense(da), a);
  }
}

TEST(SparseVector, RepeatsSumAndZerosDrop) {
  const auto v = SparseVector::from_entries(5, {{3, 1.0}, {1, 2.0}, {3, -1.0}, {1, 0.5}});
  ASSERT_EQ(v.nnz(), 1u);
  EXPECT_EQ(v.indices()[0], 1u);
  EXPECT_EQ(v.values()[0], 2.5);
  EXPECT_THROW(SparseVector::from_entries(2, {{2, 1.0}}), DataError);
  EXPECT_THROW(SparseVector(2) + SparseVector(3), DataError);
}

TEST(Vocabulary, JsonRoundTrip) {
  FeatureConfig cfg{FeatureMode::Tfidf, 2, true};
  const auto v = fit_vocabulary(std::vector<TokenDoc>{doc({"a", "b"}), doc({"b", "c", "a"}), doc({"c"})}, cfg);
  const auto j = to_json(v, cfg);
  EXPECT_EQ(j.at("feature_mode"), "tfidf");
  EXPECT_EQ(j.at("n_docs"), 3);
  const auto [v2, cfg2] = vocabulary_from_json(j);
  EXPECT_EQ(v2, v);
  EXPECT_EQ(cfg2, cfg);
  auto bad = j;
  bad["terms"] = {"b", "a", "c"};
  EXPECT_THROW(vocabulary_from_json(bad), DataError);
  bad = j;
  bad["feature_mode"] = "hashing";
  EXPECT_THROW(vocabulary_from_json(bad), DataError);
}

TEST(Featurizer, ModeSelectsVectorizer) {
  const std::vector<TokenDoc> docs = {doc({"a", "b"}), doc({"b"})};
  FeatureConfig bow;
  FeatureConfig tfidf{FeatureMode::Tfidf, 1, false};
  const Featurizer fb(fit_vocabulary(docs, bow), bow);
  const Featurizer ft(fit_vocabulary(docs, tfidf), tfidf);
  EXPECT_EQ(fb(doc({"b", "b"})).values()[0], 2.0);
  EXPECT_NEAR(ft(doc({"b", "b"})).values()[0], 1.0, 1e-12);
  EXPECT_EQ(fb.transform(docs).size(), 2u);
}
