#include <benchmark/benchmark.h>

#include <filesystem>

#include "hatescan/eval.hpp"
#include "hatescan/features.hpp"
#include "hatescan/linmodels.hpp"
#include "hatescan/pipeline.hpp"
#include "hatescan/random.hpp"
#include "hatescan/textprep.hpp"

using namespace hatescan;

namespace {

const char* kWords[] = {"Die", "Soldaten", "sind", "nicht", "schuld", "Krieg", "Frieden", "für", "Über", "Häuser",
                        "Israel", "Gaza", "Hilfe", "Terror", "Geiseln", "Kinder", "Regierung", "Bomben", "!!!",
                        "😀", "2023", "endlich", "wieder", "Menschen", "Angriffe", "keine", "Nachrichten"};
constexpr std::size_t kWordCount = sizeof(kWords) / sizeof(kWords[0]);

PipelineConfig pipeline() {
  const std::filesystem::path data(HATESCAN_DATA_DIR);
  return PipelineConfig::from_files(data / "stopwords_de.txt", data / "negations_de.txt", data / "lemmas_de.tsv");
}

std::vector<Comment> comments(std::size_t n) {
  Rng rng(7);
  std::vector<Comment> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    const auto len = 5 + rng.below(30);
    for (std::uint64_t k = 0; k < len; ++k) text += std::string(kWords[rng.below(kWordCount)]) + " ";
    out.push_back(Comment{"c" + std::to_string(i), "v", Source::Public, Date(2023, 10, 10), text});
  }
  return out;
}

std::vector<Example> examples(std::size_t n) {
  const auto cfg = pipeline();
  const auto docs = preprocess_all(comments(n), cfg);
  std::vector<Example> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    // Label leans on one token so the problem is learnable but noisy.
    const bool hate = std::find(docs[i].tokens.begin(), docs[i].tokens.end(), "terror") != docs[i].tokens.end();
    out.push_back(Example{docs[i].comment_id, docs[i], (hate ^ (i % 7 == 0)) ? 1 : 0});
  }
  return out;
}

void BM_Preprocess(benchmark::State& state) {
  const auto cfg = pipeline();
  const auto corpus = comments(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(preprocess_all(corpus, cfg, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Preprocess)->Arg(1000)->Arg(10000);

void BM_PreprocessParallel(benchmark::State& state) {
  const auto cfg = pipeline();
  const auto corpus = comments(10000);
  for (auto _ : state) benchmark::DoNotOptimize(preprocess_all(corpus, cfg, 0));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_PreprocessParallel)->UseRealTime();

void BM_Vectorize(benchmark::State& state) {
  const auto items = examples(5000);
  std::vector<TokenDoc> docs;
  for (const auto& e : items) docs.push_back(e.doc);
  FeatureConfig fc;
  fc.mode = state.range(0) ? FeatureMode::Tfidf : FeatureMode::Bow;
  for (auto _ : state) {
    const Featurizer f(fit_vocabulary(docs, fc), fc);
    benchmark::DoNotOptimize(f.transform(docs));
  }
  state.SetItemsProcessed(state.iterations() * 5000);
}
BENCHMARK(BM_Vectorize)->Arg(0)->Arg(1);

void BM_TrainLr(benchmark::State& state) {
  const auto items = examples(static_cast<std::size_t>(state.range(0)));
  ModelSpec spec;
  spec.lr.c_inverse_reg = 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_model(items, spec));
}
BENCHMARK(BM_TrainLr)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_TrainSvm(benchmark::State& state) {
  const auto items = examples(5000);
  ModelSpec spec;
  spec.algo = Algo::Svm;
  for (auto _ : state) benchmark::DoNotOptimize(fit_model(items, spec));
}
BENCHMARK(BM_TrainSvm)->Unit(benchmark::kMillisecond);

void BM_Auroc(benchmark::State& state) {
  Rng rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(rng.below(2));
    s[i] = rng.uniform() + 0.2 * y[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(auroc_binary(s, y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Auroc)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
