#include <gtest/gtest.h>

#include "hatescan/error.hpp"
#include "hatescan/model_io.hpp"
#include "hatescan/pipeline.hpp"
#include "hatescan/random.hpp"
#include "test_support.hpp"

using namespace hatescan;
using hatescan::testing::TempDir;

namespace {

const char* kWords[] = {"hass", "frieden", "krieg", "nicht", "gut", "boese", "israel", "gaza", "hilfe", "terror"};

std::vector<Example> random_examples(Rng& rng, std::size_t n, int classes) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(classes));
    std::vector<std::string> t;
    t.push_back(kWords[label]);  // class signal
    for (int k = 0; k < 3; ++k) t.push_back(kWords[rng.below(10)]);
    const auto id = "e" + std::to_string(i);
    out.push_back(Example{id, TokenDoc{id, t}, label});
  }
  return out;
}

ModelSpec spec_for(Task task, Algo algo, FeatureMode mode = FeatureMode::Bow) {
  ModelSpec s;
  s.task = task;
  s.algo = algo;
  s.features.mode = mode;
  s.seed = 42;
  s.pipeline_fingerprint = "pf";
  return s;
}

}  // namespace

TEST(FitModel, AllTaskAlgoCombinationsRoundTripExactly) {
  Rng rng(60);
  for (Task task : {Task::Hate, Task::Sentiment}) {
    const auto items = random_examples(rng, 60, num_classes(task));
    for (Algo algo : {Algo::Lr, Algo::Svm}) {
      for (FeatureMode mode : {FeatureMode::Bow, FeatureMode::Tfidf}) {
        const auto model = fit_model(items, spec_for(task, algo, mode));
        EXPECT_TRUE(model.converged());
        const auto j = to_json(model);
        const auto back = model_from_json(nlohmann::json::parse(j.dump(2)));
        EXPECT_EQ(to_json(back).dump(), j.dump());
        for (int i = 0; i < 50; ++i) {
          std::vector<std::string> t;
          for (int k = 0; k < 5; ++k) t.push_back(kWords[rng.below(10)]);
          t.push_back("unbekannt");
          const TokenDoc d{"q", t};
          ASSERT_EQ(back.scores(back.featurize(d)), model.scores(model.featurize(d)));
          ASSERT_EQ(back.predict_class(back.featurize(d)), model.predict_class(model.featurize(d)));
        }
      }
    }
  }
}

TEST(FitModel, BitIdenticalAcrossRuns) {
  Rng rng(61);
  const auto items = random_examples(rng, 50, 3);
  for (Algo algo : {Algo::Lr, Algo::Svm}) {
    const auto a = to_json(fit_model(items, spec_for(Task::Sentiment, algo))).dump();
    const auto b = to_json(fit_model(items, spec_for(Task::Sentiment, algo))).dump();
    EXPECT_EQ(a, b);
  }
}

TEST(FitModel, ArtifactCarriesConfigAndFingerprints) {
  Rng rng(62);
  const auto items = random_examples(rng, 40, 2);
  auto spec = spec_for(Task::Hate, Algo::Lr);
  spec.lr = LrConfig::from_penalty(10.0);
  const auto model = fit_model(items, spec);
  const auto j = to_json(model);
  EXPECT_EQ(j.at("format_version"), kModelFormatVersion);
  EXPECT_EQ(j.at("task"), "hate");
  EXPECT_EQ(j.at("feature_mode"), "bow");
  EXPECT_EQ(j.at("config").at("lr").at("regularization_key"), "lambda");
  EXPECT_DOUBLE_EQ(j.at("config").at("lr").at("lambda").get<double>(), 10.0);
  EXPECT_EQ(j.at("pipeline_fingerprint"), "pf");
  EXPECT_EQ(j.at("train_fingerprint"), train_fingerprint(items, 42));
  EXPECT_NE(train_fingerprint(items, 42), train_fingerprint(items, 43));
  EXPECT_EQ(j.at("weights").size(), model.vocabulary().size());
  EXPECT_TRUE(j.contains("converged"));
}

TEST(FitModel, TuningIsRecordedAndApplied) {
  Rng rng(63);
  const auto items = random_examples(rng, 60, 2);
  auto spec = spec_for(Task::Hate, Algo::Svm);
  spec.svm_grid = kDefaultSvmGrid;
  spec.tune_folds = 5;
  const auto model = fit_model(items, spec);
  ASSERT_TRUE(model.tuning);
  EXPECT_EQ(model.tuning->table.size(), kDefaultSvmGrid.size());
  EXPECT_EQ(model.tuning->k, 5);
  EXPECT_EQ(model.config.at("svm").at("c").get<double>(), model.tuning->best_c);
  const auto back = model_from_json(to_json(model));
  ASSERT_TRUE(back.tuning);
  EXPECT_EQ(back.tuning->best_c, model.tuning->best_c);
}

TEST(FitModel, RejectsBadInput) {
  EXPECT_THROW(fit_model(std::vector<Example>{}, spec_for(Task::Hate, Algo::Lr)), DataError);
  std::vector<Example> items = {Example{"a", TokenDoc{"a", {"x"}}, 0}, Example{"b", TokenDoc{"b", {"y"}}, 2}};
  EXPECT_THROW(fit_model(items, spec_for(Task::Hate, Algo::Lr)), DataError);
}

TEST(ModelIo, TamperedArtifactsAreRejected) {
  Rng rng(64);
  const auto model = fit_model(random_examples(rng, 30, 2), spec_for(Task::Hate, Algo::Lr));
  const auto j = to_json(model);

  auto version = j;
  version["format_version"] = 99;
  EXPECT_THROW(model_from_json(version), ConfigError);

  auto vocab = j;
  vocab["vocabulary"]["doc_freq"][0] = vocab["vocabulary"]["doc_freq"][0].get<int>() + 1;
  EXPECT_THROW(model_from_json(vocab), ConfigError);

  auto dims = j;
  dims["weights"].push_back(0.5);
  EXPECT_THROW(model_from_json(dims), DataError);

  auto missing = j;
  missing.erase("bias");
  EXPECT_THROW(model_from_json(missing), DataError);
}

TEST(ModelIo, SaveLoadFile) {
  Rng rng(65);
  const auto model = fit_model(random_examples(rng, 30, 3), spec_for(Task::Sentiment, Algo::Svm));
  TempDir dir;
  save_model(model, dir / "model.json");
  const auto back = load_model(dir / "model.json");
  EXPECT_EQ(to_json(back).dump(), to_json(model).dump());
  EXPECT_THROW(load_model(dir / "absent.json"), ConfigError);
  hatescan::testing::spit(dir / "broken.json", "{not json");
  EXPECT_THROW(load_model(dir / "broken.json"), DataError);
}
