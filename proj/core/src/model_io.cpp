#include "hatescan/model_io.hpp"

#include <fstream>

#include "hatescan/error.hpp"

namespace hatescan {

using nlohmann::json;

namespace {

json linear_json(const LinearModel& m) {
  return json{{"weights", m.weights},
              {"bias", m.bias},
              {"positive_class", m.positive_class},
              {"role", m.role == ModelRole::Hate ? "hate" : "sentiment_ovr_component"},
              {"converged", m.converged},
              {"iterations", m.iterations},
              {"config_fingerprint", m.config_fingerprint}};
}

LinearModel linear_from_json(const json& j, Algo algo, FeatureMode mode, std::size_t dim) {
  LinearModel m;
  m.algo = algo;
  m.feature_mode = mode;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.positive_class = j.at("positive_class").get<std::string>();
  m.role = j.at("role").get<std::string>() == "hate" ? ModelRole::Hate : ModelRole::SentimentOvrComponent;
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<int>();
  m.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  if (m.weights.size() != dim) {
    throw DataError("model artifact: weights dimension " + std::to_string(m.weights.size()) +
                    " does not match vocabulary size " + std::to_string(dim));
  }
  return m;
}

}  // namespace

json to_json(const TrainedModel& model) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["task"] = to_string(model.task);
  j["algo"] = to_string(model.algo);
  j["feature_mode"] = to_string(model.features().mode);
  j["vocabulary"] = to_json(model.vocabulary(), model.features());
  j["vocabulary_fingerprint"] = model.vocabulary().fingerprint();
  if (model.binary) {
    j["weights"] = model.binary->weights;
    j["bias"] = model.binary->bias;
    j["positive_class"] = model.binary->positive_class;
    json meta = linear_json(*model.binary);
    for (const char* key : {"weights", "bias", "positive_class"}) meta.erase(key);
    j["model"] = std::move(meta);
  } else {
    for (std::size_t c = 0; c < 3; ++c) {
      j["components"][std::string(to_string(kSentimentOrder[c]))] = linear_json(model.ovr->components[c]);
    }
  }
  j["config"] = model.config;
  j["config_fingerprint"] = model.config_fingerprint;
  j["converged"] = model.converged();
  j["iterations"] = model.iterations();
  j["train_fingerprint"] = model.train_fingerprint;
  j["pipeline_fingerprint"] = model.pipeline_fingerprint;
  j["seed"] = model.seed;
  if (model.tuning) j["svm_tuning"] = to_json(*model.tuning);
  return j;
}

TrainedModel model_from_json(const json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw ConfigError("model artifact: unsupported format_version " + std::to_string(version));
    }
    TrainedModel model;
    const auto task = parse_task(j.at("task").get<std::string>());
    const auto algo = parse_algo(j.at("algo").get<std::string>());
    if (!task || !algo) throw DataError("model artifact: unknown task or algo");
    model.task = *task;
    model.algo = *algo;

    auto [vocab, features] = vocabulary_from_json(j.at("vocabulary"));
    const auto recorded = j.at("vocabulary_fingerprint").get<std::string>();
    if (vocab.fingerprint() != recorded) {
      throw ConfigError("model artifact: vocabulary fingerprint mismatch (recorded " + recorded +
                        ", computed " + vocab.fingerprint() + ")");
    }
    if (j.at("feature_mode").get<std::string>() != to_string(features.mode)) {
      throw ConfigError("model artifact: feature_mode disagrees with the embedded vocabulary");
    }
    const std::size_t dim = vocab.size();
    model.featurizer.emplace(std::move(vocab), features);

    if (model.task == Task::Hate) {
      json merged = j.at("model");
      for (const char* key : {"weights", "bias", "positive_class"}) merged[key] = j.at(key);
      model.binary = linear_from_json(merged, model.algo, features.mode, dim);
    } else {
      OvrModel ovr;
      for (std::size_t c = 0; c < 3; ++c) {
        ovr.components[c] = linear_from_json(j.at("components").at(std::string(to_string(kSentimentOrder[c]))),
                                             model.algo, features.mode, dim);
      }
      model.ovr = std::move(ovr);
    }
    model.config = j.at("config");
    model.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    model.train_fingerprint = j.at("train_fingerprint").get<std::string>();
    model.pipeline_fingerprint = j.at("pipeline_fingerprint").get<std::string>();
    model.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("svm_tuning")) model.tuning = tuning_from_json(j.at("svm_tuning"));
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("model artifact: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model artifact " + path.string());
  out << to_json(model).dump(2) << '\n';
  if (!out) throw IoError("failed writing model artifact " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model artifact " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("model artifact " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace hatescan
