#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "hatescan/pipeline.hpp"

namespace hatescan {

inline constexpr int kModelFormatVersion = 1;

// Single JSON document: format_version, task, algo, feature_mode, embedded
// vocabulary, weights/bias (hate) or components (sentiment), config echo,
// converged flag and fingerprints. Doubles round-trip bit-exactly.
nlohmann::json to_json(const TrainedModel& model);
// Rejects documents whose embedded vocabulary no longer matches its recorded
// fingerprint (ConfigError).
TrainedModel model_from_json(const nlohmann::json& j);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace hatescan
