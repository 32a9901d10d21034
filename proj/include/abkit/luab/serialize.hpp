#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "abkit/luab/model.hpp"
#include "abkit/luab/robustness.hpp"
#include "abkit/luab/train.hpp"

namespace abkit::luab {

nlohmann::ordered_json to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const Model& model);
// Throws Error(Io) when the file cannot be read, Error(MalformedRecord) on bad content.
Model load_model(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const RobustnessReport& r);
nlohmann::ordered_json to_json(const EpochStats& e);

std::string curves_csv(const std::vector<EpochStats>& curves);

}  // namespace abkit::luab
