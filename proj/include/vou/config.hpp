#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "vou/harness.hpp"

namespace vou {

// Built-in scenarios. "paper" is the default; "paper-fig3" the fractional MLE study over dt in {0.2, 0.5, 1}.
std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string& name);

// Fields absent from the object come from its preset. A `params` object, when present,
// must list b, beta, sigma and x0. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

// ValidationError with the line number on parse errors, or the offending field otherwise.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

}  // namespace vou
