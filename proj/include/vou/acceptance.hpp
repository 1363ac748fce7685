#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace vou {

enum class Suite { Full, Fast };

Suite suite_from_string(const std::string& name);

struct AcceptanceOptions {
  std::uint64_t seed = 20240611;  // pinned master seed
  std::size_t threads = 0;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  nlohmann::json metrics = nlohmann::json::object();
};

constexpr int kCriterionCount = 11;

// Fast: the deterministic numerical checks (1-5, 11); Full: all eleven.
std::vector<int> suite_criteria(Suite suite);

// Exceptions thrown by a criterion count as a failure with the message as detail.
CriterionResult run_criterion(int id, const AcceptanceOptions& options = {});
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, const AcceptanceOptions& options = {});

std::string format_result_line(const CriterionResult& r);
// Timings are left out so that reruns produce identical files.
nlohmann::json acceptance_json(const std::vector<CriterionResult>& results, const AcceptanceOptions& options);

}  // namespace vou
