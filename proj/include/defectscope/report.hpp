#pragma once
#include <json.hpp>
#include <string>

#include "defectscope/problem.hpp"

namespace defectscope {

struct RunOutput {
  nlohmann::ordered_json json;
  std::string text;
  std::string csv;  // empty when the subcommand has no tabular output
};

RunOutput run_analyze(const ProblemSpec& spec);
RunOutput run_check(const ProblemSpec& spec);
RunOutput run_rates(const ProblemSpec& spec);
RunOutput run_predict(const ProblemSpec& spec);
RunOutput run_energy(const ProblemSpec& spec);

}  // namespace defectscope
