#pragma once

#include <string>
#include <vector>

#include "cylint/io.hpp"
#include "cylint/metrics.hpp"

namespace cylint {

struct FieldError {
  std::string path;     // e.g. "$.model.params.alpha"
  std::string message;
};

// Full schema check without executing. Empty result means valid.
std::vector<FieldError> validate_config(const json& config);

// Builders shared by the runner and the bindings. These assume a validated
// config block and throw std::invalid_argument otherwise.
LevyModel model_from_config(const json& config);
Matrix operator_from_config(const json& block, Eigen::Index d_v,
                            Eigen::Index d_u);
IntegrandRule rule_from_config(const json& block, Eigen::Index d_v,
                               Eigen::Index d_u);

// Named fixture arrays for the decoupling / conditioning experiments.
TangentRow tangent_row_fixture(const std::string& name, int n);

struct RunOutcome {
  bool all_passed = false;
  ordered_json report;
};

// Executes the experiment, writes report.json and CSV detail files under
// out_dir. Thread count never changes numeric outputs.
RunOutcome run_experiment(const json& config, const std::string& out_dir,
                          int threads, const std::string& fixture_dir);

}  // namespace cylint
