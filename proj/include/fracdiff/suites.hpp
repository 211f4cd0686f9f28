#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracdiff/config.hpp"

namespace fracdiff {

struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;
  double budget = 0.0;
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

struct SuiteOptions {
  /// Pair source atoms with the wrong sign in the weak-form sentinel.
  bool flip_atom_sign = false;
};

/// contour, kernels, constant_order, laplace_identity, weak_form.
const std::vector<std::string>& suite_names();

/// Runs one suite ("all" runs every suite) on the problem in `config`.
/// Throws config_error for an unknown suite name. Checks that need a
/// constant-order 1D constant-coefficient problem are skipped otherwise.
std::vector<CheckResult> run_suite(const std::string& name, const RunConfig& config, const SuiteOptions& options = {});

nlohmann::json to_json(const CheckResult& check);

}  // namespace fracdiff
