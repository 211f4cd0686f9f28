#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracdiff/solver.hpp"
#include "fracdiff/sources.hpp"
#include "fracdiff/types.hpp"

namespace fracdiff {

struct OutputSettings {
  std::vector<double> times;
  std::string csv;             // empty: no trajectory file
  std::string report;          // empty: no report file
  std::string matrix_market;   // empty: no operator dump
};

struct VerificationSettings {
  std::vector<cplx> p_samples{cplx(2.0, 0.0), cplx(4.0, 0.0), cplx(3.0, 3.0)};
  double bump_center = 0.5;
  double bump_width = 0.3;
  std::uint64_t seed = 20240611;
  bool oracle = true;  // constant-order comparison in the run report
};

/// Everything a run needs, with every field evaluated on the mesh.
struct RunConfig {
  SolverConfig solver;
  Mesh mesh;
  Vec u0;
  SourceTerm sources;
  OutputSettings output;
  VerificationSettings verification;
  /// The input with defaults filled in and CSV references inlined; parsing it
  /// again gives the same RunConfig.
  nlohmann::json resolved;
};

/// Throws config_error on malformed input. Kernel admissibility is not
/// checked here. Relative CSV paths are taken from `base_dir`.
RunConfig parse_config(const nlohmann::json& input, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Nodal vector from a field or profile description: a number, an array of
/// nodal values, {"csv": path} with (node, value) rows, or a preset string
/// ("constant c", "two_zones a|b split at x=s", "sin_mode k [l]",
/// "gaussian c1 [c2] w", "indicator a b [c d]").
Vec evaluate_field(const nlohmann::json& spec, const Mesh& mesh, const std::filesystem::path& base_dir = {});

/// Benchmark problem: unit interval, n = 200, a = 1, q = 0, constant order
/// 0.5, u0 = sin(pi x), outputs at 0.1, 0.5 and 1.
nlohmann::json benchmark_config();

/// Constant order beta when the kernel is a single power law with unit
/// weight at every node.
std::optional<double> constant_order_of(const KernelSpec& spec);

}  // namespace fracdiff
