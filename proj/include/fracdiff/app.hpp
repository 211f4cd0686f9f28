#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "fracdiff/config.hpp"
#include "fracdiff/error.hpp"
#include "fracdiff/trajectory.hpp"

namespace fracdiff {

/// 1 for configuration and input problems, 2 for admissibility failures,
/// 3 for resolvent breakdown.
int exit_code_for(ErrorKind kind) noexcept;

/// Long format: t, node, x (and y in 2D), value; one row per (t, node).
/// At t = 0 the initial data is written.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const Mesh& mesh);

/// Max relative L2 distance to the constant-order modal oracle over the
/// positive output times, or the reason it does not apply.
nlohmann::json oracle_comparison(const RunConfig& config, const Trajectory& traj);

/// Solve, write the trajectory CSV and the JSON report named in the config.
int run_command(const std::filesystem::path& config_path, std::ostream& log);

/// Run a verification suite on the config (the benchmark if none) and write
/// the JSON report to `report_path` ("-" or empty: `out`).
int verify_command(const std::string& suite, const std::optional<std::filesystem::path>& config_path,
                   bool flip_atom_sign, const std::string& report_path, std::ostream& out, std::ostream& log);

/// Contour nodes and weights (re, im, w_re, w_im) the run would use.
int dump_contour_command(const std::filesystem::path& config_path, const std::string& out_path, std::ostream& out,
                         std::ostream& log);

}  // namespace fracdiff
