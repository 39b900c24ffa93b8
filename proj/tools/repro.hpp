#pragma once

#include "kronmeet/optimize.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace kronmeet::cli {

struct ReproOptions {
  OptimizerOptions optimizer;
  /// When set, DOT and JSON artifacts are also written here.
  std::optional<std::filesystem::path> out_dir;
};

/// Names a chain as "stationary", "tour", "reverse-tour" or "other" by
/// comparing it entrywise (max-abs within `tol`) with the reference chains
/// the graph supports.
std::string classify_response(const StochasticMatrix& p, double tol = 1e-3);

/// Best pursuer responses on rings (n = 5, 6) against the fast, random-walk
/// and unpredictable evaders, compared with the closed-form values.
nlohmann::json repro_ring_table(const ReproOptions& options);
/// Same on complete graphs, plus a sweep of random pursuers against the
/// uniform evader.
nlohmann::json repro_complete_table(const ReproOptions& options);
/// Optimized pursuers on the 3×3 grid against the three evader models with
/// baselines and DOT exports.
nlohmann::json repro_grid(const ReproOptions& options);

}  // namespace kronmeet::cli
