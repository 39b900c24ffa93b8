#pragma once

#include "kronmeet/chain.hpp"
#include "kronmeet/meeting.hpp"
#include "kronmeet/optimize.hpp"
#include "kronmeet/sim.hpp"

#include <json.hpp>

#include <optional>
#include <string_view>

namespace kronmeet::io {

using nlohmann::json;

/// Finite numbers as JSON numbers, ±inf as the strings "inf" / "-inf".
json number(double value);
double to_number(const json& value);

json graph_to_json(const Digraph& g);
Digraph graph_from_json(const json& doc);

/// {"graph": {...}, "P": [[...]], "pi": [...]?}; rows are full and dense.
json chain_to_json(const StochasticMatrix& p, const StationaryDistribution* pi = nullptr);
StochasticMatrix chain_from_json(const json& doc);
/// The optional "pi" member of a chain document.
std::optional<StationaryDistribution> chain_pi_from_json(const json& doc);

json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& doc);
json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& doc);
json bool_matrix_to_json(const BoolMatrix& m);

/// {"M": [[...]], "mean": number|"inf", "finite_pairs": [[bool]]}; rows are
/// pursuer starts.
json meeting_to_json(const MeetingTimeMatrix& m, double mean);
json finiteness_to_json(const FinitenessReport& report);
json batch_to_json(const TrialBatch& batch);
json options_to_json(const OptimizerOptions& options);
/// Overlays the recognised keys of `doc` on `base`; unknown keys are an
/// InvalidArgument error so typos do not pass silently.
OptimizerOptions options_from_json(const json& doc, OptimizerOptions base = {});
json optimization_to_json(const OptimizationResult& result);

json parse(std::string_view text);

}  // namespace kronmeet::io
