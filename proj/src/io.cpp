#include "kronmeet/io.hpp"

#include "kronmeet/error.hpp"

#include <cmath>
#include <limits>

namespace kronmeet::io {

json number(double value) {
  if (std::isfinite(value)) return value;
  if (std::isnan(value)) return "nan";
  return value > 0 ? "inf" : "-inf";
}

double to_number(const json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorKind::Parse, "expected a number or \"inf\", got " + value.dump());
}

json graph_to_json(const Digraph& g) {
  json edges = json::array();
  for (const auto& [i, j] : g.edges()) edges.push_back({i + 1, j + 1});
  return json{{"n", g.size()}, {"edges", edges}};
}

Digraph graph_from_json(const json& doc) { return parse_graph_json(doc.dump()); }

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& doc) {
  if (!doc.is_array() || doc.empty() || !doc[0].is_array()) throw Error(ErrorKind::Parse, "expected a matrix");
  const Eigen::Index rows = static_cast<Eigen::Index>(doc.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(doc[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!doc[i].is_array() || static_cast<Eigen::Index>(doc[i].size()) != cols) {
      throw Error(ErrorKind::Parse, "matrix row " + std::to_string(i + 1) + " has the wrong length");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = to_number(doc[i][j]);
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

Eigen::VectorXd vector_from_json(const json& doc) {
  if (!doc.is_array()) throw Error(ErrorKind::Parse, "expected a vector");
  Eigen::VectorXd v(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) v(static_cast<Eigen::Index>(i)) = to_number(doc[i]);
  return v;
}

json bool_matrix_to_json(const BoolMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(static_cast<bool>(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json chain_to_json(const StochasticMatrix& p, const StationaryDistribution* pi) {
  json doc{{"graph", graph_to_json(p.graph())}, {"P", matrix_to_json(p.matrix())}};
  if (pi) doc["pi"] = vector_to_json(pi->values());
  return doc;
}

StochasticMatrix chain_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("graph") || !doc.contains("P")) {
    throw Error(ErrorKind::Parse, "chain document needs \"graph\" and \"P\"");
  }
  return validate(matrix_from_json(doc["P"]), graph_from_json(doc["graph"]));
}

std::optional<StationaryDistribution> chain_pi_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("pi")) return std::nullopt;
  return StationaryDistribution(vector_from_json(doc["pi"]));
}

json meeting_to_json(const MeetingTimeMatrix& m, double mean) {
  return json{{"M", matrix_to_json(m.times)},
              {"mean", number(mean)},
              {"finite_pairs", bool_matrix_to_json(m.finite)},
              {"residual", m.residual}};
}

json finiteness_to_json(const FinitenessReport& report) {
  json witnesses = json::array();
  for (const auto& w : report.witnesses) {
    witnesses.push_back(
        {{"pair", {w.pursuer + 1, w.evader + 1}}, {"never_meets_from", {w.stuck_pursuer + 1, w.stuck_evader + 1}}});
  }
  return json{{"finite_pairs", bool_matrix_to_json(report.finite_pairs)},
              {"all_finite", report.all_finite},
              {"witnesses", witnesses}};
}

json batch_to_json(const TrialBatch& b) {
  return json{{"pursuer_start", b.pursuer_start + 1},
              {"evader_start", b.evader_start + 1},
              {"trials", b.trials},
              {"max_steps", b.max_steps},
              {"seed", b.seed},
              {"mean", number(b.mean)},
              {"standard_error", number(b.standard_error)},
              {"censored", b.censored}};
}

json options_to_json(const OptimizerOptions& o) {
  return json{{"seed", o.seed},
              {"starts", o.starts},
              {"gradient_tol", o.gradient_tol},
              {"constraint_tol", o.constraint_tol},
              {"max_outer", o.max_outer},
              {"max_inner", o.max_inner},
              {"initial_penalty", o.initial_penalty},
              {"max_penalty", o.max_penalty},
              {"threads", o.threads}};
}

OptimizerOptions options_from_json(const json& doc, OptimizerOptions o) {
  if (!doc.is_object()) throw Error(ErrorKind::Parse, "optimizer config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "seed") o.seed = value.get<std::uint64_t>();
    else if (key == "starts") o.starts = value.get<int>();
    else if (key == "gradient_tol") o.gradient_tol = value.get<double>();
    else if (key == "constraint_tol") o.constraint_tol = value.get<double>();
    else if (key == "max_outer") o.max_outer = value.get<int>();
    else if (key == "max_inner") o.max_inner = value.get<int>();
    else if (key == "initial_penalty") o.initial_penalty = value.get<double>();
    else if (key == "max_penalty") o.max_penalty = value.get<double>();
    else if (key == "threads") o.threads = value.get<int>();
    else throw Error(ErrorKind::InvalidArgument, "unknown optimizer option '" + key + "'");
  }
  return o;
}

json optimization_to_json(const OptimizationResult& r) {
  json starts = json::array();
  for (const auto& s : r.starts_summary) {
    starts.push_back({{"start", s.start},
                      {"objective", number(s.objective)},
                      {"converged", s.converged},
                      {"iterations", s.iterations},
                      {"constraint_residual", number(s.constraint_residual)}});
  }
  return json{{"objective", number(r.objective)},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"kkt_residual", number(r.kkt_residual)},
              {"constraint_residual", number(r.constraint_residual)},
              {"best_start", r.best_start},
              {"starts", starts},
              {"options", options_to_json(r.options)}};
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

}  // namespace kronmeet::io
