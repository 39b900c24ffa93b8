#include "repro.hpp"

#include "kronmeet/error.hpp"
#include "kronmeet/io.hpp"
#include "kronmeet/meeting.hpp"
#include "kronmeet/strategies.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <vector>

namespace kronmeet::cli {

namespace {

using nlohmann::json;
using GraphPtr = std::shared_ptr<const Digraph>;

constexpr double kDiscrepancyTol = 1e-6;

double mean_against(const StochasticMatrix& pursuer, const StationaryDistribution& pi_p,
                    const StochasticMatrix& evader, const StationaryDistribution& pi_e) {
  return mean_meeting_time(meeting_times(pursuer, evader), pi_p, pi_e);
}

struct Evader {
  std::string name;
  StochasticMatrix chain;
  StationaryDistribution pi;
};

std::vector<Evader> table_evaders(const GraphPtr& g, const OptimizerOptions& opts) {
  const auto uniform = StationaryDistribution::uniform(g->size());
  auto rw = equal_neighbor(g);
  auto pi_rw = stationary_distribution(rw);
  auto entropy = max_entropy_chain(g, uniform, opts);
  return {{"fast", hamiltonian_tour(g), uniform},
          {"random-walk", std::move(rw), std::move(pi_rw)},
          {"unpredictable", std::move(entropy.chain), uniform}};
}

json candidate_values(const GraphPtr& g, const Evader& e) {
  json out;
  out["stationary"] = io::number(mean_against(stationary_chain(g), e.pi, e.chain, e.pi));
  out["tour"] = io::number(mean_against(hamiltonian_tour(g), e.pi, e.chain, e.pi));
  out["reverse-tour"] =
      io::number(mean_against(hamiltonian_tour(g, TourDirection::Reverse), e.pi, e.chain, e.pi));
  return out;
}

json table(const std::string& graph_name, const std::function<Digraph(int)>& make, const ReproOptions& options,
           const std::function<void(json&, const GraphPtr&, const Evader&, const OptimizationResult&)>& annotate) {
  json rows = json::array();
  int discrepancies = 0;
  for (int n : {5, 6}) {
    auto g = std::make_shared<const Digraph>(make(n));
    for (const auto& e : table_evaders(g, options.optimizer)) {
      auto best = minimize_mean_meeting(g, e.chain, e.pi, e.pi, options.optimizer);
      json row{{"graph", graph_name},
               {"n", n},
               {"evader", e.name},
               {"objective", io::number(best.objective)},
               {"converged", best.converged},
               {"best_start", best.best_start},
               {"best_response", classify_response(best.chain)},
               {"candidates", candidate_values(g, e)},
               {"pursuer", io::matrix_to_json(best.chain.matrix())}};
      row["closed_form"] = nullptr;
      annotate(row, g, e, best);
      bool discrepancy = false;
      if (!row["closed_form"].is_null()) {
        discrepancy = !(std::abs(best.objective - row["closed_form"].get<double>()) <= kDiscrepancyTol);
      }
      row["discrepancy"] = discrepancy;
      discrepancies += discrepancy ? 1 : 0;
      rows.push_back(std::move(row));
    }
  }
  return json{{"rows", rows}, {"discrepancies", discrepancies}, {"tolerance", kDiscrepancyTol}};
}

double self_transition_mass(const StochasticMatrix& p) { return p.matrix().diagonal().mean(); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
}

}  // namespace

std::string classify_response(const StochasticMatrix& p, double tol) {
  auto g = p.graph_ptr();
  auto close = [&](const std::function<StochasticMatrix()>& make) {
    try {
      return (make().matrix() - p.matrix()).cwiseAbs().maxCoeff() <= tol;
    } catch (const Error&) {
      return false;
    }
  };
  if (close([&] { return stationary_chain(g); })) return "stationary";
  if (close([&] { return hamiltonian_tour(g); })) return "tour";
  if (close([&] { return hamiltonian_tour(g, TourDirection::Reverse); })) return "reverse-tour";
  return "other";
}

json repro_ring_table(const ReproOptions& options) {
  auto annotate = [](json& row, const GraphPtr& g, const Evader& e, const OptimizationResult&) {
    const int n = g->size();
    if (e.name == "fast") {
      row["closed_form"] = (n + 1) / 2.0;
      row["expected_response"] = n % 2 ? "stationary or reverse-tour" : "stationary";
    } else {
      row["expected_response"] = "tour";
    }
  };
  auto out = table("ring", [](int n) { return make_ring(n); }, options, annotate);
  out["target"] = "table1";
  return out;
}

json repro_complete_table(const ReproOptions& options) {
  auto annotate = [&](json& row, const GraphPtr& g, const Evader& e, const OptimizationResult&) {
    const int n = g->size();
    if (e.name == "fast") {
      row["closed_form"] = (n + 1) / 2.0;
      row["expected_response"] = n % 2 ? "stationary or reverse-tour" : "stationary";
      return;
    }
    row["closed_form"] = static_cast<double>(n);
    row["expected_response"] = "any";
    // Every feasible pursuer should give the same value here.
    FeasibleSet set(g, e.pi);
    double deviation = 0.0;
    const auto pursuers = default_starts(set, 20, options.optimizer.seed);
    for (const auto& x : pursuers) {
      auto p = validate(x, g);
      deviation = std::max(deviation, std::abs(mean_against(p, e.pi, e.chain, e.pi) - n));
    }
    row["random_pursuers"] = json{{"count", pursuers.size()}, {"max_deviation", deviation}};
  };
  auto out = table("complete", [](int n) { return make_complete(n); }, options, annotate);
  out["target"] = "table2";
  return out;
}

json repro_grid(const ReproOptions& options) {
  const auto& opts = options.optimizer;
  auto g = std::make_shared<const Digraph>(make_grid(3, 3));
  const auto uniform = StationaryDistribution::uniform(g->size());

  auto rw = equal_neighbor(g);
  const auto pi_rw = stationary_distribution(rw);
  auto entropy = maximize_entropy(g, uniform, opts);
  auto kemeny = minimize_kemeny(g, uniform, opts);
  struct Model {
    std::string name;
    StochasticMatrix chain;
    StationaryDistribution pi;
    json summary;
  };
  std::vector<Model> models{
      {"random-walk", rw, pi_rw, json{{"entropy_rate", entropy_rate(rw, pi_rw)}}},
      {"unpredictable", entropy.chain, uniform, json{{"entropy_rate", entropy.objective}}},
      {"fast", kemeny.chain, uniform, json{{"kemeny", kemeny.objective}, {"converged", kemeny.converged}}}};

  json rows = json::array();
  double self_vs_rw = 0.0, self_vs_fast = 0.0;
  bool all_beat = true;
  const auto stationary = stationary_chain(g);
  for (const auto& m : models) {
    auto best = minimize_mean_meeting(g, m.chain, m.pi, m.pi, opts);
    auto baseline_entropy = maximize_entropy(g, m.pi, opts);
    json baselines{{"random-walk", io::number(mean_against(rw, pi_rw, m.chain, m.pi))},
                   {"stationary", io::number(mean_against(stationary, m.pi, m.chain, m.pi))},
                   {"max-entropy", io::number(mean_against(baseline_entropy.chain, m.pi, m.chain, m.pi))}};
    double best_baseline = kInfinity;
    for (const auto& [name, v] : baselines.items()) best_baseline = std::min(best_baseline, io::to_number(v));
    const bool beats = best.objective <= best_baseline + kDiscrepancyTol;
    all_beat = all_beat && beats;
    const double self = self_transition_mass(best.chain);
    if (m.name == "random-walk") self_vs_rw = self;
    if (m.name == "fast") self_vs_fast = self;

    const auto evader_dot = to_dot(*g, &m.chain.matrix(), &m.pi.values(), "evader_" + m.name);
    const auto pursuer_dot = to_dot(*g, &best.chain.matrix(), &m.pi.values(), "pursuer_" + m.name);
    json row{{"evader", m.name},
             {"evader_summary", m.summary},
             {"pi", io::vector_to_json(m.pi.values())},
             {"evader_chain", io::matrix_to_json(m.chain.matrix())},
             {"pursuer_chain", io::matrix_to_json(best.chain.matrix())},
             {"objective", io::number(best.objective)},
             {"converged", best.converged},
             {"self_transition_mass", self},
             {"baselines", baselines},
             {"best_baseline", io::number(best_baseline)},
             {"beats_baselines", beats},
             {"dot", {{"evader", evader_dot}, {"pursuer", pursuer_dot}}}};
    if (options.out_dir) {
      std::filesystem::create_directories(*options.out_dir);
      write_file(*options.out_dir / ("grid_" + m.name + "_evader.dot"), evader_dot);
      write_file(*options.out_dir / ("grid_" + m.name + "_pursuer.dot"), pursuer_dot);
    }
    rows.push_back(std::move(row));
  }
  json out{{"target", "grid-figures"},
           {"rows", rows},
           {"all_beat_baselines", all_beat},
           {"pursuer_stays_more_vs_fast", self_vs_fast > self_vs_rw}};
  if (options.out_dir) write_file(*options.out_dir / "grid.json", out.dump(2));
  return out;
}

}  // namespace kronmeet::cli
