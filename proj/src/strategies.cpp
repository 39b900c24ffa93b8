#include "kronmeet/strategies.hpp"

#include "kronmeet/error.hpp"

namespace kronmeet {

StrategySpec parse_strategy(std::string_view name) {
  StrategySpec spec;
  if (name == "rw" || name == "random-walk") {
    spec.kind = StrategyKind::RandomWalk;
  } else if (name == "stationary" || name == "identity") {
    spec.kind = StrategyKind::Stationary;
  } else if (name == "tour" || name == "hamiltonian") {
    spec.kind = StrategyKind::Hamiltonian;
  } else if (name == "reverse-tour") {
    spec.kind = StrategyKind::Hamiltonian;
    spec.direction = TourDirection::Reverse;
  } else if (name == "entropy" || name == "max-entropy" || name == "unpredictable") {
    spec.kind = StrategyKind::MaxEntropy;
  } else if (name == "kemeny" || name == "min-kemeny" || name == "fast") {
    spec.kind = StrategyKind::MinKemeny;
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown strategy '" + std::string(name) + "'");
  }
  return spec;
}

std::string strategy_name(const StrategySpec& spec) {
  switch (spec.kind) {
    case StrategyKind::RandomWalk: return "rw";
    case StrategyKind::Hamiltonian: return spec.direction == TourDirection::Forward ? "tour" : "reverse-tour";
    case StrategyKind::MaxEntropy: return "entropy";
    case StrategyKind::MinKemeny: return "kemeny";
    case StrategyKind::Stationary: return "stationary";
    case StrategyKind::Custom: return "custom";
  }
  return "unknown";
}

StochasticMatrix hamiltonian_tour(std::shared_ptr<const Digraph> g, TourDirection direction) {
  const int n = g->size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int j = direction == TourDirection::Forward ? (i + 1) % n : (i + n - 1) % n;
    if (!g->has_edge(i, j)) {
      throw Error(ErrorKind::UnsupportedGraph, "graph lacks the tour arc (" + std::to_string(i + 1) + ", " +
                                                   std::to_string(j + 1) + ")");
    }
    p(i, j) = 1.0;
  }
  return validate(p, std::move(g));
}

StochasticMatrix stationary_chain(std::shared_ptr<const Digraph> g) {
  for (int i = 0; i < g->size(); ++i)
    if (!g->has_edge(i, i)) {
      throw Error(ErrorKind::Support, "node " + std::to_string(i + 1) + " has no self-loop");
    }
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(g->size(), g->size());
  return validate(identity, std::move(g));
}

OptimizationResult max_entropy_chain(std::shared_ptr<const Digraph> g, const StationaryDistribution& pi,
                                     const OptimizerOptions& options) {
  return maximize_entropy(std::move(g), pi, options);
}

OptimizationResult min_kemeny_chain(std::shared_ptr<const Digraph> g, const StationaryDistribution& pi, int starts,
                                    const OptimizerOptions& options) {
  OptimizerOptions opts = options;
  opts.starts = starts;
  return minimize_kemeny(std::move(g), pi, opts);
}

StochasticMatrix build_strategy(const StrategySpec& spec, std::shared_ptr<const Digraph> g,
                                const OptimizerOptions& options) {
  const auto pi = [&] { return spec.target_pi ? *spec.target_pi : StationaryDistribution::uniform(g->size()); };
  switch (spec.kind) {
    case StrategyKind::RandomWalk: return equal_neighbor(std::move(g));
    case StrategyKind::Hamiltonian: return hamiltonian_tour(std::move(g), spec.direction);
    case StrategyKind::Stationary: return stationary_chain(std::move(g));
    case StrategyKind::MaxEntropy: return max_entropy_chain(g, pi(), options).chain;
    case StrategyKind::MinKemeny: return min_kemeny_chain(g, pi(), options.starts, options).chain;
    case StrategyKind::Custom:
      if (!spec.matrix) throw Error(ErrorKind::InvalidArgument, "custom strategy needs a matrix");
      return validate(*spec.matrix, std::move(g));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown strategy kind");
}

}  // namespace kronmeet
