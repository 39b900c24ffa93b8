#pragma once

#include "kronmeet/chain.hpp"
#include "kronmeet/optimize.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace kronmeet {

enum class StrategyKind { RandomWalk, Hamiltonian, MaxEntropy, MinKemeny, Stationary, Custom };
enum class TourDirection { Forward, Reverse };

struct StrategySpec {
  StrategyKind kind = StrategyKind::RandomWalk;
  TourDirection direction = TourDirection::Forward;
  /// Required by MaxEntropy and MinKemeny; uniform when left empty.
  std::optional<StationaryDistribution> target_pi;
  /// Required by Custom.
  std::optional<Eigen::MatrixXd> matrix;
};

/// Accepts rw, stationary, tour, reverse-tour, entropy, kemeny (and a few
/// aliases); anything else is InvalidArgument.
StrategySpec parse_strategy(std::string_view name);
std::string strategy_name(const StrategySpec& spec);

/// Permutation chain 1 → 2 → … → n → 1 (or its inverse). Needs the cycle
/// arcs of a generated ring or complete graph.
StochasticMatrix hamiltonian_tour(std::shared_ptr<const Digraph> g, TourDirection direction = TourDirection::Forward);
/// Identity chain; needs every self-loop.
StochasticMatrix stationary_chain(std::shared_ptr<const Digraph> g);

OptimizationResult max_entropy_chain(std::shared_ptr<const Digraph> g, const StationaryDistribution& pi,
                                     const OptimizerOptions& options = {});
OptimizationResult min_kemeny_chain(std::shared_ptr<const Digraph> g, const StationaryDistribution& pi, int starts,
                                    const OptimizerOptions& options = {});

/// Materialises any strategy kind as a chain (optimizing where needed).
StochasticMatrix build_strategy(const StrategySpec& spec, std::shared_ptr<const Digraph> g,
                                const OptimizerOptions& options = {});

}  // namespace kronmeet
