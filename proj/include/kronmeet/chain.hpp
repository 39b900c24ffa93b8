#pragma once

#include "kronmeet/graph.hpp"

#include <Eigen/Core>

#include <memory>
#include <vector>

namespace kronmeet {

inline constexpr double kRowSumTolerance = 1e-12;

/// Probability vector on the nodes, summing to one.
class StationaryDistribution {
 public:
  /// Rejects negative entries and sums off by more than 1e-9; anything
  /// accepted is rescaled to sum to one exactly (up to rounding).
  explicit StationaryDistribution(Eigen::VectorXd values);

  static StationaryDistribution uniform(int n);

  const Eigen::VectorXd& values() const noexcept { return values_; }
  int size() const noexcept { return static_cast<int>(values_.size()); }
  double operator()(int i) const { return values_(i); }
  bool strictly_positive() const { return (values_.array() > 0.0).all(); }

  /// ‖πᵀP − πᵀ‖∞.
  double residual(const Eigen::MatrixXd& transition) const;

 private:
  Eigen::VectorXd values_;
};

/// Row-stochastic transition matrix whose positive entries lie on the arcs
/// of its support graph. Only `validate` constructs one.
class StochasticMatrix {
 public:
  const Eigen::MatrixXd& matrix() const noexcept { return p_; }
  const Digraph& graph() const noexcept { return *graph_; }
  const std::shared_ptr<const Digraph>& graph_ptr() const noexcept { return graph_; }
  int size() const noexcept { return static_cast<int>(p_.rows()); }
  double operator()(int i, int j) const { return p_(i, j); }

  /// Rows whose sum was within tolerance of one but not exactly one, and
  /// were rescaled during validation.
  int renormalized_rows() const noexcept { return renormalized_rows_; }

 private:
  StochasticMatrix(Eigen::MatrixXd p, std::shared_ptr<const Digraph> g, int renormalized)
      : p_(std::move(p)), graph_(std::move(g)), renormalized_rows_(renormalized) {}

  friend StochasticMatrix validate(const Eigen::MatrixXd&, std::shared_ptr<const Digraph>);

  Eigen::MatrixXd p_;
  std::shared_ptr<const Digraph> graph_;
  int renormalized_rows_ = 0;
};

StochasticMatrix validate(const Eigen::MatrixXd& p, std::shared_ptr<const Digraph> g);
StochasticMatrix validate(const Eigen::MatrixXd& p, const Digraph& g);

enum class ClassKind { Absorbing, Transient };

/// Communicating-class decomposition of the positive support of a chain.
struct ChainStructure {
  std::vector<std::vector<int>> classes;
  std::vector<ClassKind> kinds;
  std::vector<int> periods;
  std::vector<int> class_of;

  std::vector<int> absorbing_classes() const;
  bool single_absorbing() const { return absorbing_classes().size() == 1; }
  bool irreducible() const { return classes.size() == 1; }
  bool ergodic() const { return irreducible() && periods.front() == 1; }
};

ChainStructure classify(const Eigen::MatrixXd& p);
ChainStructure classify(const StochasticMatrix& p);

/// Unique stationary distribution of a single-absorbing chain, by a direct
/// solve of (Pᵀ − I)π = 0 with one equation replaced by Σπ = 1.
StationaryDistribution stationary_distribution(const Eigen::MatrixXd& p);
StationaryDistribution stationary_distribution(const StochasticMatrix& p);

/// −Σ πᵢ pᵢⱼ log pᵢⱼ in nats, with 0·log 0 = 0.
double entropy_rate(const Eigen::MatrixXd& p, const StationaryDistribution& pi);
double entropy_rate(const StochasticMatrix& p, const StationaryDistribution& pi);

/// Uniform weight 1/outdeg(i) on every outgoing arc, self-loops included.
StochasticMatrix equal_neighbor(const Digraph& g);
StochasticMatrix equal_neighbor(std::shared_ptr<const Digraph> g);

}  // namespace kronmeet
