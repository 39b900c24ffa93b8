#pragma once

#include "kronmeet/chain.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kronmeet {

/// Row-stochastic matrices supported on a digraph with a prescribed
/// stationary distribution: P ≥ 0, P1 = 1, p_ij = 0 off the arcs, πᵀP = πᵀ.
///
/// `project` only enforces the row constraints (per-row Euclidean projection
/// onto the simplex over the row's arcs); stationarity is handled by the
/// optimizer as an equality constraint.
class FeasibleSet {
 public:
  FeasibleSet(std::shared_ptr<const Digraph> graph, StationaryDistribution pi);

  const Digraph& graph() const { return *graph_; }
  const std::shared_ptr<const Digraph>& graph_ptr() const { return graph_; }
  const StationaryDistribution& pi() const { return pi_; }
  int size() const { return graph_->size(); }
  /// Number of free coordinates (arcs).
  int dimension() const { return static_cast<int>(graph_->edge_count()); }

  Eigen::MatrixXd project(const Eigen::MatrixXd& x) const;
  /// Zeroes every off-support entry.
  Eigen::MatrixXd mask(const Eigen::MatrixXd& x) const;
  /// Pᵀπ − π.
  Eigen::VectorXd stationarity_residual(const Eigen::MatrixXd& p) const;

  /// Largest total mass 1 − (max flow) missing from any transport plan
  /// F ≥ 0 on the arcs with both marginals equal to π. Zero iff the set is
  /// nonempty.
  double transport_deficit() const;

  /// Diagonal scaling (Sinkhorn) of diag(π)X towards marginals (π, π),
  /// returned as a transition matrix. Keeps the zero pattern of `x`; exact
  /// rows, columns within `tol` when the pattern admits it.
  Eigen::MatrixXd balance(const Eigen::MatrixXd& x, int max_iterations = 20000, double tol = 1e-15) const;

 private:
  std::shared_ptr<const Digraph> graph_;
  StationaryDistribution pi_;
  std::vector<std::vector<int>> rows_;
};

/// Euclidean projection of `v` onto {x ≥ 0, Σx = 1}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

struct ObjectiveValue {
  double value;
  Eigen::MatrixXd gradient;
};

/// Smooth objective over transition matrices, to be minimized. `value` may
/// return +inf where the objective is undefined; the optimizer treats such
/// points as rejected steps.
struct Objective {
  std::string name;
  std::function<double(const Eigen::MatrixXd&)> value;
  std::function<ObjectiveValue(const Eigen::MatrixXd&)> evaluate;
};

/// Mean meeting time (π_e ⊗ π_p)ᵀ vec(M) as a function of the pursuer
/// matrix, with gradient by the adjoint of (I − (Pe ⊗ Pp)E).
Objective mean_meeting_objective(const Eigen::MatrixXd& evader, const StationaryDistribution& pi_pursuer,
                                 const StationaryDistribution& pi_evader);
/// Mean meeting time against a stationary evader with the pursuer's own
/// distribution (the Kemeny constant, return times included).
Objective kemeny_objective(const StationaryDistribution& pi);
/// Σ πᵢ pᵢⱼ log pᵢⱼ, i.e. the negated entropy rate. The gradient floors p
/// at 1e-12 inside the logarithm.
Objective negative_entropy_objective(const StationaryDistribution& pi);

struct OptimizerOptions {
  std::uint64_t seed = 1;
  int starts = 20;
  double gradient_tol = 1e-7;
  double constraint_tol = 1e-8;
  int max_outer = 500;
  int max_inner = 4000;
  double initial_penalty = 10.0;
  double max_penalty = 1e12;
  int threads = 1;
};

struct MeritRecord {
  int outer;
  int inner;
  double merit;
};

struct LocalSolution {
  Eigen::MatrixXd point;
  double objective = kInf();
  int iterations = 0;
  bool converged = false;
  double kkt_residual = kInf();
  double constraint_residual = kInf();
  std::string status;

  static constexpr double kInf() { return std::numeric_limits<double>::infinity(); }
};

/// Augmented Lagrangian on the stationarity constraint with spectral
/// projected-gradient inner solves (monotone Armijo backtracking on the
/// projection arc). Steps that land on +inf are halved.
LocalSolution solve_local(const FeasibleSet& set, const Objective& objective, const Eigen::MatrixXd& start,
                          const OptimizerOptions& options, std::vector<MeritRecord>* trace = nullptr);

/// Start 0 is the equal-neighbor walk after three balancing sweeps (close
/// to, not on, the stationarity constraint); starts 1.. are Dirichlet(1)
/// rows on the support balanced to the target distribution. Start k
/// depends only on (seed, k).
std::vector<Eigen::MatrixXd> default_starts(const FeasibleSet& set, int count, std::uint64_t seed);

struct StartSummary {
  int start;
  double objective;
  bool converged;
  int iterations;
  double constraint_residual;
  Eigen::MatrixXd point;
};

struct OptimizationResult {
  StochasticMatrix chain;
  double objective;
  int iterations;
  bool converged;
  double kkt_residual;
  double constraint_residual;
  std::vector<StartSummary> starts_summary;
  OptimizerOptions options;
  int best_start;
};

/// Runs `solve_local` from each start (in parallel up to options.threads)
/// and keeps the best feasible local solution, ties broken by start index.
/// Throws Infeasible if no start reaches a finite, feasible point.
OptimizationResult minimize_multistart(const FeasibleSet& set, const Objective& objective,
                                       const std::vector<Eigen::MatrixXd>& starts, const OptimizerOptions& options);

/// Best pursuer against a fixed evader. `extra_starts` are appended after
/// the default starts.
OptimizationResult minimize_mean_meeting(std::shared_ptr<const Digraph> graph, const StochasticMatrix& evader,
                                         const StationaryDistribution& pi_pursuer,
                                         const StationaryDistribution& pi_evader,
                                         const OptimizerOptions& options = {},
                                         const std::vector<Eigen::MatrixXd>& extra_starts = {});

/// Maximum entropy rate chain; the result's objective is the entropy rate
/// (nats). Concave problem, so a single start is used.
OptimizationResult maximize_entropy(std::shared_ptr<const Digraph> graph, const StationaryDistribution& pi,
                                    const OptimizerOptions& options = {});

/// Minimum Kemeny constant chain over `options.starts` starts.
OptimizationResult minimize_kemeny(std::shared_ptr<const Digraph> graph, const StationaryDistribution& pi,
                                   const OptimizerOptions& options = {});

struct GradientCheckReport {
  double max_relative_error;
  int coordinates;
  bool passed;
};

/// Central differences with the given step over every arc entry of
/// `point`, compared against the analytic gradient; relative error uses
/// max(1, |analytic|, |numeric|) as the scale.
GradientCheckReport gradient_check(const Objective& objective, const Digraph& graph, const Eigen::MatrixXd& point,
                                   double step = 1e-6, double threshold = 1e-5);

enum class ObjectiveKind { MeanMeeting, Entropy, Kemeny };

/// Convenience form: `evader` is used only for MeanMeeting; `pi` serves as
/// both distributions.
GradientCheckReport gradient_check(ObjectiveKind kind, const StochasticMatrix& point,
                                   const StationaryDistribution& pi, const Eigen::MatrixXd* evader = nullptr);

}  // namespace kronmeet
