#include "kronmeet/optimize.hpp"

#include "kronmeet/error.hpp"
#include "kronmeet/kron.hpp"
#include "kronmeet/meeting.hpp"
#include "kronmeet/parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <sstream>

namespace kronmeet {

FeasibleSet::FeasibleSet(std::shared_ptr<const Digraph> graph, StationaryDistribution pi)
    : graph_(std::move(graph)), pi_(std::move(pi)) {
  if (pi_.size() != graph_->size()) {
    throw Error(ErrorKind::DimensionMismatch, "target distribution size does not match the graph");
  }
  if (!pi_.strictly_positive()) {
    throw Error(ErrorKind::InvalidArgument, "target distribution must be strictly positive");
  }
  rows_.resize(graph_->size());
  for (int i = 0; i < graph_->size(); ++i) {
    rows_[i] = graph_->successors(i);
    if (rows_[i].empty()) {
      throw Error(ErrorKind::ZeroOutDegree, "node " + std::to_string(i + 1) + " has no outgoing arcs");
    }
  }
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index m = v.size();
  std::vector<double> sorted(v.data(), v.data() + m);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0, tau = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) tau = candidate;
  }
  Eigen::VectorXd x = (v.array() - tau).cwiseMax(0.0);
  return x;
}

Eigen::MatrixXd FeasibleSet::project(const Eigen::MatrixXd& x) const {
  const int n = size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& cols = rows_[i];
    Eigen::VectorXd row(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) row(k) = x(i, cols[k]);
    const Eigen::VectorXd projected = project_to_simplex(row);
    for (std::size_t k = 0; k < cols.size(); ++k) out(i, cols[k]) = projected(k);
  }
  return out;
}

Eigen::MatrixXd FeasibleSet::mask(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size(), size());
  for (int i = 0; i < size(); ++i)
    for (int j : rows_[i]) out(i, j) = x(i, j);
  return out;
}

Eigen::VectorXd FeasibleSet::stationarity_residual(const Eigen::MatrixXd& p) const {
  return p.transpose() * pi_.values() - pi_.values();
}

double FeasibleSet::transport_deficit() const {
  // Max flow source -> row i (cap π_i) -> column j on arcs -> sink (cap π_j).
  const int n = size();
  const int nodes = 2 * n + 2, source = 2 * n, sink = 2 * n + 1;
  Eigen::MatrixXd cap = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int i = 0; i < n; ++i) {
    cap(source, i) = pi_(i);
    cap(n + i, sink) = pi_(i);
    for (int j : rows_[i]) cap(i, n + j) = 2.0;
  }
  double flow = 0.0;
  constexpr double eps = 1e-15;
  while (true) {
    std::vector<int> parent(nodes, -1);
    parent[source] = source;
    std::deque<int> queue{source};
    while (!queue.empty() && parent[sink] < 0) {
      const int u = queue.front();
      queue.pop_front();
      for (int v = 0; v < nodes; ++v)
        if (parent[v] < 0 && cap(u, v) > eps) {
          parent[v] = u;
          queue.push_back(v);
        }
    }
    if (parent[sink] < 0) break;
    double push = 2.0;
    for (int v = sink; v != source; v = parent[v]) push = std::min(push, cap(parent[v], v));
    for (int v = sink; v != source; v = parent[v]) {
      cap(parent[v], v) -= push;
      cap(v, parent[v]) += push;
    }
    flow += push;
  }
  return std::max(0.0, 1.0 - flow);
}

Eigen::MatrixXd FeasibleSet::balance(const Eigen::MatrixXd& x, int max_iterations, double tol) const {
  const int n = size();
  const Eigen::VectorXd& pi = pi_.values();
  Eigen::MatrixXd f = pi.asDiagonal() * mask(x.cwiseMax(0.0));
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd rows = f.rowwise().sum();
    if ((rows.array() <= 0.0).any()) break;
    f = (pi.array() / rows.array()).matrix().asDiagonal() * f;
    const Eigen::VectorXd cols = f.colwise().sum().transpose();
    if ((cols.array() <= 0.0).any()) break;
    if ((cols - pi).lpNorm<Eigen::Infinity>() <= tol) break;
    f = f * (pi.array() / cols.array()).matrix().asDiagonal();
  }
  Eigen::MatrixXd p = pi.cwiseInverse().asDiagonal() * f;
  for (int i = 0; i < n; ++i) {
    const double s = p.row(i).sum();
    if (s > 0.0) {
      p.row(i) /= s;
    } else {
      for (int j : rows_[i]) p(i, j) = 1.0 / static_cast<double>(rows_[i].size());
    }
  }
  return p;
}

namespace {

// Product-chain linear system shared by the meeting-time objectives.
struct MeetingSystem {
  int n;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::VectorXd x;
};

bool build_system(const Eigen::MatrixXd& pursuer, const Eigen::MatrixXd& evader, MeetingSystem& sys) {
  if (!pursuer.allFinite() || (pursuer.array() < 0.0).any()) return false;
  if (!finiteness(pursuer, evader).all_finite) return false;
  const Eigen::Index states = pursuer.rows() * pursuer.rows();
  sys.n = static_cast<int>(pursuer.rows());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(states, states) - killed_product(pursuer, evader);
  sys.lu.compute(a);
  sys.x = sys.lu.solve(Eigen::VectorXd::Ones(states));
  return sys.x.allFinite();
}

Objective meeting_objective(std::string name, Eigen::MatrixXd evader, Eigen::VectorXd weights) {
  Objective obj;
  obj.name = std::move(name);
  obj.value = [evader, weights](const Eigen::MatrixXd& p) {
    MeetingSystem sys;
    if (!build_system(p, evader, sys)) return kInfinity;
    return weights.dot(sys.x);
  };
  obj.evaluate = [evader, weights](const Eigen::MatrixXd& p) {
    MeetingSystem sys;
    if (!build_system(p, evader, sys)) {
      return ObjectiveValue{kInfinity, Eigen::MatrixXd::Zero(p.rows(), p.cols())};
    }
    // d(wᵀx) = yᵀ (Pe ⊗ dPp) E x with Aᵀy = w, and
    // (Pe ⊗ dPp) vec(X) = vec(dPp X Peᵀ)  =>  ∇ = Y Pe Xᵀ, X = unvec(Ex).
    const Eigen::VectorXd y = sys.lu.transpose().solve(weights);
    Eigen::MatrixXd killed = unvec(sys.x, sys.n);
    killed.diagonal().setZero();
    const Eigen::MatrixXd adjoint = unvec(y, sys.n);
    return ObjectiveValue{weights.dot(sys.x), adjoint * evader * killed.transpose()};
  };
  return obj;
}

}  // namespace

Objective mean_meeting_objective(const Eigen::MatrixXd& evader, const StationaryDistribution& pi_pursuer,
                                 const StationaryDistribution& pi_evader) {
  if (evader.rows() != pi_pursuer.size() || evader.rows() != pi_evader.size()) {
    throw Error(ErrorKind::DimensionMismatch, "evader and distributions differ in size");
  }
  return meeting_objective("mean_meeting", evader, kron(pi_evader.values(), pi_pursuer.values()));
}

Objective kemeny_objective(const StationaryDistribution& pi) {
  const Eigen::Index n = pi.size();
  return meeting_objective("kemeny", Eigen::MatrixXd::Identity(n, n), kron(pi.values(), pi.values()));
}

Objective negative_entropy_objective(const StationaryDistribution& pi) {
  Objective obj;
  obj.name = "entropy";
  const Eigen::VectorXd weights = pi.values();
  obj.value = [weights](const Eigen::MatrixXd& p) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j) {
        const double v = p(i, j);
        if (v < 0.0) return kInfinity;
        if (v > 0.0) f += weights(i) * v * std::log(v);
      }
    return f;
  };
  obj.evaluate = [weights, value = obj.value](const Eigen::MatrixXd& p) {
    constexpr double floor = 1e-12;
    Eigen::MatrixXd g(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j) g(i, j) = weights(i) * (std::log(std::max(p(i, j), floor)) + 1.0);
    return ObjectiveValue{value(p), std::move(g)};
  };
  return obj;
}

namespace {

double frobenius_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return a.cwiseProduct(b).sum(); }

// Masks to the support and removes each row's mean over its arcs. A per-row
// constant does not change the row projection, but it multiplies the
// rounding error in the step's row sums when forming directional slopes.
Eigen::MatrixXd center_rows(const FeasibleSet& set, const Eigen::MatrixXd& g) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(g.rows(), g.cols());
  for (int i = 0; i < set.size(); ++i) {
    const auto& arcs = set.graph().successors(i);
    double mean = 0.0;
    for (int j : arcs) mean += g(i, j);
    mean /= static_cast<double>(arcs.size());
    for (int j : arcs) out(i, j) = g(i, j) - mean;
  }
  return out;
}

}  // namespace

LocalSolution solve_local(const FeasibleSet& set, const Objective& objective, const Eigen::MatrixXd& start,
                          const OptimizerOptions& options, std::vector<MeritRecord>* trace) {
  const int n = set.size();
  const Eigen::VectorXd& pi = set.pi().values();
  LocalSolution out;
  Eigen::MatrixXd p = set.project(start);

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
  double rho = options.initial_penalty;

  auto merit_value = [&](const Eigen::MatrixXd& x) {
    const double f = objective.value(x);
    if (!std::isfinite(f)) return kInfinity;
    const Eigen::VectorXd c = set.stationarity_residual(x);
    return f + lambda.dot(c) + 0.5 * rho * c.squaredNorm();
  };
  auto merit_gradient = [&](const Eigen::MatrixXd& x, double& merit) {
    const ObjectiveValue ov = objective.evaluate(x);
    const Eigen::VectorXd c = set.stationarity_residual(x);
    merit = std::isfinite(ov.value) ? ov.value + lambda.dot(c) + 0.5 * rho * c.squaredNorm() : kInfinity;
    const Eigen::VectorXd multiplier = lambda + rho * c;
    return center_rows(set, ov.gradient + pi * multiplier.transpose());
  };
  auto projected_gradient_norm = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& g) {
    return (set.project(x - g) - x).lpNorm<Eigen::Infinity>();
  };

  if (!std::isfinite(objective.value(p))) {
    out.point = p;
    out.status = "objective is infinite at the starting point";
    return out;
  }

  double alpha = 1.0;
  double previous_violation = set.stationarity_residual(p).lpNorm<Eigen::Infinity>();
  double pg = kInfinity;
  for (int outer = 1; outer <= options.max_outer; ++outer) {
    const double inner_tol = std::max(0.1 * options.gradient_tol, std::pow(10.0, -(outer + 2)));
    double merit = 0.0;
    Eigen::MatrixXd g = merit_gradient(p, merit);
    bool stalled = false;
    for (int inner = 0; inner < options.max_inner; ++inner) {
      pg = projected_gradient_norm(p, g);
      if (pg <= inner_tol) break;
      const Eigen::MatrixXd direction = set.project(p - alpha * g) - p;
      const double slope = frobenius_dot(g, direction);
      if (!(slope < 0.0)) {
        stalled = true;
        break;
      }
      // Merit evaluations carry LU rounding noise; near a stationary point the
      // Armijo decrease drops below it, so allow that much slack.
      const double noise = 1e-14 * std::max(1.0, std::abs(merit));
      double t = 1.0;
      Eigen::MatrixXd candidate;
      double candidate_merit = kInfinity;
      while (true) {
        candidate = p + t * direction;
        candidate_merit = merit_value(candidate);
        if (std::isfinite(candidate_merit) && candidate_merit <= merit + 1e-4 * t * slope + noise) break;
        t *= 0.5;
        if (t < 1e-20) break;
      }
      if (t < 1e-20) {
        stalled = true;
        break;
      }
      double new_merit = 0.0;
      const Eigen::MatrixXd new_g = merit_gradient(candidate, new_merit);
      const Eigen::MatrixXd s = candidate - p;
      const double sy = frobenius_dot(s, new_g - g);
      alpha = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : 1e12;
      p = candidate;
      g = new_g;
      merit = new_merit;
      ++out.iterations;
      if (trace) trace->push_back({outer, inner, merit});
    }
    pg = projected_gradient_norm(p, g);

    const Eigen::VectorXd c = set.stationarity_residual(p);
    const double violation = c.lpNorm<Eigen::Infinity>();
    lambda += rho * c;
    out.kkt_residual = pg;
    out.constraint_residual = violation;
    if (violation <= options.constraint_tol && pg <= options.gradient_tol) {
      out.converged = true;
      out.status = "converged";
      break;
    }
    if (stalled && violation <= options.constraint_tol && inner_tol <= options.gradient_tol) {
      out.status = "line search stalled";
      break;
    }
    if (violation > options.constraint_tol && violation > 0.25 * previous_violation) {
      rho = std::min(10.0 * rho, options.max_penalty);
    }
    previous_violation = violation;
    if (outer == options.max_outer) out.status = "outer iteration limit";
  }
  out.point = p;
  out.objective = objective.value(p);
  return out;
}

std::vector<Eigen::MatrixXd> default_starts(const FeasibleSet& set, int count, std::uint64_t seed) {
  std::vector<Eigen::MatrixXd> starts;
  const int n = set.size();
  for (int k = 0; k < count; ++k) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    if (k == 0) {
      for (int i = 0; i < n; ++i)
        for (int j : set.graph().successors(i)) x(i, j) = 1.0;
    } else {
      std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
      std::gamma_distribution<double> gamma(1.0, 1.0);
      for (int i = 0; i < n; ++i)
        for (int j : set.graph().successors(i)) x(i, j) = std::max(gamma(rng), 1e-6);
    }
    // The equal-neighbor start is only roughly balanced; random starts are
    // balanced to convergence.
    starts.push_back(k == 0 ? set.balance(x, 3) : set.balance(x));
  }
  return starts;
}

OptimizationResult minimize_multistart(const FeasibleSet& set, const Objective& objective,
                                       const std::vector<Eigen::MatrixXd>& starts, const OptimizerOptions& options) {
  if (starts.empty()) throw Error(ErrorKind::InvalidArgument, "at least one start is required");
  std::vector<LocalSolution> local(starts.size());
  parallel_for(static_cast<int>(starts.size()), options.threads,
               [&](int k) { local[k] = solve_local(set, objective, starts[k], options); });

  std::vector<StartSummary> summary;
  int best = -1;
  int total_iterations = 0;
  constexpr double kFeasibleSlack = 1e-6;
  for (std::size_t k = 0; k < local.size(); ++k) {
    const auto& s = local[k];
    total_iterations += s.iterations;
    summary.push_back({static_cast<int>(k), s.objective, s.converged, s.iterations, s.constraint_residual, s.point});
    if (!std::isfinite(s.objective) || !(s.constraint_residual <= kFeasibleSlack)) continue;
    if (best < 0 || s.objective < local[best].objective) best = static_cast<int>(k);
  }
  if (best < 0) {
    std::ostringstream msg;
    msg << "no start reached a finite feasible point";
    if (!local.empty()) msg << " (start 0: " << local[0].status << ")";
    throw Error(ErrorKind::Infeasible, msg.str());
  }
  const auto& winner = local[best];
  return OptimizationResult{validate(winner.point, set.graph_ptr()),
                            winner.objective,
                            total_iterations,
                            winner.converged,
                            winner.kkt_residual,
                            winner.constraint_residual,
                            std::move(summary),
                            options,
                            best};
}

namespace {

void require_feasible(const FeasibleSet& set) {
  const double deficit = set.transport_deficit();
  if (deficit > 1e-9) {
    std::ostringstream msg;
    msg << "no chain on this support has the requested stationary distribution (transport deficit " << deficit
        << ")";
    throw Error(ErrorKind::Infeasible, msg.str());
  }
}

}  // namespace

OptimizationResult minimize_mean_meeting(std::shared_ptr<const Digraph> graph, const StochasticMatrix& evader,
                                         const StationaryDistribution& pi_pursuer,
                                         const StationaryDistribution& pi_evader, const OptimizerOptions& options,
                                         const std::vector<Eigen::MatrixXd>& extra_starts) {
  if (evader.size() != graph->size()) throw Error(ErrorKind::DimensionMismatch, "evader and graph differ in size");
  const FeasibleSet set(std::move(graph), pi_pursuer);
  require_feasible(set);
  auto starts = default_starts(set, std::max(options.starts, 1), options.seed);
  for (const auto& s : extra_starts) starts.push_back(s);
  return minimize_multistart(set, mean_meeting_objective(evader.matrix(), pi_pursuer, pi_evader), starts, options);
}

OptimizationResult maximize_entropy(std::shared_ptr<const Digraph> graph, const StationaryDistribution& pi,
                                    const OptimizerOptions& options) {
  const FeasibleSet set(std::move(graph), pi);
  require_feasible(set);
  OptimizationResult result =
      minimize_multistart(set, negative_entropy_objective(pi), default_starts(set, 1, options.seed), options);
  result.objective = -result.objective;
  for (auto& s : result.starts_summary) s.objective = -s.objective;
  return result;
}

OptimizationResult minimize_kemeny(std::shared_ptr<const Digraph> graph, const StationaryDistribution& pi,
                                   const OptimizerOptions& options) {
  const FeasibleSet set(std::move(graph), pi);
  require_feasible(set);
  return minimize_multistart(set, kemeny_objective(pi), default_starts(set, std::max(options.starts, 1), options.seed),
                             options);
}

GradientCheckReport gradient_check(const Objective& objective, const Digraph& graph, const Eigen::MatrixXd& point,
                                   double step, double threshold) {
  const Eigen::MatrixXd analytic = objective.evaluate(point).gradient;
  GradientCheckReport report{0.0, 0, true};
  for (const auto& [i, j] : graph.edges()) {
    Eigen::MatrixXd plus = point, minus = point;
    plus(i, j) += step;
    minus(i, j) -= step;
    const double numeric = (objective.value(plus) - objective.value(minus)) / (2.0 * step);
    const double scale = std::max({1.0, std::abs(numeric), std::abs(analytic(i, j))});
    const double err = std::isfinite(numeric) ? std::abs(numeric - analytic(i, j)) / scale : kInfinity;
    report.max_relative_error = std::max(report.max_relative_error, err);
    ++report.coordinates;
  }
  report.passed = report.max_relative_error <= threshold;
  return report;
}

GradientCheckReport gradient_check(ObjectiveKind kind, const StochasticMatrix& point,
                                   const StationaryDistribution& pi, const Eigen::MatrixXd* evader) {
  switch (kind) {
    case ObjectiveKind::MeanMeeting:
      if (!evader) throw Error(ErrorKind::InvalidArgument, "mean-meeting gradient check needs an evader");
      return gradient_check(mean_meeting_objective(*evader, pi, pi), point.graph(), point.matrix());
    case ObjectiveKind::Entropy:
      return gradient_check(negative_entropy_objective(pi), point.graph(), point.matrix());
    case ObjectiveKind::Kemeny:
      return gradient_check(kemeny_objective(pi), point.graph(), point.matrix());
  }
  throw Error(ErrorKind::InvalidArgument, "unknown objective");
}

}  // namespace kronmeet
