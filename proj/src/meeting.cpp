#include "kronmeet/meeting.hpp"

#include "kronmeet/error.hpp"

#include <deque>

namespace kronmeet {

namespace {

void require_pair(const Eigen::MatrixXd& pursuer, const Eigen::MatrixXd& evader) {
  if (pursuer.rows() != pursuer.cols() || evader.rows() != evader.cols() || pursuer.rows() != evader.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "pursuer is " + std::to_string(pursuer.rows()) + "x" +
                                                  std::to_string(pursuer.cols()) + ", evader is " +
                                                  std::to_string(evader.rows()) + "x" +
                                                  std::to_string(evader.cols()));
  }
}

}  // namespace

FinitenessReport finiteness(const Eigen::MatrixXd& pursuer, const Eigen::MatrixXd& evader) {
  require_pair(pursuer, evader);
  const int n = static_cast<int>(pursuer.rows());
  const ProductIndex idx{n};
  const int states = idx.states();

  std::vector<std::vector<int>> succ_p(n), succ_e(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      if (pursuer(i, k) > 0.0) succ_p[i].push_back(k);
      if (evader(i, k) > 0.0) succ_e[i].push_back(k);
    }

  // Reverse adjacency of the positive-support product graph.
  std::vector<std::vector<int>> pred(states);
  for (int s = 0; s < states; ++s)
    for (int k : succ_p[idx.pursuer(s)])
      for (int h : succ_e[idx.evader(s)]) pred[idx.state(k, h)].push_back(s);

  // States with a walk (of any length) to a co-located state.
  std::vector<char> meets(states, 0);
  std::deque<int> queue;
  for (int k = 0; k < n; ++k) {
    meets[idx.state(k, k)] = 1;
    queue.push_back(idx.state(k, k));
  }
  while (!queue.empty()) {
    const int t = queue.front();
    queue.pop_front();
    for (int s : pred[t])
      if (!meets[s]) {
        meets[s] = 1;
        queue.push_back(s);
      }
  }

  // Doomed set D (never co-locate) and everything that can drift into it
  // before meeting. Arcs into co-located states are cut: meeting stops the
  // walk, so only off-diagonal intermediate states propagate.
  std::vector<int> witness(states, -1);
  for (int s = 0; s < states; ++s)
    if (!meets[s]) {
      witness[s] = s;
      queue.push_back(s);
    }
  while (!queue.empty()) {
    const int t = queue.front();
    queue.pop_front();
    for (int s : pred[t])
      if (witness[s] < 0) {
        witness[s] = witness[t];
        queue.push_back(s);
      }
  }

  FinitenessReport report;
  report.finite_pairs = BoolMatrix::Constant(n, n, true);
  for (int s = 0; s < states; ++s) {
    if (witness[s] < 0) continue;
    report.finite_pairs(idx.pursuer(s), idx.evader(s)) = false;
    report.all_finite = false;
    report.witnesses.push_back({idx.pursuer(s), idx.evader(s), idx.pursuer(witness[s]), idx.evader(witness[s])});
  }
  return report;
}

FinitenessReport finiteness(const StochasticMatrix& pursuer, const StochasticMatrix& evader) {
  return finiteness(pursuer.matrix(), evader.matrix());
}

bool spectral_radius_lt_one(const Eigen::MatrixXd& q, double deficit_tol) {
  if (q.rows() != q.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix must be square");
  const Eigen::Index m = q.rows();
  std::vector<char> drains(m, 0);
  std::deque<Eigen::Index> queue;
  for (Eigen::Index r = 0; r < m; ++r)
    if (1.0 - q.row(r).sum() > deficit_tol) {
      drains[r] = 1;
      queue.push_back(r);
    }
  while (!queue.empty()) {
    const Eigen::Index c = queue.front();
    queue.pop_front();
    for (Eigen::Index r = 0; r < m; ++r)
      if (!drains[r] && q(r, c) > 0.0) {
        drains[r] = 1;
        queue.push_back(r);
      }
  }
  for (Eigen::Index r = 0; r < m; ++r)
    if (!drains[r]) return false;
  return true;
}

namespace {

MeetingTimeMatrix iterate_meeting(const Eigen::MatrixXd& pursuer, const Eigen::MatrixXd& evader,
                                  const BoolMatrix& finite, const MeetingOptions& options) {
  // m <- 1 + (Pe ⊗ Pp)E m in matrix form: M <- 11ᵀ + Pp (M with zero
  // diagonal) Peᵀ. Finite states never move to infinite ones, so masking
  // the infinite entries to zero leaves the finite block exact.
  const Eigen::Index n = pursuer.rows();
  const Eigen::MatrixXd mask = finite.cast<double>();
  Eigen::MatrixXd m = mask;
  MeetingTimeMatrix out;
  const Eigen::MatrixXd evader_t = evader.transpose();
  for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
    Eigen::MatrixXd killed = m;
    killed.diagonal().setZero();
    Eigen::MatrixXd next = (Eigen::MatrixXd::Ones(n, n) + pursuer * killed * evader_t).cwiseProduct(mask);
    const double change = (next - m).lpNorm<Eigen::Infinity>();
    m.swap(next);
    if (change <= options.iteration_tol * std::max(1.0, m.lpNorm<Eigen::Infinity>())) {
      ++out.iterations;
      break;
    }
  }
  Eigen::MatrixXd killed = m;
  killed.diagonal().setZero();
  const Eigen::MatrixXd lhs = (m - pursuer * killed * evader_t).cwiseProduct(mask);
  out.residual = (lhs - mask).lpNorm<Eigen::Infinity>() / std::max(1.0, m.lpNorm<Eigen::Infinity>());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (!finite(i, j)) m(i, j) = kInfinity;
  out.times = std::move(m);
  out.finite = finite;
  return out;
}

}  // namespace

MeetingTimeMatrix meeting_times(const Eigen::MatrixXd& pursuer, const Eigen::MatrixXd& evader,
                                const MeetingOptions& options) {
  const FinitenessReport report = finiteness(pursuer, evader);
  if (pursuer.rows() > options.dense_limit) return iterate_meeting(pursuer, evader, report.finite_pairs, options);
  MeetingTimeMatrix out;
  out.times = solve_meeting_dense<double>(pursuer, evader, report.finite_pairs, &out.residual);
  out.finite = report.finite_pairs;
  return out;
}

MeetingTimeMatrix meeting_times(const StochasticMatrix& pursuer, const StochasticMatrix& evader,
                                const MeetingOptions& options) {
  return meeting_times(pursuer.matrix(), evader.matrix(), options);
}

double mean_meeting_time(const MeetingTimeMatrix& m, const StationaryDistribution& pi_pursuer,
                         const StationaryDistribution& pi_evader) {
  const int n = m.size();
  if (pi_pursuer.size() != n || pi_evader.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "distribution size does not match the meeting-time matrix");
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double w = pi_pursuer(i) * pi_evader(j);
      if (w == 0.0) continue;
      if (!m.finite(i, j)) return kInfinity;
      total += w * m.times(i, j);
    }
  return total;
}

MeetingTimeMatrix hitting_times(const Eigen::MatrixXd& pursuer) {
  if (pursuer.rows() != pursuer.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix must be square");
  if (!classify(pursuer).irreducible()) {
    throw Error(ErrorKind::Reducible, "hitting times need an irreducible chain");
  }
  const Eigen::Index n = pursuer.rows();
  return meeting_times(pursuer, Eigen::MatrixXd::Identity(n, n));
}

MeetingTimeMatrix hitting_times(const StochasticMatrix& pursuer) { return hitting_times(pursuer.matrix()); }

double mean_meeting_stationary(const StationaryDistribution& pi_evader, const Eigen::MatrixXd& pursuer,
                               const StationaryDistribution& pi_pursuer) {
  return mean_meeting_time(hitting_times(pursuer), pi_pursuer, pi_evader);
}

double mean_meeting_stationary(const StationaryDistribution& pi_evader, const StochasticMatrix& pursuer,
                               const StationaryDistribution& pi_pursuer) {
  return mean_meeting_stationary(pi_evader, pursuer.matrix(), pi_pursuer);
}

}  // namespace kronmeet
