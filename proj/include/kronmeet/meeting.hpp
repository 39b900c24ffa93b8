#pragma once

#include "kronmeet/chain.hpp"
#include "kronmeet/kron.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <limits>
#include <vector>

namespace kronmeet {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Product-state indexing shared by the Kronecker chain Pe ⊗ Pp and vec(M):
/// pursuer at i and evader at j is state j * n + i (0-based).
struct ProductIndex {
  int n;

  int state(int pursuer, int evader) const { return evader * n + pursuer; }
  int pursuer(int state) const { return state % n; }
  int evader(int state) const { return state / n; }
  bool diagonal(int state) const { return pursuer(state) == evader(state); }
  int states() const { return n * n; }
};

/// (Pe ⊗ Pp)E: the joint chain with every transition into a co-located
/// state (k, k) removed. E is applied by zeroing columns, never formed.
template <typename DerivedP, typename DerivedE>
DenseMatrix<typename DerivedP::Scalar> killed_product(const Eigen::MatrixBase<DerivedP>& pursuer,
                                                      const Eigen::MatrixBase<DerivedE>& evader) {
  if (pursuer.rows() != evader.rows() || pursuer.rows() != pursuer.cols() || evader.rows() != evader.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "pursuer and evader chains must be square and the same size");
  }
  auto q = kron(evader, pursuer);
  const Eigen::Index n = pursuer.rows();
  for (Eigen::Index k = 0; k < n; ++k) q.col(k * n + k).setZero();
  return q;
}

/// Solves (I − Q_FF) m_F = 1 on the product states flagged in `finite`
/// (indexed by ProductIndex) and returns the n×n meeting-time matrix with
/// +inf elsewhere. With every state flagged this is the full closed form
/// vec(M) = (I − (Pe ⊗ Pp)E)⁻¹ 1. `residual`, if given, receives
/// ‖(I − Q_FF) m_F − 1‖∞ / ‖m_F‖∞.
template <typename Scalar>
DenseMatrix<Scalar> solve_meeting_dense(const DenseMatrix<Scalar>& pursuer, const DenseMatrix<Scalar>& evader,
                                        const BoolMatrix& finite, Scalar* residual = nullptr) {
  const int n = static_cast<int>(pursuer.rows());
  const ProductIndex idx{n};
  std::vector<int> states;
  std::vector<int> position(idx.states(), -1);
  for (int s = 0; s < idx.states(); ++s) {
    if (finite(idx.pursuer(s), idx.evader(s))) {
      position[s] = static_cast<int>(states.size());
      states.push_back(s);
    }
  }
  const Eigen::Index f = static_cast<Eigen::Index>(states.size());
  DenseMatrix<Scalar> system = DenseMatrix<Scalar>::Identity(f, f);
  for (Eigen::Index r = 0; r < f; ++r) {
    const int i = idx.pursuer(states[r]), j = idx.evader(states[r]);
    for (Eigen::Index c = 0; c < f; ++c) {
      const int s = states[c];
      if (idx.diagonal(s)) continue;
      system(r, c) -= pursuer(i, idx.pursuer(s)) * evader(j, idx.evader(s));
    }
  }
  const DenseVector<Scalar> ones = DenseVector<Scalar>::Ones(f);
  DenseVector<Scalar> m = ones;
  if (f > 0) {
    const auto lu = system.partialPivLu();
    m = lu.solve(ones);
    // Slowly mixing pairs give ill-conditioned systems; two refinement sweeps
    // with the residual accumulated in extended precision recover the lost
    // digits.
    for (int sweep = 0; sweep < 2; ++sweep) {
      DenseVector<Scalar> r(f);
      for (Eigen::Index row = 0; row < f; ++row) {
        const int i = idx.pursuer(states[row]), j = idx.evader(states[row]);
        long double acc = 1.0L - static_cast<long double>(m(row));
        for (Eigen::Index c = 0; c < f; ++c) {
          const int s = states[c];
          if (idx.diagonal(s)) continue;
          acc += static_cast<long double>(pursuer(i, idx.pursuer(s))) *
                 static_cast<long double>(evader(j, idx.evader(s))) * static_cast<long double>(m(c));
        }
        r(row) = static_cast<Scalar>(acc);
      }
      m += lu.solve(r);
    }
  }
  if (residual) {
    *residual = f > 0 ? (system * m - ones).template lpNorm<Eigen::Infinity>() /
                            m.template lpNorm<Eigen::Infinity>()
                      : Scalar(0);
  }
  DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Constant(n, n, std::numeric_limits<Scalar>::infinity());
  for (Eigen::Index r = 0; r < f; ++r) out(idx.pursuer(states[r]), idx.evader(states[r])) = m(r);
  return out;
}

/// Product states from which the pair of walkers can never co-locate,
/// together with one such state reachable from every doomed start.
struct FinitenessReport {
  struct Witness {
    int pursuer;         // start pair (0-based)
    int evader;
    int stuck_pursuer;   // a state in the never-meet set reachable from it
    int stuck_evader;
  };

  BoolMatrix finite_pairs;
  bool all_finite = true;
  std::vector<Witness> witnesses;
};

FinitenessReport finiteness(const Eigen::MatrixXd& pursuer, const Eigen::MatrixXd& evader);
FinitenessReport finiteness(const StochasticMatrix& pursuer, const StochasticMatrix& evader);

/// Graph criterion for a row-substochastic matrix: spectral radius < 1 iff
/// every row summing to one has a walk to a row summing to less than one.
/// Rows with 1 − sum > `deficit_tol` count as deficient.
bool spectral_radius_lt_one(const Eigen::MatrixXd& substochastic, double deficit_tol = 1e-14);

struct MeetingOptions {
  /// Dense LU up to this many nodes, fixed-point iteration above.
  int dense_limit = 60;
  double iteration_tol = 1e-10;
  long max_iterations = 1'000'000;
};

/// Expected first meeting times m(i, j) = E[min{t ≥ 1 : co-located}] with
/// the pursuer starting at i (row) and the evader at j (column). Co-located
/// starts count as met only after a later re-meeting.
struct MeetingTimeMatrix {
  Eigen::MatrixXd times;
  BoolMatrix finite;
  double residual = 0.0;
  long iterations = 0;

  int size() const { return static_cast<int>(times.rows()); }
  bool all_finite() const { return finite.all(); }
  double operator()(int i, int j) const { return times(i, j); }
};

MeetingTimeMatrix meeting_times(const Eigen::MatrixXd& pursuer, const Eigen::MatrixXd& evader,
                                const MeetingOptions& options = {});
MeetingTimeMatrix meeting_times(const StochasticMatrix& pursuer, const StochasticMatrix& evader,
                                const MeetingOptions& options = {});

/// π_pᵀ M π_e; +inf as soon as an infinite entry has positive weight.
double mean_meeting_time(const MeetingTimeMatrix& m, const StationaryDistribution& pi_pursuer,
                         const StationaryDistribution& pi_evader);

/// Pairwise hitting times h(i, j) of an irreducible chain, as meeting times
/// against a walker that never moves. The diagonal holds return times.
MeetingTimeMatrix hitting_times(const Eigen::MatrixXd& pursuer);
MeetingTimeMatrix hitting_times(const StochasticMatrix& pursuer);

/// (π_e ⊗ π_p)ᵀ (I − (I ⊗ Pp)E)⁻¹ 1: mean capture time of an evader that
/// stays put at a π_e-distributed node. With π_e = π_p this is the Kemeny
/// constant of Pp (return times on the diagonal).
double mean_meeting_stationary(const StationaryDistribution& pi_evader, const Eigen::MatrixXd& pursuer,
                               const StationaryDistribution& pi_pursuer);
double mean_meeting_stationary(const StationaryDistribution& pi_evader, const StochasticMatrix& pursuer,
                               const StationaryDistribution& pi_pursuer);

}  // namespace kronmeet
