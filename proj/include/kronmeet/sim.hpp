#pragma once

#include "kronmeet/chain.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace kronmeet {

/// Monte Carlo estimate of the meeting time from one start pair.
struct TrialBatch {
  int pursuer_start = 0;  // 0-based
  int evader_start = 0;
  long trials = 0;
  long max_steps = 0;
  std::uint64_t seed = 0;
  double mean = 0.0;            // over uncensored trials
  double standard_error = 0.0;  // over uncensored trials
  long censored = 0;            // trials with no meeting within max_steps

  long uncensored() const { return trials - censored; }
};

/// Default horizon 100·n².
long default_max_steps(int n);

/// Steps both walkers independently from (pursuer_start, evader_start) and
/// records the first t ≥ 1 with the two on the same node. Trial k draws from
/// its own stream derived from (seed, pair, k), so results do not depend on
/// `threads`. `max_steps` ≤ 0 selects the default horizon.
TrialBatch simulate_meeting(const Eigen::MatrixXd& pursuer, const Eigen::MatrixXd& evader, int pursuer_start,
                            int evader_start, long trials, long max_steps, std::uint64_t seed, int threads = 1);
TrialBatch simulate_meeting(const StochasticMatrix& pursuer, const StochasticMatrix& evader, int pursuer_start,
                            int evader_start, long trials, long max_steps, std::uint64_t seed, int threads = 1);

/// One batch per start pair, row-major over (pursuer, evader).
std::vector<TrialBatch> simulate_all_pairs(const Eigen::MatrixXd& pursuer, const Eigen::MatrixXd& evader, long trials,
                                           long max_steps, std::uint64_t seed, int threads = 1);

}  // namespace kronmeet
