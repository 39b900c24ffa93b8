#include "kronmeet/sim.hpp"

#include "kronmeet/error.hpp"
#include "kronmeet/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kronmeet {

namespace {

// Counter-based stream: output k is mix(state + k·γ), i.e. SplitMix64.
class TrialStream {
 public:
  explicit TrialStream(std::uint64_t key) : state_(key) {}

  double uniform() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Cumulative rows; sampling scans the (short) row.
struct Sampler {
  explicit Sampler(const Eigen::MatrixXd& p) : n(static_cast<int>(p.rows())), targets(n), cumulative(n) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        if (p(i, j) > 0.0) {
          acc += p(i, j);
          targets[i].push_back(j);
          cumulative[i].push_back(acc);
        }
      cumulative[i].back() = std::numeric_limits<double>::infinity();
    }
  }

  int step(int from, double u) const {
    const auto& c = cumulative[from];
    std::size_t k = 0;
    while (u >= c[k]) ++k;
    return targets[from][k];
  }

  int n;
  std::vector<std::vector<int>> targets;
  std::vector<std::vector<double>> cumulative;
};

void require_chain(const Eigen::MatrixXd& p) {
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    if ((p.row(i).array() < 0.0).any() || std::abs(p.row(i).sum() - 1.0) > 1e-9) {
      throw Error(ErrorKind::RowSum, "row " + std::to_string(i + 1) + " is not a probability vector");
    }
  }
}

}  // namespace

long default_max_steps(int n) { return 100L * n * n; }

TrialBatch simulate_meeting(const Eigen::MatrixXd& pursuer, const Eigen::MatrixXd& evader, int pursuer_start,
                            int evader_start, long trials, long max_steps, std::uint64_t seed, int threads) {
  if (pursuer.rows() != evader.rows() || pursuer.rows() != pursuer.cols() || evader.rows() != evader.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "pursuer and evader chains must be square and the same size");
  }
  const int n = static_cast<int>(pursuer.rows());
  if (pursuer_start < 0 || pursuer_start >= n || evader_start < 0 || evader_start >= n) {
    throw Error(ErrorKind::InvalidArgument, "start node out of range");
  }
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be positive");
  require_chain(pursuer);
  require_chain(evader);

  TrialBatch batch;
  batch.pursuer_start = pursuer_start;
  batch.evader_start = evader_start;
  batch.trials = trials;
  batch.max_steps = max_steps > 0 ? max_steps : default_max_steps(n);
  batch.seed = seed;

  const Sampler sp(pursuer), se(evader);
  const std::uint64_t pair_key = derive_seed(seed, static_cast<std::uint64_t>(pursuer_start) * n + evader_start);

  // Integer accumulators make the aggregate independent of block order.
  constexpr long kBlock = 4096;
  const int blocks = static_cast<int>((trials + kBlock - 1) / kBlock);
  struct Partial {
    std::uint64_t sum = 0, sum_sq = 0;
    long censored = 0;
  };
  std::vector<Partial> partial(blocks);
  parallel_for(blocks, threads, [&](int b) {
    Partial acc;
    const long first = b * kBlock, last = std::min(trials, first + kBlock);
    for (long k = first; k < last; ++k) {
      TrialStream rng(derive_seed(pair_key, static_cast<std::uint64_t>(k)));
      int x = pursuer_start, y = evader_start;
      long t = 1;
      for (; t <= batch.max_steps; ++t) {
        x = sp.step(x, rng.uniform());
        y = se.step(y, rng.uniform());
        if (x == y) break;
      }
      if (t > batch.max_steps) {
        ++acc.censored;
      } else {
        acc.sum += static_cast<std::uint64_t>(t);
        acc.sum_sq += static_cast<std::uint64_t>(t) * static_cast<std::uint64_t>(t);
      }
    }
    partial[b] = acc;
  });

  std::uint64_t sum = 0, sum_sq = 0;
  for (const auto& p : partial) {
    sum += p.sum;
    sum_sq += p.sum_sq;
    batch.censored += p.censored;
  }
  const long m = batch.uncensored();
  if (m > 0) {
    batch.mean = static_cast<double>(sum) / static_cast<double>(m);
    if (m > 1) {
      const double var = (static_cast<double>(sum_sq) - static_cast<double>(m) * batch.mean * batch.mean) /
                         static_cast<double>(m - 1);
      batch.standard_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(m));
    }
  } else {
    batch.mean = std::numeric_limits<double>::infinity();
    batch.standard_error = std::numeric_limits<double>::infinity();
  }
  return batch;
}

TrialBatch simulate_meeting(const StochasticMatrix& pursuer, const StochasticMatrix& evader, int pursuer_start,
                            int evader_start, long trials, long max_steps, std::uint64_t seed, int threads) {
  return simulate_meeting(pursuer.matrix(), evader.matrix(), pursuer_start, evader_start, trials, max_steps, seed,
                          threads);
}

std::vector<TrialBatch> simulate_all_pairs(const Eigen::MatrixXd& pursuer, const Eigen::MatrixXd& evader, long trials,
                                           long max_steps, std::uint64_t seed, int threads) {
  const int n = static_cast<int>(pursuer.rows());
  std::vector<TrialBatch> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.push_back(simulate_meeting(pursuer, evader, i, j, trials, max_steps, seed, threads));
  return out;
}

}  // namespace kronmeet
