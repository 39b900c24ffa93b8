#include "kronmeet/chain.hpp"

#include "kronmeet/error.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace kronmeet {

StationaryDistribution::StationaryDistribution(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw Error(ErrorKind::InvalidSize, "empty distribution");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_(i)) || values_(i) < 0.0) {
      throw Error(ErrorKind::NegativeEntry,
                  "distribution entry " + std::to_string(i + 1) + " is negative or not finite");
    }
  }
  const double total = values_.sum();
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "distribution sums to " << total << ", expected 1";
    throw Error(ErrorKind::RowSum, msg.str());
  }
  values_ /= total;
}

StationaryDistribution StationaryDistribution::uniform(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidSize, "uniform distribution needs n >= 1");
  return StationaryDistribution(Eigen::VectorXd::Constant(n, 1.0 / n));
}

double StationaryDistribution::residual(const Eigen::MatrixXd& transition) const {
  if (transition.rows() != size() || transition.cols() != size()) {
    throw Error(ErrorKind::DimensionMismatch, "distribution and matrix sizes differ");
  }
  return (transition.transpose() * values_ - values_).lpNorm<Eigen::Infinity>();
}

StochasticMatrix validate(const Eigen::MatrixXd& p, std::shared_ptr<const Digraph> g) {
  const int n = g->size();
  if (p.rows() != n || p.cols() != n) {
    throw Error(ErrorKind::DimensionMismatch,
                "matrix is " + std::to_string(p.rows()) + "x" + std::to_string(p.cols()) +
                    " but the graph has " + std::to_string(n) + " nodes");
  }
  Eigen::MatrixXd out = p;
  int renormalized = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = p(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorKind::NegativeEntry, "entry (" + std::to_string(i + 1) + ", " +
                                                   std::to_string(j + 1) + ") is negative or not finite");
      }
      if (v > 0.0 && !g->has_edge(i, j)) {
        throw Error(ErrorKind::Support, "entry (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                                            ") is positive but the arc is not in the graph");
      }
    }
    const double sum = p.row(i).sum();
    const double deficit = 1.0 - sum;
    if (std::abs(deficit) > kRowSumTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row " << i + 1 << " sums to " << sum << " (deficit " << deficit << ")";
      throw Error(ErrorKind::RowSum, msg.str());
    }
    if (sum != 1.0) {
      out.row(i) /= sum;
      ++renormalized;
    }
  }
  return StochasticMatrix(std::move(out), std::move(g), renormalized);
}

StochasticMatrix validate(const Eigen::MatrixXd& p, const Digraph& g) {
  return validate(p, std::make_shared<const Digraph>(g));
}

std::vector<int> ChainStructure::absorbing_classes() const {
  std::vector<int> out;
  for (std::size_t c = 0; c < kinds.size(); ++c)
    if (kinds[c] == ClassKind::Absorbing) out.push_back(static_cast<int>(c));
  return out;
}

ChainStructure classify(const Eigen::MatrixXd& p) {
  const int n = static_cast<int>(p.rows());
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (p(i, j) > 0.0) adj[i].push_back(j);

  ChainStructure s;
  s.classes = strongly_connected_components(adj);
  s.class_of.assign(n, -1);
  for (std::size_t c = 0; c < s.classes.size(); ++c)
    for (int v : s.classes[c]) s.class_of[v] = static_cast<int>(c);

  std::vector<int> level(n, -1);
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    const auto& members = s.classes[c];
    bool leaves = false;
    for (int v : members)
      for (int w : adj[v])
        if (s.class_of[w] != static_cast<int>(c)) leaves = true;
    s.kinds.push_back(leaves ? ClassKind::Transient : ClassKind::Absorbing);

    // BFS levels inside the class; every internal arc u->w contributes
    // level(u) + 1 - level(w) to the gcd.
    std::queue<int> queue;
    level[members.front()] = 0;
    queue.push(members.front());
    int period = 0;
    bool has_internal_arc = false;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      for (int w : adj[u]) {
        if (s.class_of[w] != static_cast<int>(c)) continue;
        has_internal_arc = true;
        if (level[w] == -1) {
          level[w] = level[u] + 1;
          queue.push(w);
        } else {
          period = std::gcd(period, std::abs(level[u] + 1 - level[w]));
        }
      }
    }
    // A single node without a self-loop has no closed walks; report period 1
    // by the usual convention for trivial classes.
    s.periods.push_back(has_internal_arc && period > 0 ? period : 1);
  }
  return s;
}

ChainStructure classify(const StochasticMatrix& p) { return classify(p.matrix()); }

StationaryDistribution stationary_distribution(const Eigen::MatrixXd& p) {
  const int n = static_cast<int>(p.rows());
  const ChainStructure s = classify(p);
  const auto absorbing = s.absorbing_classes();
  if (absorbing.size() != 1) {
    std::ostringstream msg;
    msg << "chain has " << absorbing.size() << " absorbing classes:";
    for (int c : absorbing) {
      msg << " {";
      for (std::size_t k = 0; k < s.classes[c].size(); ++k)
        msg << (k ? "," : "") << s.classes[c][k] + 1;
      msg << "}";
    }
    msg << "; a stationary distribution must be supplied explicitly";
    throw Error(ErrorKind::NonUniqueStationary, msg.str());
  }
  // Diagonal as minus the off-diagonal row mass, so p_ii close to 1 does
  // not cancel.
  Eigen::MatrixXd a = p.transpose();
  for (int i = 0; i < n; ++i) a(i, i) = -(p.row(i).sum() - p(i, i));
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  const auto qr = a.colPivHouseholderQr();
  Eigen::VectorXd pi = qr.solve(b);
  for (int sweep = 0; sweep < 2; ++sweep) {
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      long double acc = static_cast<long double>(b(i));
      for (int j = 0; j < n; ++j) acc -= static_cast<long double>(a(i, j)) * static_cast<long double>(pi(j));
      r(i) = static_cast<double>(acc);
    }
    pi += qr.solve(r);
  }
  // Transient states carry zero mass; clear rounding noise there.
  for (int i = 0; i < n; ++i)
    if (s.kinds[s.class_of[i]] == ClassKind::Transient || pi(i) < 0.0) pi(i) = 0.0;
  return StationaryDistribution(pi / pi.sum());
}

StationaryDistribution stationary_distribution(const StochasticMatrix& p) {
  return stationary_distribution(p.matrix());
}

double entropy_rate(const Eigen::MatrixXd& p, const StationaryDistribution& pi) {
  if (p.rows() != pi.size() || p.cols() != pi.size()) {
    throw Error(ErrorKind::DimensionMismatch, "distribution and matrix sizes differ");
  }
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (p(i, j) > 0.0) h -= pi(static_cast<int>(i)) * p(i, j) * std::log(p(i, j));
  return h;
}

double entropy_rate(const StochasticMatrix& p, const StationaryDistribution& pi) {
  return entropy_rate(p.matrix(), pi);
}

StochasticMatrix equal_neighbor(std::shared_ptr<const Digraph> g) {
  const int n = g->size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int d = g->out_degree(i);
    if (d == 0) throw Error(ErrorKind::ZeroOutDegree, "node " + std::to_string(i + 1) + " has no outgoing arcs");
    for (int j : g->successors(i)) p(i, j) = 1.0 / d;
  }
  return validate(p, std::move(g));
}

StochasticMatrix equal_neighbor(const Digraph& g) {
  return equal_neighbor(std::make_shared<const Digraph>(g));
}

}  // namespace kronmeet
