// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include "oracles.hpp"

#include "cli.hpp"
#include "repro.hpp"

#include "kronmeet/io.hpp"
#include "kronmeet/kron.hpp"
#include "kronmeet/meeting.hpp"
#include "kronmeet/parallel.hpp"
#include "kronmeet/sim.hpp"
#include "kronmeet/strategies.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace kronmeet;

namespace {

using GraphPtr = std::shared_ptr<const Digraph>;
using Clock = std::chrono::steady_clock;

GraphPtr share(Digraph g) { return std::make_shared<const Digraph>(std::move(g)); }

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body, double time_limit = 0) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (time_limit > 0 && seconds >= time_limit) {
    out.pass = false;
    out.detail += " (over the " + std::to_string(time_limit) + " s limit)";
  }
  if (!out.pass) ++failures;
  std::printf("%s  %2d  %-44s %s [%.2f s]\n", out.pass ? "PASS" : "FAIL", id, title.c_str(), out.detail.c_str(),
              seconds);
  std::fflush(stdout);
}

std::string fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

Eigen::MatrixXd tour(int n, int shift) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) p(i, ((i + shift) % n + n) % n) = 1.0;
  return p;
}

oracle::BoolMatrix random_support(int n, std::mt19937_64& rng, double density) {
  std::bernoulli_distribution coin(density);
  oracle::BoolMatrix s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = coin(rng);
  for (int i = 0; i < n; ++i) s(i, (i + 1) % n) = true;
  return s;
}

Digraph graph_of(const oracle::BoolMatrix& s) {
  std::vector<Edge> edges;
  for (int i = 0; i < s.rows(); ++i)
    for (int j = 0; j < s.cols(); ++j)
      if (s(i, j)) edges.emplace_back(i, j);
  return Digraph(static_cast<int>(s.rows()), edges);
}

Outcome ring_closed_form() {
  auto g = share(make_ring(5));
  const auto u = StationaryDistribution::uniform(5);
  const auto evader = hamiltonian_tour(g);
  const double stay = mean_meeting_time(meeting_times(stationary_chain(g), evader), u, u);
  const double back =
      mean_meeting_time(meeting_times(hamiltonian_tour(g, TourDirection::Reverse), evader), u, u);
  const bool ok = std::abs(stay - 3.0) <= 1e-9 && std::abs(back - 3.0) <= 1e-9;
  return {ok, fmt("stationary %.12f, reverse tour %.12f (expected 3)", stay, back)};
}

Outcome ring_enumeration() {
  const int n = 5;
  const auto m = meeting_times(tour(n, -1), tour(n, 1));
  double worst = 0;
  for (int x = 1; x <= n; ++x) {
    const double expected = x == 1 ? n : (x % 2 ? (x - 1) / 2.0 : (n + x - 1) / 2.0);
    worst = std::max(worst, std::abs(m(x - 1, 0) - expected));
  }
  return {worst <= 1e-9, fmt("max deviation from the case formulas %.2e", worst)};
}

Outcome ring_six() {
  const auto report = finiteness(tour(6, -1), tour(6, 1));
  int infinite = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) infinite += report.finite_pairs(i, j) ? 0 : 1;

  auto g = share(make_ring(6));
  const auto u = StationaryDistribution::uniform(6);
  const double stationary = mean_meeting_time(meeting_times(stationary_chain(g), hamiltonian_tour(g)), u, u);

  std::ostringstream gen_out, pursue_out, err;
  std::istringstream none;
  std::vector<std::string> gen_args{"kronmeet", "gen", "ring", "6"};
  std::vector<std::string> pursue_args{"kronmeet", "pursue", "--evader-strategy", "tour", "--starts", "20"};
  auto call = [&](std::vector<std::string>& args, std::istream& in, std::ostream& out) {
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  };
  if (call(gen_args, none, gen_out) != 0) return {false, "gen failed: " + err.str()};
  std::istringstream graph_in(gen_out.str());
  if (call(pursue_args, graph_in, pursue_out) != 0) return {false, "pursue failed: " + pursue_out.str() + err.str()};
  const double optimum = io::to_number(nlohmann::json::parse(pursue_out.str())["mean"]);
  const bool ok = !report.all_finite && infinite > 0 && std::abs(optimum - stationary) <= 1e-6;
  return {ok, fmt("%g infinite pairs; pursue optimum %.9f vs stationary %.9f", infinite, optimum, stationary)};
}

Outcome complete_insensitivity() {
  double worst = 0;
  std::mt19937_64 rng(2024);
  for (int n : {5, 6}) {
    const Eigen::MatrixXd evader = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    const auto u = StationaryDistribution::uniform(n);
    auto g = share(make_complete(n));
    FeasibleSet set(g, u);
    const auto doubly = default_starts(set, 50, 7);
    for (int k = 0; k < 100; ++k) {
      // Half arbitrary chains with their own distribution, half chains
      // constrained to the evader's.
      const Eigen::MatrixXd p =
          k < 50 ? oracle::random_chain(oracle::BoolMatrix::Constant(n, n, true), rng) : doubly[k - 50];
      const auto pi = stationary_distribution(p);
      worst = std::max(worst, std::abs(mean_meeting_time(meeting_times(p, evader), pi, u) - n));
    }
  }
  return {worst <= 1e-9, fmt("max |mean - n| over 200 pursuers %.2e", worst)};
}

Outcome figure_one() {
  Eigen::MatrixXd swap(2, 2), lazy(2, 2);
  swap << 0, 1, 1, 0;
  lazy << 0.5, 0.5, 1, 0;
  const auto a = finiteness(swap, lazy);
  const auto b = finiteness(swap, swap);
  const bool exact_pairs = b.finite_pairs(0, 0) && b.finite_pairs(1, 1) && !b.finite_pairs(0, 1) &&
                           !b.finite_pairs(1, 0);
  const bool spectral_a = spectral_radius_lt_one(killed_product(swap, lazy));
  const bool spectral_b = spectral_radius_lt_one(killed_product(swap, swap));
  const bool ok = a.all_finite && exact_pairs && spectral_a == a.all_finite && spectral_b == b.all_finite;
  return {ok, std::string("(i) all finite: ") + (a.all_finite ? "yes" : "no") +
                  ", (ii) infinite exactly at (1,2),(2,1): " + (exact_pairs ? "yes" : "no") +
                  ", spectral test agrees: " + (spectral_a == a.all_finite && spectral_b == b.all_finite ? "yes" : "no")};
}

Outcome hitting_corollary() {
  std::mt19937_64 rng(6);
  double worst_h = 0, worst_diag = 0;
  int chains = 0;
  while (chains < 50) {
    const int n = 2 + chains % 5;
    const auto p = oracle::random_chain(random_support(n, rng, 0.35), rng);
    if (!classify(p).irreducible()) continue;
    ++chains;
    const auto h = meeting_times(p, Eigen::MatrixXd::Identity(n, n));
    const auto reference = oracle::hitting_times(p);
    const auto pi = oracle::exact_stationary(p);
    const auto pi_lib = stationary_distribution(p);
    worst_h = std::max(worst_h, (h.times - reference).cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i) {
      worst_diag = std::max(worst_diag, std::abs(h(i, i) - 1.0 / pi(i)));
      worst_diag = std::max(worst_diag, std::abs(h(i, i) - 1.0 / pi_lib(i)));
    }
  }
  return {worst_h <= 1e-9 && worst_diag <= 1e-9,
          fmt("max |M - H| %.2e, max |h_ii - 1/pi_i| %.2e", worst_h, worst_diag)};
}

Outcome kemeny_remark() {
  std::mt19937_64 rng(7);
  double spread = 0, gap = 0;
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 5;
    const auto p = oracle::random_chain(random_support(n, rng, 0.4), rng);
    if (!classify(p).irreducible()) continue;
    const auto pi = stationary_distribution(p);
    const Eigen::VectorXd rows = hitting_times(p).times * pi.values();
    spread = std::max(spread, rows.maxCoeff() - rows.minCoeff());
    gap = std::max(gap, std::abs(mean_meeting_stationary(pi, p, pi) - rows.mean()));
    gap = std::max(gap, std::abs(mean_meeting_stationary(pi, p, pi) - oracle::kemeny(p)));
  }
  return {spread <= 1e-9 && gap <= 1e-9, fmt("row spread %.2e, stationary-evader mean vs rows %.2e", spread, gap)};
}

Outcome monte_carlo_equivalence() {
  std::mt19937_64 rng(8);
  long pairs = 0, within = 0, oracle_ok = 0;
  int instances = 0;
  double worst_vi = 0;
  while (instances < 200) {
    const int n = 4 + instances % 2;
    auto sp = random_support(n, rng, 0.5), se = random_support(n, rng, 0.5);
    const auto p = oracle::random_chain(sp, rng), e = oracle::random_chain(se, rng);
    const auto exact = meeting_times(p, e);
    if (!exact.all_finite()) continue;
    const auto vi = oracle::meeting_value_iteration(p, e);
    const auto batches = simulate_all_pairs(p, e, 100000, 0, derive_seed(99, static_cast<std::uint64_t>(instances)));
    for (const auto& b : batches) {
      const double m = exact(b.pursuer_start, b.evader_start);
      ++pairs;
      if (b.censored == 0 && std::abs(b.mean - m) <= 3 * b.standard_error) ++within;
      const double d = std::abs(vi(b.pursuer_start, b.evader_start) - m);
      worst_vi = std::max(worst_vi, d);
      if (d <= 1e-8) ++oracle_ok;
    }
    ++instances;
  }
  const double coverage = static_cast<double>(within) / static_cast<double>(pairs);
  const bool ok = coverage >= 0.99 && oracle_ok == pairs;
  return {ok, fmt("%.0f pairs, %.4f within 3 SE, value iteration max gap %.2e", static_cast<double>(pairs), coverage,
                  worst_vi)};
}

Outcome gradients() {
  std::mt19937_64 rng(9);
  double worst[3] = {0, 0, 0};
  bool all = true;
  for (int t = 0; t < 20; ++t) {
    const int n = 3 + t % 4;
    auto s = random_support(n, rng, 0.4);
    for (int i = 0; i < n; ++i) s(i, i) = true;
    auto g = share(graph_of(s));
    Eigen::VectorXd weights = Eigen::VectorXd::NullaryExpr(n, [&] { return 0.5 + std::generate_canonical<double, 53>(rng); });
    const StationaryDistribution pi(weights / weights.sum());
    FeasibleSet set(g, pi);
    const auto point = default_starts(set, 2, static_cast<std::uint64_t>(t) + 1)[1];
    const Eigen::MatrixXd evader = oracle::random_chain(s, rng);
    const auto pi_e = stationary_distribution(evader);
    const Objective objectives[3] = {mean_meeting_objective(evader, pi, pi_e), negative_entropy_objective(pi),
                                     kemeny_objective(pi)};
    for (int k = 0; k < 3; ++k) {
      const auto r = gradient_check(objectives[k], *g, point, 1e-6, 1e-5);
      worst[k] = std::max(worst[k], r.max_relative_error);
      all = all && r.passed;
    }
  }
  return {all, fmt("max relative error: mean meeting %.1e, entropy %.1e, Kemeny %.1e", worst[0], worst[1], worst[2])};
}

Outcome grid_qualitative() {
  cli::ReproOptions options;
  const auto out = cli::repro_grid(options);
  std::string detail;
  for (const auto& row : out["rows"]) {
    detail += row["evader"].get<std::string>() + " " + fmt("%.4f<=%.4f self %.3f; ", io::to_number(row["objective"]),
                                                          io::to_number(row["best_baseline"]),
                                                          row["self_transition_mass"].get<double>());
  }
  const bool ok = out["all_beat_baselines"].get<bool>() && out["pursuer_stays_more_vs_fast"].get<bool>();
  return {ok, detail};
}

Outcome kronecker_identities() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> dim(1, 4);
  auto rand = [&](int r, int c) { return Eigen::MatrixXd::NullaryExpr(r, c, [&] { return u(rng); }).eval(); };
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const int m = dim(rng), k = dim(rng), l = dim(rng), q = dim(rng);
    const auto a = rand(m, k), c = rand(k, l), b = rand(l, q);
    worst = std::max(worst, (kron(b.transpose(), a) * vec(c) - vec(a * c * b)).cwiseAbs().maxCoeff());
    const auto d = rand(q, dim(rng));
    const auto e = rand(dim(rng), k);
    const auto f = rand(m, e.rows());
    // (A ⊗ B)(C ⊗ D) = AC ⊗ BD with conformable pairs (f, e) and (b, d).
    worst = std::max(worst, (kron(f, b) * kron(e, d) - kron(f * e, b * d)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (kron(a, b) - oracle::kron(a, b)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-12, fmt("max residual over 100 triples %.2e", worst)};
}

}  // namespace

int main() {
  criterion(1, "ring-5 closed form: stationary and reverse tour", ring_closed_form, 1.0);
  criterion(2, "ring-5 reverse-tour case formulas", ring_enumeration);
  criterion(3, "ring-6: infinite pairs, pursue optimum", ring_six);
  criterion(4, "complete graph insensitivity (n = 5, 6)", complete_insensitivity, 10.0);
  criterion(5, "two-node finiteness examples", figure_one);
  criterion(6, "hitting times as meeting times", hitting_corollary);
  criterion(7, "Kemeny constant row independence", kemeny_remark);
  criterion(8, "closed form vs Monte Carlo and value iteration", monte_carlo_equivalence, 300.0);
  criterion(9, "adjoint gradients vs finite differences", gradients);
  criterion(10, "grid-3x3 pursuer vs baselines", grid_qualitative);
  criterion(11, "Kronecker identities", kronecker_identities);
  std::printf("%s: %d of 11 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
