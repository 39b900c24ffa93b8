#include "cli.hpp"

#include "repro.hpp"

#include "kronmeet/error.hpp"
#include "kronmeet/io.hpp"
#include "kronmeet/meeting.hpp"
#include "kronmeet/sim.hpp"
#include "kronmeet/strategies.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace kronmeet::cli {

namespace {

using nlohmann::json;
using GraphPtr = std::shared_ptr<const Digraph>;

/// Bad flag combinations or unreadable inputs; exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int default_threads() {
  if (const char* env = std::getenv("KRONMEET_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 1) return t;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Whatever arrived on stdin or in a --graph file: a graph, optionally with
/// a chain on it and that chain's recorded distribution.
struct Document {
  GraphPtr graph;
  std::optional<StochasticMatrix> chain;
  std::optional<StationaryDistribution> pi;
};

Document parse_document(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw UsageError("empty input; expected a graph or chain document");
  Document doc;
  if (text[first] != '{') {
    doc.graph = std::make_shared<const Digraph>(parse_edge_list(text));
    return doc;
  }
  const json j = io::parse(text);
  if (j.contains("P")) {
    auto chain = io::chain_from_json(j);
    doc.graph = chain.graph_ptr();
    doc.chain = std::move(chain);
    doc.pi = io::chain_pi_from_json(j);
  } else if (j.contains("graph")) {
    doc.graph = std::make_shared<const Digraph>(io::graph_from_json(j["graph"]));
  } else {
    doc.graph = std::make_shared<const Digraph>(io::graph_from_json(j));
  }
  return doc;
}

class Context {
 public:
  Context(std::istream& in, std::ostream& out, std::ostream& err) : in_(in), out_(out), err_(err) {}

  const Document& stdin_document() {
    if (!stdin_) {
      std::string text{std::istreambuf_iterator<char>(in_), std::istreambuf_iterator<char>()};
      stdin_ = parse_document(text);
    }
    return *stdin_;
  }

  /// The graph from --graph when given, otherwise from stdin.
  GraphPtr graph(const std::string& graph_path) {
    if (!graph_path.empty()) return parse_document(read_file(graph_path)).graph;
    return stdin_document().graph;
  }

  void emit(const json& doc, bool pretty) { out_ << (pretty ? doc.dump(2) : doc.dump()) << '\n'; }
  std::ostream& err() { return err_; }

 private:
  std::istream& in_;
  std::ostream& out_;
  std::ostream& err_;
  std::optional<Document> stdin_;
};

struct Common {
  int threads = default_threads();
  std::string config_path;
  std::uint64_t seed = 1;
  int starts = 20;
  bool pretty = false;

  OptimizerOptions optimizer() const {
    OptimizerOptions o;
    if (!config_path.empty()) o = io::options_from_json(io::parse(read_file(config_path)), o);
    o.threads = threads;
    return o;
  }
};

/// `spec` is a strategy keyword, a chain file, or "-" for the chain on stdin.
struct Walker {
  StochasticMatrix chain;
  std::optional<StationaryDistribution> pi;
  std::string source;
};

bool is_strategy(const std::string& s) {
  try {
    parse_strategy(s);
    return true;
  } catch (const Error&) {
    return false;
  }
}

Walker resolve_walker(Context& ctx, const std::string& spec, const std::string& graph_path,
                      const StationaryDistribution* target_pi, const OptimizerOptions& opts) {
  if (spec == "-") {
    const auto& doc = ctx.stdin_document();
    if (!doc.chain) throw UsageError("stdin holds a graph, not a chain; name a strategy instead");
    return {*doc.chain, doc.pi, "stdin"};
  }
  if (is_strategy(spec)) {
    auto s = parse_strategy(spec);
    auto g = ctx.graph(graph_path);
    if (target_pi) s.target_pi = *target_pi;
    auto chain = build_strategy(s, g, opts);
    std::optional<StationaryDistribution> pi;
    if (s.kind == StrategyKind::MaxEntropy || s.kind == StrategyKind::MinKemeny) {
      pi = s.target_pi ? *s.target_pi : StationaryDistribution::uniform(g->size());
    }
    return {std::move(chain), std::move(pi), strategy_name(s)};
  }
  if (!std::filesystem::exists(spec)) throw UsageError("'" + spec + "' is neither a strategy nor a chain file");
  auto doc = parse_document(read_file(spec));
  if (!doc.chain) throw UsageError(spec + " holds a graph, not a chain");
  return {*doc.chain, doc.pi, spec};
}

/// "uniform", a JSON/whitespace vector file, or empty for the default.
std::optional<StationaryDistribution> read_pi(const std::string& spec, int n) {
  if (spec.empty() || spec == "auto") return std::nullopt;
  if (spec == "uniform") return StationaryDistribution::uniform(n);
  const auto text = read_file(spec);
  Eigen::VectorXd v;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
    auto j = io::parse(text);
    v = io::vector_from_json(j.is_object() ? j.at("pi") : j);
  } else {
    std::istringstream in(text);
    std::vector<double> values{std::istream_iterator<double>(in), std::istream_iterator<double>()};
    v = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  if (v.size() != n) {
    throw Error(ErrorKind::DimensionMismatch,
                "distribution has " + std::to_string(v.size()) + " entries, graph has " + std::to_string(n));
  }
  return StationaryDistribution(v);
}

/// Explicit flag, else the distribution recorded with the chain, else the
/// chain's unique stationary distribution, else `fallback`.
std::pair<StationaryDistribution, std::string> weights_for(const Walker& w, const std::string& flag,
                                                        const StationaryDistribution* fallback) {
  if (auto pi = read_pi(flag, w.chain.size())) return {*pi, flag};
  if (w.pi) return {*w.pi, "recorded"};
  try {
    return {stationary_distribution(w.chain), "stationary"};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonUniqueStationary || !fallback) throw;
    return {*fallback, "other walker"};
  }
}

struct PairInputs {
  Walker pursuer;
  Walker evader;
  StationaryDistribution pi_p;
  StationaryDistribution pi_e;
  json config;
};

struct PairFlags {
  std::string pursuer = "-";
  std::string evader = "-";
  std::string graph;
  std::string pi;
  std::string pi_pursuer;
  std::string pi_evader;
};

void add_pair_flags(CLI::App* cmd, PairFlags& f) {
  cmd->add_option("--pursuer", f.pursuer, "strategy keyword, chain file, or - for stdin")->capture_default_str();
  cmd->add_option("--evader", f.evader, "strategy keyword, chain file, or - for stdin")->capture_default_str();
  cmd->add_option("--graph", f.graph, "graph file used to build strategies (default: stdin)");
  cmd->add_option("--pi", f.pi, "target distribution for optimized strategies: uniform or a file");
  cmd->add_option("--pi-pursuer", f.pi_pursuer, "weights for pursuer starts: uniform or a file");
  cmd->add_option("--pi-evader", f.pi_evader, "weights for evader starts: uniform or a file");
}

PairInputs resolve_pair(Context& ctx, const PairFlags& f, const OptimizerOptions& opts) {
  std::optional<StationaryDistribution> target;
  if (!f.pi.empty()) target = read_pi(f.pi, ctx.graph(f.graph)->size());
  auto pursuer = resolve_walker(ctx, f.pursuer, f.graph, target ? &*target : nullptr, opts);
  auto evader = resolve_walker(ctx, f.evader, f.graph, target ? &*target : nullptr, opts);
  if (!(pursuer.chain.graph() == evader.chain.graph())) {
    throw Error(ErrorKind::DimensionMismatch, "pursuer and evader live on different graphs");
  }
  // Resolve the evader first so a stationary pursuer can borrow its weights.
  std::optional<std::pair<StationaryDistribution, std::string>> pe;
  std::optional<std::pair<StationaryDistribution, std::string>> pp;
  try {
    pe = weights_for(evader, f.pi_evader, nullptr);
    pp = weights_for(pursuer, f.pi_pursuer, &pe->first);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonUniqueStationary || pe) throw;
    pp = weights_for(pursuer, f.pi_pursuer, nullptr);
    pe = weights_for(evader, f.pi_evader, &pp->first);
  }
  json config{{"pursuer", pursuer.source},
              {"evader", evader.source},
              {"pi_pursuer", io::vector_to_json(pp->first.values())},
              {"pi_pursuer_source", pp->second},
              {"pi_evader", io::vector_to_json(pe->first.values())},
              {"pi_evader_source", pe->second}};
  return {std::move(pursuer), std::move(evader), pp->first, pe->first, std::move(config)};
}

json base_config(const std::string& command, const Common& c) {
  return json{{"command", command}, {"threads", c.threads}, {"time_convention", "first t >= 1"}};
}

}  // namespace

int run(int argc, char** argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact meeting times of two Markov walkers on a digraph", "kronmeet"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--threads", common.threads, "worker threads (default: $KRONMEET_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--pretty", common.pretty, "indent JSON output");

  Context ctx(in, out, err);
  std::function<void()> action;

  // gen
  auto* gen = app.add_subcommand("gen", "generate a ring, complete or grid graph");
  std::string gen_kind, gen_format = "json";
  std::vector<int> gen_sizes;
  bool no_self_loops = false;
  gen->add_option("kind", gen_kind)->required()->check(CLI::IsMember({"ring", "complete", "grid"}));
  gen->add_option("size", gen_sizes, "n, or rows cols for a grid")->required()->expected(1, 2);
  gen->add_flag("--no-self-loops", no_self_loops);
  gen->add_option("--format", gen_format)->check(CLI::IsMember({"json", "edges", "dot"}))->capture_default_str();
  gen->callback([&] {
    action = [&] {
      const bool loops = !no_self_loops;
      std::optional<Digraph> g;
      if (gen_kind == "grid") {
        if (gen_sizes.size() != 2) throw UsageError("gen grid needs rows and cols");
        g = make_grid(gen_sizes[0], gen_sizes[1], loops);
      } else {
        if (gen_sizes.size() != 1) throw UsageError("gen " + gen_kind + " takes a single size");
        g = gen_kind == "ring" ? make_ring(gen_sizes[0], loops) : make_complete(gen_sizes[0], loops);
      }
      if (gen_format == "edges") {
        out << serialize_edge_list(*g);
      } else if (gen_format == "dot") {
        out << to_dot(*g);
      } else {
        json doc = io::graph_to_json(*g);
        doc["config"] = base_config("gen", common);
        doc["config"].update({{"kind", gen_kind}, {"size", gen_sizes}, {"self_loops", loops}});
        ctx.emit(doc, common.pretty);
      }
    };
  });

  // meet / finite
  PairFlags meet_flags;
  auto* meet = app.add_subcommand("meet", "meeting-time matrix and mean meeting time");
  add_pair_flags(meet, meet_flags);
  meet->callback([&] {
    action = [&] {
      const auto opts = common.optimizer();
      auto p = resolve_pair(ctx, meet_flags, opts);
      auto m = meeting_times(p.pursuer.chain, p.evader.chain);
      json doc = io::meeting_to_json(m, mean_meeting_time(m, p.pi_p, p.pi_e));
      doc["config"] = base_config("meet", common);
      doc["config"].update(p.config);
      doc["config"]["optimizer"] = io::options_to_json(opts);
      ctx.emit(doc, common.pretty);
    };
  });

  PairFlags finite_flags;
  auto* finite = app.add_subcommand("finite", "which start pairs have finite meeting times");
  add_pair_flags(finite, finite_flags);
  finite->callback([&] {
    action = [&] {
      const auto opts = common.optimizer();
      auto p = resolve_pair(ctx, finite_flags, opts);
      json doc = io::finiteness_to_json(finiteness(p.pursuer.chain, p.evader.chain));
      doc["spectral_radius_lt_one"] =
          spectral_radius_lt_one(killed_product(p.pursuer.chain.matrix(), p.evader.chain.matrix()));
      doc["config"] = base_config("finite", common);
      doc["config"].update(p.config);
      ctx.emit(doc, common.pretty);
    };
  });

  // hit
  std::string hit_chain = "-";
  auto* hit = app.add_subcommand("hit", "hitting times and Kemeny constant of an irreducible chain");
  hit->add_option("--chain", hit_chain, "chain file or - for stdin")->capture_default_str();
  hit->callback([&] {
    action = [&] {
      auto w = resolve_walker(ctx, hit_chain, "", nullptr, common.optimizer());
      auto h = hitting_times(w.chain);
      auto pi = stationary_distribution(w.chain);
      const Eigen::VectorXd rows = h.times * pi.values();
      json doc{{"H", io::matrix_to_json(h.times)},
               {"pi", io::vector_to_json(pi.values())},
               {"kemeny", rows.mean()},
               {"kemeny_by_row", io::vector_to_json(rows)},
               {"residual", h.residual}};
      doc["config"] = base_config("hit", common);
      doc["config"]["chain"] = w.source;
      ctx.emit(doc, common.pretty);
    };
  });

  // evader
  std::string evader_kind, evader_graph, evader_pi;
  auto* evader = app.add_subcommand("evader", "synthesise an evader chain");
  evader->add_option("model", evader_kind, "rw, entropy, kemeny (or any strategy keyword)")->required();
  evader->add_option("--graph", evader_graph, "graph file (default: stdin)");
  evader->add_option("--pi", evader_pi, "target distribution: uniform or a file (default uniform)");
  evader->add_option("--starts", common.starts, "starts for the Kemeny program")->capture_default_str();
  evader->add_option("--seed", common.seed)->capture_default_str();
  evader->add_option("--config", common.config_path, "optimizer options (JSON)");
  evader->callback([&] {
    action = [&] {
      auto opts = common.optimizer();
      opts.seed = common.seed;
      opts.starts = common.starts;
      auto g = ctx.graph(evader_graph);
      auto spec = parse_strategy(evader_kind);
      if (auto pi = read_pi(evader_pi, g->size())) spec.target_pi = *pi;
      const auto target = spec.target_pi.value_or(StationaryDistribution::uniform(g->size()));
      json doc;
      json summary;
      if (spec.kind == StrategyKind::MaxEntropy || spec.kind == StrategyKind::MinKemeny) {
        auto r = spec.kind == StrategyKind::MaxEntropy ? max_entropy_chain(g, target, opts)
                                                       : min_kemeny_chain(g, target, opts.starts, opts);
        doc = io::chain_to_json(r.chain, &target);
        summary = io::optimization_to_json(r);
        doc["objective"] = io::number(r.objective);
      } else {
        auto chain = build_strategy(spec, g, opts);
        std::optional<StationaryDistribution> pi;
        try {
          pi = stationary_distribution(chain);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NonUniqueStationary) throw;
          pi = target;
        }
        doc = io::chain_to_json(chain, &*pi);
      }
      doc["strategy"] = strategy_name(spec);
      if (!summary.is_null()) doc["optimization"] = summary;
      doc["config"] = base_config("evader", common);
      doc["config"]["optimizer"] = io::options_to_json(opts);
      doc["config"]["target_pi"] = io::vector_to_json(target.values());
      ctx.emit(doc, common.pretty);
    };
  });

  // pursue
  std::string pursue_evader = "-", pursue_strategy, pursue_graph, pursue_pi, pursue_pi_pursuer;
  auto* pursue = app.add_subcommand("pursue", "optimize the pursuer against an evader");
  pursue->add_option("--evader", pursue_evader, "evader chain file or - for stdin")->capture_default_str();
  pursue->add_option("--evader-strategy", pursue_strategy, "build the evader from the graph instead");
  pursue->add_option("--graph", pursue_graph, "graph file for --evader-strategy (default: stdin)");
  pursue->add_option("--pi", pursue_pi, "target distribution for an optimized evader strategy");
  pursue->add_option("--pi-pursuer", pursue_pi_pursuer, "pursuer distribution (default: the evader's)");
  pursue->add_option("--starts", common.starts)->capture_default_str();
  pursue->add_option("--seed", common.seed)->capture_default_str();
  pursue->add_option("--config", common.config_path, "optimizer options (JSON)");
  pursue->callback([&] {
    action = [&] {
      auto opts = common.optimizer();
      opts.seed = common.seed;
      opts.starts = common.starts;
      std::optional<StationaryDistribution> target;
      if (!pursue_pi.empty()) target = read_pi(pursue_pi, ctx.graph(pursue_graph)->size());
      auto w = resolve_walker(ctx, pursue_strategy.empty() ? pursue_evader : pursue_strategy, pursue_graph,
                              target ? &*target : nullptr, opts);
      auto [pi_e, pi_e_source] = weights_for(w, "", nullptr);
      auto pi_p = read_pi(pursue_pi_pursuer, w.chain.size()).value_or(pi_e);
      auto r = minimize_mean_meeting(w.chain.graph_ptr(), w.chain, pi_p, pi_e, opts);
      json doc = io::chain_to_json(r.chain, &pi_p);
      doc["mean"] = io::number(r.objective);
      doc["best_response"] = classify_response(r.chain);
      doc["evader"] = io::chain_to_json(w.chain, &pi_e);
      doc["optimization"] = io::optimization_to_json(r);
      doc["config"] = base_config("pursue", common);
      doc["config"].update({{"evader", w.source},
                            {"pi_evader_source", pi_e_source},
                            {"pi_pursuer_source", pursue_pi_pursuer.empty() ? "evader" : pursue_pi_pursuer},
                            {"optimizer", io::options_to_json(opts)}});
      ctx.emit(doc, common.pretty);
    };
  });

  // sim
  PairFlags sim_flags;
  std::vector<int> sim_start;
  long sim_trials = 10000, sim_max_steps = 0;
  auto* sim = app.add_subcommand("sim", "Monte Carlo meeting times");
  add_pair_flags(sim, sim_flags);
  sim->add_option("--start", sim_start, "pursuer and evader start nodes (1-based); all pairs when omitted")
      ->expected(2);
  sim->add_option("--trials", sim_trials)->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--max-steps", sim_max_steps, "horizon per trial (0: 100 n^2)")->capture_default_str();
  sim->add_option("--seed", common.seed)->capture_default_str();
  sim->callback([&] {
    action = [&] {
      const auto opts = common.optimizer();
      auto p = resolve_pair(ctx, sim_flags, opts);
      const auto& pp = p.pursuer.chain;
      const auto& pe = p.evader.chain;
      const int n = pp.size();
      std::vector<TrialBatch> batches;
      if (!sim_start.empty()) {
        if (sim_start[0] < 1 || sim_start[0] > n || sim_start[1] < 1 || sim_start[1] > n) {
          throw UsageError("--start nodes must lie in 1.." + std::to_string(n));
        }
        batches.push_back(simulate_meeting(pp, pe, sim_start[0] - 1, sim_start[1] - 1, sim_trials, sim_max_steps,
                                           common.seed, common.threads));
      } else {
        batches = simulate_all_pairs(pp.matrix(), pe.matrix(), sim_trials, sim_max_steps, common.seed,
                                     common.threads);
      }
      auto exact = meeting_times(pp, pe);
      json rows = json::array();
      for (const auto& b : batches) {
        json row = io::batch_to_json(b);
        row["exact"] = io::number(exact(b.pursuer_start, b.evader_start));
        rows.push_back(std::move(row));
      }
      json doc{{"batches", rows}};
      doc["config"] = base_config("sim", common);
      doc["config"].update(p.config);
      doc["config"].update({{"seed", common.seed},
                            {"trials", sim_trials},
                            {"max_steps", sim_max_steps > 0 ? sim_max_steps : default_max_steps(n)}});
      ctx.emit(doc, common.pretty);
    };
  });

  // repro
  std::string repro_target, repro_out;
  auto* repro = app.add_subcommand("repro", "reproduce the ring, complete-graph and grid experiments");
  repro->add_option("target", repro_target)
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "grid-figures"}));
  repro->add_option("--out-dir", repro_out, "also write DOT/JSON artifacts here");
  repro->add_option("--starts", common.starts)->capture_default_str();
  repro->add_option("--seed", common.seed)->capture_default_str();
  repro->add_option("--config", common.config_path, "optimizer options (JSON)");
  repro->callback([&] {
    action = [&] {
      ReproOptions ro;
      ro.optimizer = common.optimizer();
      ro.optimizer.seed = common.seed;
      ro.optimizer.starts = common.starts;
      if (!repro_out.empty()) ro.out_dir = repro_out;
      json doc = repro_target == "table1"   ? repro_ring_table(ro)
                 : repro_target == "table2" ? repro_complete_table(ro)
                                            : repro_grid(ro);
      doc["config"] = base_config("repro", common);
      doc["config"]["optimizer"] = io::options_to_json(ro.optimizer);
      ctx.emit(doc, common.pretty);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    action();
    return 0;
  } catch (const UsageError& e) {
    err << "kronmeet: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    ctx.emit(json{{"error", {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}}}}, common.pretty);
    return 1;
  } catch (const json::exception& e) {
    ctx.emit(json{{"error", {{"kind", "parse_error"}, {"message", e.what()}}}}, common.pretty);
    return 1;
  }
}

}  // namespace kronmeet::cli
