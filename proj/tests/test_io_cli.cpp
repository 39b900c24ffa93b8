#include "cli.hpp"

#include "kronmeet/error.hpp"
#include "kronmeet/io.hpp"
#include "kronmeet/strategies.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace kronmeet;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;

  json doc() const { return json::parse(out); }
};

Run invoke(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "kronmeet");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("kronmeet_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("numbers and infinities") {
    CHECK(io::number(2.5) == json(2.5));
    CHECK(io::number(kInfinity) == json("inf"));
    CHECK(io::to_number(json("inf")) == kInfinity);
    CHECK(io::to_number(json("-inf")) == -kInfinity);
    CHECK_THROWS_AS(io::to_number(json("fast")), Error);
  }

  TEST_CASE("chain documents round trip exactly") {
    auto g = std::make_shared<const Digraph>(make_grid(2, 3));
    const auto p = max_entropy_chain(g, StationaryDistribution::uniform(6)).chain;
    const auto pi = stationary_distribution(p);
    const json doc = io::chain_to_json(p, &pi);
    const auto back = io::chain_from_json(io::parse(doc.dump()));
    CHECK(back.matrix() == p.matrix());
    CHECK(back.graph() == p.graph());
    CHECK(io::chain_pi_from_json(io::parse(doc.dump()))->values() == pi.values());
    CHECK_FALSE(io::chain_pi_from_json(io::chain_to_json(p)).has_value());
    CHECK_THROWS_AS(io::chain_from_json(json{{"P", json::array()}}), Error);
  }

  TEST_CASE("chain documents are validated") {
    json doc = io::chain_to_json(equal_neighbor(make_ring(3)));
    doc["P"][0][0] = 0.9;
    CHECK_THROWS_AS(io::chain_from_json(doc), Error);
  }

  TEST_CASE("optimizer options") {
    OptimizerOptions o;
    o.seed = 17;
    o.gradient_tol = 1e-6;
    const auto back = io::options_from_json(io::options_to_json(o));
    CHECK(back.seed == 17);
    CHECK(back.gradient_tol == 1e-6);
    CHECK(back.starts == o.starts);
    CHECK(io::options_from_json(json{{"starts", 3}}).starts == 3);
    CHECK_THROWS_AS(io::options_from_json(json{{"stars", 3}}), Error);
  }

  TEST_CASE("meeting and finiteness documents") {
    Eigen::MatrixXd swap(2, 2);
    swap << 0, 1, 1, 0;
    const auto m = meeting_times(swap, swap);
    const json doc = io::meeting_to_json(m, kInfinity);
    CHECK(doc["M"][0][1] == "inf");
    CHECK(doc["mean"] == "inf");
    const json f = io::finiteness_to_json(finiteness(swap, swap));
    CHECK(f["finite_pairs"] == json::parse("[[true,false],[false,true]]"));
    CHECK(f["witnesses"].size() == 2);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("gen formats") {
    auto r = invoke({"gen", "ring", "5"});
    REQUIRE(r.code == 0);
    CHECK(r.doc()["n"] == 5);
    CHECK(r.doc()["edges"].size() == 15);
    CHECK(r.doc()["config"]["self_loops"] == true);
    r = invoke({"gen", "grid", "2", "3", "--no-self-loops", "--format", "edges"});
    CHECK(r.code == 0);
    CHECK(parse_edge_list(r.out) == make_grid(2, 3, false));
    r = invoke({"gen", "complete", "2", "--format", "dot"});
    CHECK(r.out.find("digraph") != std::string::npos);
  }

  TEST_CASE("complete-graph random walks meet after n steps on average") {
    const auto g = invoke({"gen", "complete", "5"});
    const auto r = invoke({"meet", "--evader", "rw", "--pursuer", "rw"}, g.out);
    REQUIRE(r.code == 0);
    CHECK(io::to_number(r.doc()["mean"]) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(r.doc()["config"]["pi_pursuer_source"] == "stationary");
  }

  TEST_CASE("evader then pursue pipeline on the 5-ring") {
    const auto g = invoke({"gen", "ring", "5"});
    const auto e = invoke({"evader", "kemeny"}, g.out);
    REQUIRE(e.code == 0);
    CHECK(e.doc().contains("pi"));
    CHECK(e.doc()["config"]["optimizer"]["starts"] == 20);
    const auto p = invoke({"pursue", "--starts", "20"}, e.out);
    REQUIRE(p.code == 0);
    CHECK(io::to_number(p.doc()["mean"]) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(p.doc()["config"]["optimizer"]["seed"] == 1);
    // The pursuer output is itself a chain document.
    CHECK_NOTHROW(io::chain_from_json(p.doc()));
  }

  TEST_CASE("pursue can build the evader itself") {
    const auto g = invoke({"gen", "ring", "6"});
    const auto p = invoke({"pursue", "--evader-strategy", "tour", "--starts", "5"}, g.out);
    REQUIRE(p.code == 0);
    CHECK(io::to_number(p.doc()["mean"]) == doctest::Approx(3.5).epsilon(1e-6));
    CHECK(p.doc()["best_response"] == "stationary");
  }

  TEST_CASE("finite on the pure two-cycle") {
    const auto chain = io::chain_to_json(hamiltonian_tour(std::make_shared<const Digraph>(make_complete(2, false))));
    const auto path = temp_file("swap.json", chain.dump());
    const auto r = invoke({"finite", "--pursuer", path, "--evader", path}, "");
    REQUIRE(r.code == 0);
    CHECK(r.doc()["finite_pairs"] == json::parse("[[true,false],[false,true]]"));
    CHECK(r.doc()["spectral_radius_lt_one"] == false);
    std::remove(path.c_str());
  }

  TEST_CASE("hit reports the Kemeny constant") {
    const auto chain = io::chain_to_json(equal_neighbor(make_complete(4)));
    const auto r = invoke({"hit"}, chain.dump());
    REQUIRE(r.code == 0);
    CHECK(r.doc()["kemeny"].get<double>() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.doc()["H"][0][1].get<double>() == doctest::Approx(4.0).epsilon(1e-12));
  }

  TEST_CASE("sim reports exact values next to estimates") {
    const auto g = invoke({"gen", "ring", "5"});
    const auto r = invoke({"sim", "--pursuer", "reverse-tour", "--evader", "tour", "--start", "3", "1", "--trials",
                           "200"},
                          g.out);
    REQUIRE(r.code == 0);
    const auto b = r.doc()["batches"][0];
    CHECK(b["mean"] == 1.0);
    CHECK(b["exact"].get<double>() == doctest::Approx(1.0));
    CHECK(r.doc()["config"]["seed"] == 1);
  }

  TEST_CASE("usage errors exit with 2") {
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"gen", "torus", "3"}).code == 2);
    CHECK(invoke({"meet", "--pursuer", "no-such-thing"}, invoke({"gen", "ring", "4"}).out).code == 2);
    CHECK(invoke({"hit"}, invoke({"gen", "ring", "4"}).out).code == 2);
    CHECK(invoke({"--help"}).code == 0);
  }

  TEST_CASE("domain errors exit with 1 and a JSON error") {
    auto r = invoke({"gen", "ring", "2"});
    CHECK(r.code == 1);
    CHECK(r.doc()["error"]["kind"] == "invalid_size");

    const auto chain = io::chain_to_json(stationary_chain(std::make_shared<const Digraph>(make_ring(3))));
    r = invoke({"hit"}, chain.dump());
    CHECK(r.code == 1);
    CHECK(r.doc()["error"]["kind"] == "reducible");

    const auto pi = temp_file("pi.txt", "0.3 0.7\n");
    const auto g = temp_file("g.txt", "2\n1 1\n1 2\n2 1\n");
    r = invoke({"evader", "entropy", "--graph", g, "--pi", pi});
    CHECK(r.code == 1);
    CHECK(r.doc()["error"]["kind"] == "infeasible");
    std::remove(pi.c_str());
    std::remove(g.c_str());
  }

  TEST_CASE("config files overlay optimizer defaults") {
    const auto cfg = temp_file("cfg.json", R"({"max_outer": 50, "gradient_tol": 1e-6})");
    const auto g = invoke({"gen", "complete", "3"});
    const auto r = invoke({"evader", "entropy", "--config", cfg}, g.out);
    REQUIRE(r.code == 0);
    CHECK(r.doc()["config"]["optimizer"]["max_outer"] == 50);
    CHECK(r.doc()["config"]["optimizer"]["gradient_tol"] == 1e-6);
    const auto bad = temp_file("bad.json", R"({"max_outr": 50})");
    CHECK(invoke({"evader", "entropy", "--config", bad}, g.out).code == 1);
    std::remove(cfg.c_str());
    std::remove(bad.c_str());
  }
}
