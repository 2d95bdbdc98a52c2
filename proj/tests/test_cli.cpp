#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using nlohmann::json;
using ustlab::cli::run_cli;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
  json doc() const { return json::parse(out); }
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string domain(const std::string& name) { return std::string(USTLAB_DOMAINS) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = std::string(USTLAB_TMP) + "/" + name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("combinat dumps the N = 2 incidence matrices") {
  const auto r = cli({"combinat", "--n", "2"});
  REQUIRE(r.code == 0);
  const auto d = r.doc();
  CHECK(d["schema"] == "ustlab.result");
  CHECK(d["schema_version"] == "1.0");
  CHECK(d["metadata"]["backend"] == "rational");
  // ()() sits below (()) in dominance: one reversal, one cover-inclusive tiling
  CHECK(d["results"]["order"] == json({"()()", "(())"}));
  CHECK(d["results"]["M"] == json({{1, -1}, {0, 1}}));
  CHECK(d["results"]["Minv"] == json({{1, 1}, {0, 1}}));
  CHECK(d["results"]["tilings"].size() == 3);
}

TEST_CASE("combinat CSV and guards") {
  const auto r = cli({"combinat", "--n", "3", "--format", "csv"});
  REQUIRE(r.code == 0);
  int lines = 0;
  for (char c : r.out) lines += c == '\n';
  CHECK(lines == 2 + 2 * 25);
  CHECK(r.out.rfind("# ustlab.result 1.0", 0) == 0);
  CHECK(cli({"combinat", "--n", "9"}).code == ustlab::cli::kExitUsage);
  CHECK(cli({"combinat", "--format", "svg"}).code == ustlab::cli::kExitUsage);
  CHECK(cli({"nonsense"}).code != 0);
}

TEST_CASE("exact on a single interior vertex") {
  const auto path = write_temp("single.json", R"({
    "rectangle": {"width": 2, "height": 2}, "delta": 1, "corner_margin": 0.5,
    "marks": [{"x": 1, "y": 0}, {"x": 2, "y": 1}]})");
  const auto r = cli({"exact", "--domain", path});
  REQUIRE(r.code == 0);
  const auto d = r.doc();
  CHECK(d["metadata"]["backend"] == "rational");
  CHECK(d["metadata"]["tolerance"] == 0.0);
  // the walk leaves through each of the four boundary edges with probability 1/4
  CHECK(d["results"]["patterns"][0]["value_exact"] == "1/4");
  CHECK(d["results"]["interior_vertices"] == 1);
  const auto k = cli({"exact", "--domain", path, "--format", "csv", "--kernel"});
  CHECK(k.code == 0);
  CHECK(k.out.find("label,edge,K1,K2") != std::string::npos);
}

TEST_CASE("domain schema violations and guard violations") {
  const auto unknown = write_temp("unknown.json", R"({"rectangle": {"width": 1, "height": 1}, "delta": 0.25, "colour": 1})");
  auto r = cli({"exact", "--domain", unknown});
  CHECK(r.code == ustlab::cli::kExitUsage);
  CHECK(r.err.find("unknown key \"colour\"") != std::string::npos);

  const auto nodelta = write_temp("nodelta.json", R"({"rectangle": {"width": 1, "height": 1}})");
  CHECK(cli({"exact", "--domain", nodelta}).code == ustlab::cli::kExitUsage);

  const auto badrole = write_temp("badrole.json",
                                  R"({"rectangle": {"width": 1, "height": 1}, "delta": 0.125,
                                      "marks": [{"x": 0.5, "y": 0, "role": "sideways"}]})");
  r = cli({"exact", "--domain", badrole});
  CHECK(r.code == ustlab::cli::kExitUsage);
  CHECK(r.err.find("$.marks[0].role") != std::string::npos);

  // a mark next to a corner is a lattice guard, reported with its module
  r = cli({"exact", "--domain", "rect:1,1", "--delta", "1/8", "--mark", "0.05,0", "--mark", "0.5,1"});
  CHECK(r.code == ustlab::cli::kExitGuard);
  CHECK(r.err.find("lattice") != std::string::npos);

  // marks given clockwise
  r = cli({"exact", "--domain", "rect:1,1", "--delta", "1/8", "--mark", "0.5,1", "--mark", "0.5,0", "--mark",
           "1,0.5", "--mark", "0,0.5"});
  CHECK(r.code == ustlab::cli::kExitUsage);
  CHECK(cli({"exact", "--domain", domain("square_n2.json"), "--pattern", "((("}).code == ustlab::cli::kExitUsage);
  CHECK(cli({"exact", "--domain", domain("square_n2.json"), "--pattern", "()"}).code == ustlab::cli::kExitUsage);
}

TEST_CASE("visit reports matching direct and replacing values") {
  // 5 x 5 interior vertices: small enough for the rational backend
  const auto v = cli({"visit", "--domain", "rect:1,1", "--delta", "1/6", "--mark", "0.5,0,in", "--mark", "1,0.5,visit",
                      "--mark", "0.5,1,out"});
  REQUIRE(v.code == 0);
  const auto d = v.doc();
  CHECK(d["metadata"]["backend"] == "rational");
  CHECK(d["results"]["omega"] == "+");
  CHECK(d["results"]["direct_equals_replacing"] == true);
  CHECK(d["results"]["direct_exact"] == d["results"]["replacing_exact"]);
  CHECK(cli({"visit", "--domain", domain("square_visit.json"), "--omega", "-"}).code == ustlab::cli::kExitGuard);
}

TEST_CASE("sample agrees with exact on the 20 x 20 grid") {
  const auto r = cli({"sample", "--domain", domain("grid20_n2.json"), "--samples", "100000", "--seed", "11"});
  REQUIRE(r.code == 0);
  const auto d = r.doc();
  REQUIRE(d["results"]["estimates"].size() == 2);
  for (const auto& e : d["results"]["estimates"]) {
    CHECK(e["within_4se"] == true);
    CHECK(std::abs(e["p_hat"].get<double>() - e["exact"].get<double>()) <= 4 * e["std_error"].get<double>());
  }
  // deterministic given the seed, whatever the worker count
  const auto a = cli({"sample", "--domain", domain("grid20_n2.json"), "--samples", "5000", "--workers", "1", "--format", "csv"});
  const auto b = cli({"sample", "--domain", domain("grid20_n2.json"), "--samples", "5000", "--workers", "5", "--format", "csv"});
  auto body = [](const std::string& s) { return s.substr(s.find('\n')); };
  CHECK(body(a.out) == body(b.out));
  CHECK(cli({"sample", "--domain", domain("grid20_n2.json"), "--samples", "0"}).code == ustlab::cli::kExitUsage);
}

TEST_CASE("continuum values") {
  auto r = cli({"continuum", "--omega", "+", "--points", "0,1,2"});
  REQUIRE(r.code == 0);
  CHECK(r.doc()["results"]["value"].get<double>() == doctest::Approx(4).epsilon(1e-14));
  r = cli({"continuum", "--pattern", "()()", "--points", "0,1,2,3", "--backend", "rational"});
  REQUIRE(r.code == 0);
  // Δ_{()()} + Δ_{(())} = K(0,1) K(2,3) - K(0,2) K(1,3) = 1 - 1/16
  CHECK(r.doc()["results"]["value"].get<double>() == doctest::Approx(15.0 / 16).epsilon(1e-15));
  CHECK(cli({"continuum", "--pattern", "()()", "--points", "0,1,2"}).code == ustlab::cli::kExitUsage);
  CHECK(cli({"continuum", "--pattern", "()()", "--omega", "+", "--points", "0,1,2"}).code == ustlab::cli::kExitUsage);
  CHECK(cli({"continuum", "--pattern", "()", "--points", "1,0"}).code == ustlab::cli::kExitGuard);
}

TEST_CASE("check --pde2 passes at random N = 2 configurations") {
  const auto r = cli({"check", "--pde2"});
  CHECK(r.code == 0);
  const auto d = r.doc();
  CHECK(d["results"]["pass"] == true);
  for (const auto& c : d["results"]["checks"]) {
    CHECK(c["pass"] == true);
    if (c["check"] == "pde2") {
      CHECK(c["worst"].get<double>() <= 1e-6);
      CHECK(c["count"] == 100 * 2 * 4);
    }
  }
  const auto csv = cli({"check", "--asy2", "--configs", "2", "--format", "csv"});
  CHECK(csv.code == 0);
  CHECK(csv.out.find("asy2,") != std::string::npos);
}

TEST_CASE("converge sweeps delta toward the conformal prediction") {
  const auto r = cli({"converge", "--domain", domain("square_n2.json")});
  REQUIRE(r.code == 0);
  const auto d = r.doc();
  CHECK(d["results"]["rows"].size() == 9);
  for (const auto& s : d["results"]["summary"]) {
    CHECK(s["monotone_decrease"] == true);
    CHECK(s["final_deviation"].get<double>() <= 0.05);
  }
  CHECK(cli({"converge", "--domain", domain("square_n2.json"), "--delta", "1/8"}).code == ustlab::cli::kExitUsage);
  const auto lshape = write_temp("lshape.json", R"({"polygon": [[0,0],[2,0],[2,1],[1,1],[1,2],[0,2]], "delta": 0.25})");
  CHECK(cli({"converge", "--domain", lshape}).code == ustlab::cli::kExitUsage);
}

TEST_CASE("figures") {
  auto r = cli({"figure", "--domain", domain("square_n2.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("<svg", 0) == 0);
  CHECK(r.out.find("id=\"tree\"") != std::string::npos);
  CHECK(r.out.find("id=\"branch4\"") != std::string::npos);
  r = cli({"figure", "--domain", domain("square_n2.json"), "--kind", "branches"});
  CHECK(r.out.find("id=\"tree\"") == std::string::npos);
  r = cli({"figure", "--kind", "tiling", "--pattern", "()()()"});
  REQUIRE(r.code == 0);
  // ()()() lies below the rainbow with two cover-inclusive tilings
  CHECK(r.out.find("id=\"tiling2\"") != std::string::npos);
  CHECK(r.out.find("id=\"tiling3\"") == std::string::npos);
  CHECK(cli({"figure", "--kind", "tiling", "--pattern", "()()", "--format", "json"}).code == ustlab::cli::kExitUsage);
  const std::string out = std::string(USTLAB_TMP) + "/fig.svg";
  r = cli({"figure", "--domain", domain("square_n2.json"), "--out", out});
  CHECK(r.code == 0);
  CHECK(std::ifstream(out).good());
}
