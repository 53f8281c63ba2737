#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hkcalc/cli.hpp"
#include "hkcalc/errors.hpp"
#include "hkcalc/rng.hpp"
#include "json.hpp"

using namespace hkcalc;
using namespace hkcalc::cli;
using nlohmann::json;

namespace {

const std::string kDemo = HKCALC_DEMO_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = execute(parse(args), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream l(line);
    std::string c;
    while (std::getline(l, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("parse examples") {
  const auto v = parse({"verify", "--seed", "42"});
  CHECK(v.subcommand == "verify");
  CHECK(v.seed == 42);

  const auto a = parse({"apply", "--matrix", "m.csv", "--fn", "f.json", "--eps", "1e-10", "--out", "fa.csv"});
  CHECK(a.subcommand == "apply");
  CHECK(a.matrix_path == "m.csv");
  CHECK(a.fn == "f.json");
  CHECK(a.eps == 1e-10);
  CHECK(a.out_path == "fa.csv");

  const auto s = parse({"spectrum-map", "--fn", "heaviside:0.5", "--model", "continuum:0,1"});
  CHECK(s.subcommand == "spectrum-map");
  CHECK(s.fn == "heaviside:0.5");
  CHECK(s.model == "continuum:0,1");

  CHECK(parse({"domain-test", "--model", "geometric:0.5"}).eps == 1e-9);
  CHECK(parse({"thomae-demo", "--levels", "1", "2", "3"}).levels == std::vector<std::size_t>{1, 2, 3});
  CHECK_FALSE(parse({"verify", "--help"}).help.empty());
}

TEST_CASE("parse rejects malformed invocations") {
  CHECK_THROWS_AS(parse({}), UsageError);
  CHECK_THROWS_AS(parse({"frobnicate"}), UsageError);
  CHECK_THROWS_AS(parse({"verify", "--nope"}), UsageError);
  CHECK_THROWS_AS(parse({"verify", "--seed", "x"}), UsageError);
  CHECK_THROWS_AS(parse({"apply", "--fn", "identity"}), UsageError);
  CHECK_THROWS_AS(parse({"apply", "--matrix", "m.csv", "--fn", "identity", "--eps", "-1"}), UsageError);
  CHECK_THROWS_AS(parse({"verify", "--format", "xml"}), UsageError);
  CHECK_THROWS_AS(parse({"spectrum-map", "--fn", "identity", "--model", "continuum:0"}), UsageError);
}

TEST_CASE("function specifications") {
  const Domain k{0.0, 1.0};
  const auto h = parse_function("heaviside:0.5", k);
  CHECK(h.eval(0.5) == Complex{1.0, 0.0});
  CHECK(h.eval(0.49) == Complex{0.0, 0.0});
  const auto hj = parse_function(R"({"kind":"step","cuts":[0.5],"values":[0,1]})", k);
  for (double x : {0.0, 0.25, 0.5, 0.75, 1.0}) CHECK(hj.eval(x) == h.eval(x));

  const auto p = parse_function("point:0.25", k);
  CHECK(p.eval(0.25) == Complex{1.0, 0.0});
  CHECK(p.eval(0.2500001) == Complex{0.0, 0.0});

  CHECK(parse_function("thomae:4", k).eval(0.75).real() == 0.25);
  CHECK(parse_function("thomae:4", k).eval(0.2).real() == 0.0);
  CHECK(parse_function("thomae:inf", k).eval(0.2).real() == doctest::Approx(0.2));

  const auto poly = parse_function("poly:1,0,2", k);
  CHECK(poly.eval(0.5).real() == doctest::Approx(1.5));

  const auto pw = parse_function(
      R"({"kind":"piecewise","breaks":[0.5],"pieces":[{"kind":"const","value":[0,1]},{"kind":"identity"}],
          "atoms":[{"at":0.75,"value":-3}]})",
      k);
  CHECK(pw.eval(0.25) == Complex{0.0, 1.0});
  CHECK(pw.eval(0.5).real() == 0.5);
  CHECK(pw.eval(0.75).real() == -3.0);
  CHECK(pw.side_limits(0.5).left == Complex{0.0, 1.0});

  const auto dom = parse_function(R"({"kind":"identity","domain":[-2,2]})", k);
  CHECK(dom.domain() == Domain{-2.0, 2.0});

  CHECK_THROWS_AS(parse_function("heaviside", k), ArgumentError);
  CHECK_THROWS_AS(parse_function("heaviside:0.5,1", k), ArgumentError);
  CHECK_THROWS_AS(parse_function("thomae:1.5", k), ArgumentError);
  CHECK_THROWS_AS(parse_function("wiggle:1", k), ArgumentError);
  CHECK_THROWS_AS(parse_function(R"({"kind":"step","cuts":[0.5],"values":[1]})", k), ArgumentError);
}

TEST_CASE("format_number round trips") {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.index(0, 200)) - 100);
    const std::string s = format_number(x);
    double y = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), y);
    CHECK(y == x);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.1) == "0.1");
}

TEST_CASE("thomae-demo gaps are nonincreasing") {
  const auto r = run({"thomae-demo", "--format", "csv"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == std::vector<std::string>{"level", "gap", "bound"});
  double prev = INFINITY;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double gap = std::stod(rows[i][1]);
    CHECK(gap <= prev);
    CHECK(gap <= std::stod(rows[i][2]));
    prev = gap;
  }
  CHECK(prev == 0.0);
  const auto j = json::parse(run({"thomae-demo"}).out);
  CHECK(j["reference_level"] == 6);
  CHECK(j["samples"].size() > 1000);
}

TEST_CASE("mult-norm of the Heaviside on the grid") {
  const auto j = json::parse(run({"mult-norm", "--fn", "heaviside:0.5", "--grid", "128"}).out);
  CHECK(j["op_norm"].get<double>() == 1.0);
  CHECK(j["sup_norm_nodes"].get<double>() == 1.0);
  CHECK(j["sup_norm"].get<double>() == 1.0);
}

TEST_CASE("spectrum-map on the continuum") {
  const auto j = json::parse(run({"spectrum-map", "--fn", "heaviside:0.5", "--model", "continuum:0,1"}).out);
  CHECK(j["points"] == json::parse("[[0.0,0.0],[1.0,0.0]]"));
  const auto p = json::parse(run({"spectrum-map", "--fn", "point:0.5", "--model", "continuum:0,1"}).out);
  CHECK(p["points"] == json::parse("[[0.0,0.0]]"));
}

TEST_CASE("apply and finite spectrum-map") {
  const std::string m = kDemo + "/tridiag.csv";
  const auto r = run({"apply", "--matrix", m, "--fn", "identity", "--format", "csv"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  const double expect[3][3] = {{2, 1, 0}, {1, 2, 1}, {0, 1, 2}};
  REQUIRE(rows.size() == 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::stod(rows[i][j]) == doctest::Approx(expect[i][j]).epsilon(1e-13));

  const auto s = json::parse(run({"spectrum-map", "--fn", "heaviside:2", "--matrix", m}).out);
  CHECK(s["points"] == json::parse("[[0.0,0.0],[1.0,0.0]]"));
  const auto c = run({"apply", "--matrix", m, "--fn", "constant:0", "--format", "csv"});
  CHECK(c.out == "0,0,0\n0,0,0\n0,0,0\n");
}

TEST_CASE("domain-test verdicts") {
  const auto j = json::parse(run({"domain-test", "--model", "geometric:0.5"}).out);
  CHECK(j["member"] == true);
  CHECK(j["value"].get<double>() == doctest::Approx(6.0).epsilon(1e-9));
  const auto d = json::parse(run({"domain-test", "--model", "density:power:1.5"}).out);
  CHECK(d["member"] == false);
  const auto sums = d["partial_sums"].get<std::vector<double>>();
  REQUIRE(sums.size() > 3);
  CHECK(sums.back() > sums.front() + 10.0);
  const auto g = json::parse(run({"domain-test", "--model", "density:gauss:1"}).out);
  CHECK(g["member"] == true);
  CHECK(g["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("cauchy-solve") {
  const auto eq = json::parse(run({"cauchy-solve", "--config", kDemo + "/cauchy_equilibrium.json"}).out);
  for (const auto& pt : eq["trajectory"])
    for (double u : pt["u"].get<std::vector<double>>()) CHECK(std::abs(u - 1.0) <= 1e-10);
  CHECK(eq["report"].is_null());

  const auto r = run({"cauchy-solve", "--config", kDemo + "/cauchy_demo.json", "--format", "csv"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"level", "measured", "bound", "ok"});
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][3] == "true");
}

TEST_CASE("errors and output files") {
  const auto bad = run({"apply", "--matrix", kDemo + "/tridiag.csv", "--fn", "thomae:3", "--error-json"});
  CHECK(bad.code == 1);
  const auto e = json::parse(bad.err);
  CHECK(e["error"]["type"] == "DomainError");
  CHECK(run({"apply", "--matrix", "/nonexistent.csv", "--fn", "identity"}).code == 1);

  const std::string path = "test_cli_out.csv";
  const auto w = run({"mult-norm", "--fn", "constant:2", "--format", "csv", "--out", path});
  CHECK(w.out.empty());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "op_norm,sup_norm_nodes,sup_norm\n2,2,2\n");
  std::remove(path.c_str());
}

TEST_CASE("verify is deterministic and passes") {
  const auto a = run({"verify", "--seed", "42"});
  const auto b = run({"verify", "--seed", "42"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("FAIL") == std::string::npos);
  const auto c = run({"verify", "--seed", "7", "--format", "csv"});
  CHECK(c.code == 0);
  CHECK(c.out.starts_with("name,worst,tol,pass\n"));
}
