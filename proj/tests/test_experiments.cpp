#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qmetric/error.hpp"
#include "qmetric/experiments.hpp"

using namespace qmetric;
using nlohmann::json;

namespace {

const json kZ = {{"family", "free_abelian"}, {"rank", 1}};

std::size_t col(const Report& r, const std::string& name) {
  for (std::size_t i = 0; i < r.columns.size(); ++i)
    if (r.columns[i] == name) return i;
  FAIL("missing column " << name);
  return 0;
}

double cell(const Report& r, std::size_t row, const std::string& name) {
  const auto& v = r.rows.at(row).at(col(r, name));
  if (v.is_string()) return v == "inf" ? INFINITY : NAN;
  return v.get<double>();
}

}  // namespace

TEST_CASE("config_hash") {
  const json a = {{"group", kZ}, {"radius", 3}};
  const json b = {{"radius", 3}, {"group", kZ}};
  CHECK(config_hash(a) == config_hash(b));  // object keys are dumped in sorted order
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) != config_hash(json{{"group", kZ}, {"radius", 4}}));
}

TEST_CASE("ball report and CSV layout") {
  const auto rep = run_experiment("ball", {{"group", kZ}, {"radius", 3}});
  CHECK(rep.passed());
  REQUIRE(rep.rows.size() == 4);
  CHECK(cell(rep, 3, "ball_size") == 7);
  CHECK(cell(rep, 3, "partial_square_sum") == doctest::Approx(2 * (1 + 0.25 + 1.0 / 9)));
  CHECK(rep.meta["version"] == kToolVersion);
  CHECK(rep.meta["tolerances"]["order"] == 1e-9);

  std::istringstream csv(rep.to_csv());
  std::string line;
  std::getline(csv, line);
  CHECK(line.rfind("# meta {", 0) == 0);
  std::getline(csv, line);
  CHECK(line == "# status pass");
  std::getline(csv, line);
  CHECK(line == "radius,ball_size,shell_size,partial_square_sum,tail_bound");
  std::getline(csv, line);
  CHECK(line == "0,1,1,0,");
  std::getline(csv, line);
  CHECK(line == "1,3,2,2,2");

  const auto j = json::parse(rep.to_json());
  CHECK(j["status"] == "pass");
  CHECK(j["rows"][2]["ball_size"] == 5);
}

TEST_CASE("growth") {
  SUBCASE("Z passes its analytic bound") {
    const auto rep = run_growth({{"group", kZ}, {"radius", 20}});
    CHECK(rep.passed());
    CHECK(rep.meta["fit_k"].get<double>() == doctest::Approx(2.0));
    CHECK(rep.meta["shell_bound_provenance"] == "analytic");
  }
  SUBCASE("an expected maximum below the true shell sizes is reported") {
    const json g = {{"family", "product_z_finite"}, {"finite", {{"builtin", "Z2"}}}};
    const auto rep = run_growth({{"group", g}, {"radius", 10}, {"expect_shell_max", 4}});
    REQUIRE(rep.failures.size() == 1);
    CHECK(rep.failures[0].find("shell 2 has 5") != std::string::npos);
  }
}

TEST_CASE("summable") {
  const json z2 = {{"family", "free_abelian"}, {"rank", 2}};
  const auto rep = run_summable({{"group", z2}, {"radii", {3, 10}}, {"expect", "divergent"}, {"threshold", 10}});
  CHECK(rep.passed());
  CHECK(cell(rep, 0, "partial_square_sum") == doctest::Approx(22.0 / 3).epsilon(1e-14));
  const auto low = run_summable({{"group", z2}, {"radii", {3}}, {"expect", "divergent"}, {"threshold", 100}});
  CHECK_FALSE(low.passed());
  const auto conv = run_summable({{"group", kZ}, {"radii", {100}}, {"expect", "convergent"}});
  CHECK(conv.passed());
  CHECK(cell(conv, 0, "tail_bound") == doctest::Approx(0.02));
}

TEST_CASE("dist") {
  const json cfg = {{"group", kZ},           {"state_a", {{"kind", "trace"}}}, {"state_b", {{"kind", "one"}}},
                    {"radius", 100},         {"support_radius", 3},           {"trunc", 12},
                    {"mode", "both"}};
  const auto rep = run_dist(cfg);
  CHECK(rep.passed());
  CHECK(cell(rep, 0, "d_inf_lo") == 1.0);
  CHECK(cell(rep, 0, "d2_lo") == doctest::Approx(1.80828).epsilon(1e-4));
  CHECK(cell(rep, 0, "heuristic") >= 1.0 - 1e-6);

  auto bracket = cfg;
  bracket["mode"] = "bracket";
  const auto b = run_dist(bracket);
  CHECK(b.rows[0][col(b, "heuristic")].is_null());

  const json z2 = {{"family", "free_abelian"}, {"rank", 2}};
  auto div = bracket;
  div["group"] = z2;
  div["radius"] = 5;
  const auto d = run_dist(div);
  CHECK(std::isinf(cell(d, 0, "d2_hi")));
  CHECK(d.meta["d_2"]["divergent"] == true);
}

TEST_CASE("sandwich with random pairs") {
  const json cfg = {{"group", kZ},
                    {"states", {{{"kind", "trace"}, {"name", "tau"}}, {{"kind", "one"}}}},
                    {"random_pairs", {{"count", 4}, {"seed", 3}}},
                    {"radius", 50},
                    {"support_radius", 3},
                    {"trunc", 8}};
  const auto rep = run_sandwich(cfg);
  CHECK(rep.passed());
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0][0] == "tau");
  CHECK(rep.rows[0][1] == "one#1");
  CHECK(rep.rows[1][0] == "random_density#0");
  // deterministic under a fixed seed
  CHECK(run_sandwich(cfg).to_csv() == rep.to_csv());
}

TEST_CASE("converge") {
  const json base = {{"group", kZ},  {"radius", 1000}, {"sequence", {{"kind", "character_phase"}}},
                     {"limit", {{"kind", "one"}}}, {"n_from", 1}, {"n_to", 10}, {"epsilon", 0.2},
                     {"metric", "d_inf"},          {"assert_on", "lo"}};
  const auto rep = run_converge(base);
  CHECK(rep.passed());
  REQUIRE(rep.rows.size() == 10);
  for (int n = 1; n <= 10; ++n) CHECK(cell(rep, n - 1, "d_inf_lo") == doctest::Approx(2 * std::sin(0.5 / n)).epsilon(1e-12));

  auto strict = base;
  strict["epsilon"] = 0.05;
  CHECK_FALSE(run_converge(strict).passed());

  auto ray = base;
  ray["sequence"] = {{"kind", "density_ray"},
                     {"base", {{{"element", 0}, {"re", 1}}}},
                     {"direction", {{{"element", 1}, {"re", 1}}}}};
  ray["limit"] = {{"kind", "trace"}};
  ray["metric"] = "d_2";
  ray["assert_on"] = "lo";
  CHECK(run_converge(ray).passed());
}

TEST_CASE("kappa") {
  const json cfg = {{"group", kZ},
                    {"states", {{{"kind", "density"}, {"b", {{{"element", 0}, {"re", 1}}, {{"element", 1}, {"re", 1}}}}}}},
                    {"random_states", {{"count", 3}, {"seed", 1}}},
                    {"radius", 100},
                    {"trunc", 30}};
  const auto rep = run_kappa(cfg);
  CHECK(rep.passed());
  CHECK(cell(rep, 0, "kappa_upper") == doctest::Approx(4.0));
  CHECK(cell(rep, 0, "sum_sq_coeffs") == doctest::Approx(1.5));
  CHECK(rep.rows.size() == 4 + 6);

  auto bad = cfg;
  bad["states"] = {{{"kind", "trace"}}};
  CHECK_THROWS_AS(run_kappa(bad), ConfigError);
}

TEST_CASE("config errors") {
  auto path_of = [](const std::string& exp, const json& cfg) -> std::string {
    try {
      run_experiment(exp, cfg);
    } catch (const ConfigError& e) {
      return e.path();
    }
    return "<no error>";
  };
  CHECK(path_of("ball", {{"radius", 3}}) == "group");
  CHECK(path_of("ball", {{"group", kZ}}) == "radius");
  CHECK(path_of("ball", {{"group", kZ}, {"radius", "3"}}) == "radius");
  CHECK(path_of("teleport", {{"group", kZ}}) == "experiment");
  CHECK(path_of("sandwich", {{"group", kZ}, {"radius", 3}, {"states", {{{"kind", "blue"}}}}}) == "states[0].kind");
  CHECK(path_of("ball", {{"group", kZ}, {"radius", 3}, {"tolerances", {{"norm_tol", 0}}}}) == "tolerances.norm_tol");
  CHECK(path_of("dist", {{"group", "does/not/exist.json"}, {"radius", 3}}) == "group");
  CHECK(path_of("summable", {{"group", kZ}, {"radii", json::array()}}) == "radii");
  CHECK_NOTHROW(run_experiment("ball", {{"group", kZ}, {"radius", 3}}, "."));
}

TEST_CASE("resource caps surface as ResourceError") {
  ::setenv("QMETRIC_MAX_BALL", "50", 1);
  CHECK_THROWS_AS(run_ball({{"group", kZ}, {"radius", 100}}), ResourceError);
  ::unsetenv("QMETRIC_MAX_BALL");
}
