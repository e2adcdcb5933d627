#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "flatmoor/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

using namespace flatmoor;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/flatmoor_" + name + ".scn";
  std::ofstream out(path);
  out << content;
  out.close();
  return path;
}

bool mentions(const std::vector<std::string>& msgs, const std::string& needle) {
  for (const auto& m : msgs) {
    if (m.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("default scenario matches the berth-basin setup") {
  const ScenarioConfig scn = default_scenario();
  CHECK(scn.x0.x == doctest::Approx(3.5));
  CHECK(scn.x0.y == doctest::Approx(2.0));
  CHECK(scn.x0.psi == doctest::Approx(M_PI / 2));
  CHECK(scn.x0.u == 0.0);
  CHECK(scn.xf.x == doctest::Approx(2.4));
  CHECK(scn.xf.y == doctest::Approx(18.0));
  CHECK(scn.xf.psi == 0.0);
  CHECK(scn.t_hor == 15.0);
  CHECK(scn.t_mpc == 1.0);
  CHECK(scn.N == 199);
  CHECK(scn.epsilon == 1e-3);
  CHECK(scn.spline.n_ctrl == 21);
  CHECK(scn.spline.degree == 4);
  CHECK(scn.obstacles.q() == 4);
  // Full side lengths from the basin layout, stored as half-extents.
  CHECK(scn.obstacles.rectangles[0].dx == doctest::Approx(1.0));
  CHECK(scn.obstacles.rectangles[0].dy == doctest::Approx(0.25));
  CHECK(scn.obstacles.rectangles[2].dy == doctest::Approx(3.0));
  CHECK(scn.obstacles.rectangles[3].alpha == doctest::Approx(M_PI / 4));
  CHECK(scn.obstacles.rectangles[3].p == 12);
  CHECK(scn.wind_enabled);
  CHECK(scn.wind.lambda_V == doctest::Approx(0.194));
  CHECK(scn.params.m11 == doctest::Approx(25.8));
  CHECK(scn.validate().empty());
}

TEST_CASE("switching radius derives from the speed estimates") {
  ScenarioConfig scn = default_scenario();
  CHECK(scn.switching_radius() == doctest::Approx(5.7));  // 15 * 0.38
  scn.v_max = 0.38;
  CHECK(scn.switching_radius() == doctest::Approx(15.0 * 0.38 * std::sqrt(2.0)));
  scn.R_s = 3.25;
  CHECK(scn.switching_radius() == 3.25);
}

TEST_CASE("saved scenario round-trips with no errors or notices") {
  ScenarioConfig scn = default_scenario();
  scn.R_s = 4.25;
  scn.seed = 42;
  scn.wind.seed = 9001;
  scn.wind_enabled = false;
  scn.x0.psi = -1.25;
  scn.obstacles.rectangles.resize(2);
  scn.solver.tol_kkt = 1e-7;
  const std::string path = "/tmp/flatmoor_roundtrip.scn";
  save_scenario(scn, path);

  const ScenarioLoadResult res = load_scenario(path);
  REQUIRE_MESSAGE(res.ok(), (res.errors.empty() ? "" : res.errors.front()));
  CHECK(res.notices.empty());
  const ScenarioConfig& got = res.config;
  CHECK(got.x0.psi == scn.x0.psi);
  CHECK(got.xf.y == scn.xf.y);
  CHECK(got.R_s == 4.25);
  CHECK(got.seed == 42);
  CHECK(got.wind.seed == 9001);
  CHECK_FALSE(got.wind_enabled);
  CHECK(got.N == scn.N);
  CHECK(got.obstacles.q() == 2);
  CHECK(got.obstacles.rectangles[1].dx == scn.obstacles.rectangles[1].dx);
  CHECK(got.obstacles.rectangles[1].dy == scn.obstacles.rectangles[1].dy);
  CHECK(got.solver.tol_kkt == 1e-7);
  CHECK(got.params.m23 == scn.params.m23);
  CHECK(got.params.tau_r_max == scn.params.tau_r_max);
  CHECK(got.wind.sigma_beta == scn.wind.sigma_beta);
  CHECK(got.spline.tf_max == scn.spline.tf_max);
  CHECK(got.plant_step == scn.plant_step);
  CHECK(got.max_mpc_iterations == scn.max_mpc_iterations);
}

TEST_CASE("empty file falls back to the default scenario with notices") {
  const std::string path = write_temp("empty", "# nothing here\n");
  const ScenarioLoadResult res = load_scenario(path);
  REQUIRE(res.ok());
  CHECK(res.notices.size() >= 6);  // at least one per section
  CHECK(mentions(res.notices, "[vessel]"));
  CHECK(mentions(res.notices, "[scenario]"));
  CHECK(mentions(res.notices, "[obstacles]"));
  const ScenarioConfig dflt = default_scenario();
  CHECK(res.config.x0.x == dflt.x0.x);
  CHECK(res.config.obstacles.q() == 4);
  CHECK(res.config.wind_enabled == dflt.wind_enabled);
}

TEST_CASE("partially specified section keeps other defaults and notices them") {
  const std::string path = write_temp("partial",
                                      "[scenario]\n"
                                      "t_hor = 12\n");
  const ScenarioLoadResult res = load_scenario(path);
  REQUIRE(res.ok());
  CHECK(res.config.t_hor == 12.0);
  CHECK(res.config.t_mpc == 1.0);
  CHECK(mentions(res.notices, "'xf' in [scenario]"));
  CHECK(mentions(res.notices, "'x0' in [scenario]"));
  // Optional keys do not generate notices.
  CHECK_FALSE(mentions(res.notices, "switching_radius"));
}

TEST_CASE("present obstacles section replaces the default set") {
  const std::string path = write_temp("obs",
                                      "[obstacles]\n"
                                      "rect = 3 10 1.5 1.5 pi/4 12\n");
  const ScenarioLoadResult res = load_scenario(path);
  REQUIRE(res.ok());
  REQUIRE(res.config.obstacles.q() == 1);
  const RectObstacle& o = res.config.obstacles.rectangles[0];
  CHECK(o.x0 == 3.0);
  CHECK(o.y0 == 10.0);
  CHECK(o.dx == doctest::Approx(0.75));  // full length 1.5 halved
  CHECK(o.dy == doctest::Approx(0.75));
  CHECK(o.alpha == doctest::Approx(M_PI / 4));
  CHECK(o.p == 12);
}

TEST_CASE("pi expressions parse in states and angles") {
  const std::string path = write_temp("pi",
                                      "[scenario]\n"
                                      "x0 = 1 2 pi/2 0 0 0\n"
                                      "xf = 3 4 -pi 0 0 0\n");
  const ScenarioLoadResult res = load_scenario(path);
  REQUIRE(res.ok());
  CHECK(res.config.x0.psi == M_PI / 2);
  CHECK(res.config.xf.psi == -M_PI);
}

TEST_CASE("malformed input is rejected with line numbers, exhaustively") {
  const std::string path = write_temp("bad",
                                      "[nonsense]\n"            // line 1
                                      "[vessel]\n"              // line 2
                                      "m11 = twelve\n"          // line 3
                                      "warp = 9\n"              // line 4
                                      "m11 = 25.8\n"            // line 5: m11 failed on 3,
                                      "m11 = 30\n"              // line 6: duplicate of 5
                                      "loose = 1\n");           // inside [vessel]: unknown
  const ScenarioLoadResult res = load_scenario(path);
  CHECK_FALSE(res.ok());
  CHECK(mentions(res.errors, "line 1"));
  CHECK(mentions(res.errors, "unknown section [nonsense]"));
  CHECK(mentions(res.errors, "line 3"));
  CHECK(mentions(res.errors, "cannot parse number 'twelve'"));
  CHECK(mentions(res.errors, "unknown key 'warp'"));
  CHECK(mentions(res.errors, "duplicate key 'm11'"));
  CHECK(mentions(res.errors, "unknown key 'loose'"));
  CHECK(res.errors.size() >= 5);
}

TEST_CASE("key before any section is an error") {
  const std::string path = write_temp("nosec", "t_hor = 10\n");
  const ScenarioLoadResult res = load_scenario(path);
  CHECK_FALSE(res.ok());
  CHECK(mentions(res.errors, "outside any section"));
}

TEST_CASE("wrong token counts are reported") {
  const std::string path = write_temp("tok",
                                      "[scenario]\n"
                                      "x0 = 1 2 3\n"
                                      "[obstacles]\n"
                                      "rect = 1 2 3\n");
  const ScenarioLoadResult res = load_scenario(path);
  CHECK_FALSE(res.ok());
  CHECK(mentions(res.errors, "expected 6 numbers"));
  CHECK(mentions(res.errors, "x0 y0 len_x len_y alpha p"));
}

TEST_CASE("semantic violations surface as load errors") {
  const std::string path = write_temp("sem",
                                      "[scenario]\n"
                                      "t_hor = 5\n"
                                      "t_mpc = 7\n"
                                      "epsilon = 0\n"
                                      "[obstacles]\n"
                                      "rect = 1 1 -2 2 0 12\n");
  const ScenarioLoadResult res = load_scenario(path);
  CHECK_FALSE(res.ok());
  CHECK(mentions(res.errors, "t_mpc"));
  CHECK(mentions(res.errors, "epsilon"));
  CHECK(mentions(res.errors, "obstacle 1"));
}

TEST_CASE("t_mpc must be a multiple of the plant step") {
  const std::string path = write_temp("step",
                                      "[scenario]\n"
                                      "t_mpc = 1.005\n");
  const ScenarioLoadResult res = load_scenario(path);
  CHECK_FALSE(res.ok());
  CHECK(mentions(res.errors, "plant step"));
}

TEST_CASE("collocation_points below 2 is rejected") {
  const std::string path = write_temp("colloc",
                                      "[scenario]\n"
                                      "collocation_points = 1\n");
  const ScenarioLoadResult res = load_scenario(path);
  CHECK_FALSE(res.ok());
  CHECK(mentions(res.errors, "collocation_points"));
}

TEST_CASE("wind seed defaults to the scenario seed unless given") {
  const std::string a = write_temp("seed_a",
                                   "[scenario]\n"
                                   "seed = 7\n");
  const ScenarioLoadResult ra = load_scenario(a);
  REQUIRE(ra.ok());
  CHECK(ra.config.seed == 7);
  CHECK(ra.config.wind.seed == 7);

  const std::string b = write_temp("seed_b",
                                   "[scenario]\n"
                                   "seed = 7\n"
                                   "[wind]\n"
                                   "seed = 11\n");
  const ScenarioLoadResult rb = load_scenario(b);
  REQUIRE(rb.ok());
  CHECK(rb.config.wind.seed == 11);
}

TEST_CASE("missing file reports an open error") {
  const ScenarioLoadResult res = load_scenario("/tmp/flatmoor_does_not_exist.scn");
  CHECK_FALSE(res.ok());
  CHECK(mentions(res.errors, "cannot open"));
}

TEST_CASE("comments and booleans parse") {
  const std::string path = write_temp("misc",
                                      "[wind]\n"
                                      "enabled = false  ; inline comment\n"
                                      "sigma_beta = 0.1 # another\n");
  const ScenarioLoadResult res = load_scenario(path);
  REQUIRE(res.ok());
  CHECK_FALSE(res.config.wind_enabled);
  CHECK(res.config.wind.sigma_beta == 0.1);
}
