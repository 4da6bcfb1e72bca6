#include "distopt/errors.hpp"
#include "distopt/experiment.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace distopt;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

bool mentions(const ConfigParseError& e, const std::string& fragment) {
  for (const auto& m : e.errors())
    if (m.find(fragment) != std::string::npos) return true;
  return false;
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "distopt_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("minimal config gets defaults and echoes in normalized form") {
  auto cfg = parse_config_text("# nothing but a comment\n\nproblem = coupled_quadratic\n");
  CHECK(cfg == ExperimentConfig{});
  std::string echo = to_config_text(cfg);
  CHECK(echo.find("steps.alpha = 0.59999999999999998\n") != std::string::npos);
  CHECK(parse_config_text(echo) == cfg);
}

TEST_CASE("round trip of a non-default config") {
  auto cfg = parse_config_text(
      "problem = resource_allocation\nproblem.N = 4\nproblem.K = 2\nschedule = gossip\n"
      "schedule.Q = 80\nsteps.gamma0 = 0.25\nsteps.alpha = 0.75\nprojection.s = 2\n"
      "projection.beta = 0.9\nnoise.std = 0.05\nmaster_seed = 99\n");
  CHECK(cfg.problem.n == 4);
  CHECK(cfg.proj_beta == std::optional<double>(0.9));
  CHECK(parse_config_text(to_config_text(cfg)) == cfg);
}

TEST_CASE("parser rejects bad input and reports every problem") {
  SUBCASE("unknown key is named") {
    try {
      parse_config_text("problem.N = 3\nfrobnicate = 1\n");
      FAIL("expected an error");
    } catch (const ConfigParseError& e) {
      CHECK(mentions(e, "frobnicate"));
    }
  }
  SUBCASE("beta equal to 2/s is outside the open interval") {
    CHECK_THROWS_AS(parse_config_text("projection.s = 1\nprojection.beta = 2\n"), ConfigParseError);
    CHECK_NOTHROW(parse_config_text("projection.s = 1\nprojection.beta = 1.999\n"));
  }
  SUBCASE("alpha = 0.5 names the step-size assumption") {
    try {
      parse_config_text("steps.alpha = 0.5\n");
      FAIL("expected an error");
    } catch (const ConfigParseError& e) {
      CHECK(mentions(e, "Assumption 4: alpha must be in (0.5, 1]"));
    }
    CHECK_NOTHROW(parse_config_text("steps.alpha = 0.5\nallow_nonstandard_steps = true\n"));
  }
  SUBCASE("several violations at once") {
    try {
      parse_config_text("problem.mu = 0\nmetric_stride = 0\nsteps.form = constant\nnoise.std = x\n");
      FAIL("expected an error");
    } catch (const ConfigParseError& e) {
      CHECK(e.errors().size() >= 4);
      CHECK(mentions(e, "problem.mu"));
      CHECK(mentions(e, "metric_stride"));
      CHECK(mentions(e, "Assumption 4"));
      CHECK(mentions(e, "noise.std"));
    }
  }
  SUBCASE("list overrides must have N entries") {
    CHECK_THROWS_AS(parse_config_text("problem.N = 3\nproblem.a = 1,2\n"), ConfigParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(parse_config("/nonexistent/dir/cfg.txt"), ConfigError);
  }
}

TEST_CASE("schedule builder") {
  ScheduleSpec ring;
  CHECK(build_schedule(ring, 5)->q_period() == 5);
  ScheduleSpec gossip;
  gossip.family = "gossip";
  CHECK(build_schedule(gossip, 4)->q_period() == 40);
  ScheduleSpec m;
  m.family = "matrix";
  m.matrix = "0.5,0.5;0.5,0.5";
  auto s = build_schedule(m, 2);
  CHECK(s->weights_at(3)(0, 1) == 0.5);
  m.matrix = "1,0";
  CHECK_THROWS_AS(build_schedule(m, 2), ConfigError);
  ScheduleSpec edges;
  edges.family = "metropolis";
  edges.graph = "edges";
  edges.edges = "0-1, 1-2";
  CHECK(build_schedule(edges, 3)->weights_at(0)(1, 2) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("run writes the CSV contract and is reproducible") {
  ExperimentConfig cfg;
  cfg.horizon = 1050;
  cfg.metric_stride = 100;
  cfg.output = scratch("run_a.csv").string();
  std::ostringstream log;
  REQUIRE(cmd_run(cfg, log) == 0);
  std::string a = read_file(cfg.output);
  CHECK(count_lines(a) == 1 + 12);  // header + ceil(1050/100) + 1
  CHECK(a.rfind(csv_header() + "\n", 0) == 0);

  REQUIRE(cmd_run(cfg, log) == 0);
  CHECK(read_file(cfg.output) == a);

  ExperimentConfig other = cfg;
  other.master_seed = 2;
  other.output = scratch("run_b.csv").string();
  REQUIRE(cmd_run(other, log) == 0);
  std::string b = read_file(other.output);
  CHECK(b != a);
  CHECK(b.substr(0, b.find('\n')) == a.substr(0, a.find('\n')));
  CHECK(count_lines(b) == count_lines(a));
}

TEST_CASE("assumption violations map to exit codes") {
  std::ostringstream log;
  ExperimentConfig cfg;
  cfg.horizon = 10;
  cfg.output = scratch("bad.csv").string();
  cfg.schedule.family = "matrix";
  cfg.schedule.matrix = "0.9,0.1,0;0.5,0.5,0;0,0,1";
  CHECK(cmd_run(cfg, log) != 0);
}

TEST_CASE("validate") {
  std::ostringstream out;
  SUBCASE("library instance with a ring schedule passes") {
    ExperimentConfig cfg;
    CHECK(cmd_validate(cfg, out) == 0);
    CHECK(out.str().find("FAIL") == std::string::npos);
  }
  SUBCASE("identity schedule fails connectivity at the first window") {
    ExperimentConfig cfg;
    cfg.schedule.family = "identity";
    CHECK(cmd_validate(cfg, out) != 0);
    CHECK(out.str().find("FAIL Assumption 3: Q-strongly connected") != std::string::npos);
    CHECK(out.str().find("starts at t = 0") != std::string::npos);
  }
  SUBCASE("concave objective fails convexity with a witness") {
    ExperimentConfig cfg;
    cfg.problem.inject_concave = true;
    CHECK(cmd_validate(cfg, out) != 0);
    CHECK(out.str().find("FAIL Assumption 1-b") != std::string::npos);
    CHECK(out.str().find("witness") != std::string::npos);
  }
  SUBCASE("non-square-summable steps are reported") {
    ExperimentConfig cfg;
    cfg.alpha = 0.4;
    cfg.allow_nonstandard_steps = true;
    CHECK(cmd_validate(cfg, out) != 0);
    CHECK(out.str().find("FAIL Assumption 4") != std::string::npos);
  }
}

TEST_CASE("oracle command writes a sidecar that run picks up") {
  ExperimentConfig cfg;
  cfg.problem.a = std::vector<double>{6, 7, 8};
  cfg.problem.u = std::vector<double>{5, 5, 5};
  cfg.problem.b = 9;
  cfg.output = scratch("toy.csv").string();
  std::ostringstream out;
  REQUIRE(cmd_oracle(cfg, out) == 0);
  auto sc = read_oracle_sidecar(cfg.output + ".oracle");
  REQUIRE(sc.has_value());
  CHECK(sc->phi_star == doctest::Approx(40.0).epsilon(1e-9));
  CHECK(out.str().find("grid_diff=") != std::string::npos);

  cfg.horizon = 2000;
  std::ostringstream run_out;
  REQUIRE(cmd_run(cfg, run_out) == 0);
  CHECK(run_out.str().find("ergodic gap = ") != std::string::npos);
}

TEST_CASE("sweep") {
  ExperimentConfig cfg;
  cfg.horizon = 400;
  cfg.metric_stride = 100;
  cfg.output = scratch("sweep.csv").string();
  std::ostringstream out;
  SUBCASE("mu sweep produces one tagged block per value") {
    REQUIRE(cmd_sweep(cfg, "mu", {"1", "10", "100"}, out) == 0);
    std::string csv = read_file(cfg.output);
    CHECK(csv.rfind("mu," + csv_header() + "\n", 0) == 0);
    CHECK(count_lines(csv) == 1 + 3 * 5);
    CHECK(csv.find("\n100,400,") != std::string::npos);
  }
  SUBCASE("empty value list is an error") {
    CHECK(cmd_sweep(cfg, "mu", {}, out) != 0);
  }
  SUBCASE("unknown axis is an error") {
    CHECK(cmd_sweep(cfg, "colour", {"1"}, out) != 0);
  }
  SUBCASE("seed sweep gives distinct trajectories") {
    REQUIRE(cmd_sweep(cfg, "seed", {"1", "2", "3", "4", "5"}, out) == 0);
    std::ifstream in(cfg.output);
    std::string line;
    std::set<std::string> finals;
    while (std::getline(in, line))
      if (line.find(",400,") != std::string::npos) finals.insert(line.substr(line.find(',') + 1));
    CHECK(finals.size() == 5);
  }
  SUBCASE("N sweep rebuilds the instance") {
    REQUIRE(cmd_sweep(cfg, "N", {"2", "4"}, out) == 0);
  }
  SUBCASE("invalid swept value is rejected") {
    CHECK(cmd_sweep(cfg, "alpha", {"0.3"}, out) != 0);
  }
}

}  // TEST_SUITE
