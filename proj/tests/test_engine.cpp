#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wpic/engine.hpp"
#include "wpic/error.hpp"
#include "wpic/scenario.hpp"

using namespace wpic;
namespace fs = std::filesystem;

namespace {

const std::string kCyclotron = R"(
[mesh]
path = square.mesh
[fields]
bz = 2.275e-3
[species.1]
charge = -1.6e-19
mass = 9.1e-31
x = 0.25
y = 0
vy = 1e8
[species.2]
charge = 1.6e-19
mass = 1.67e-27
immobile = true
positions = copy
positions_from = 1
[time]
dt = 1e-10
steps = 200
)";

Scenario parse(const std::string& text, std::shared_ptr<const Mesh> mesh = nullptr) {
  std::istringstream in(text);
  Scenario s = parse_scenario(in, "/base");
  s.mesh = std::move(mesh);
  return s;
}

std::shared_ptr<const Mesh> square(int n = 10) {
  GridSpec g;
  g.nx = g.ny = n;
  return std::make_shared<const Mesh>(make_grid_mesh(g));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("scenario parsing") {
  const Scenario s = parse(kCyclotron);
  CHECK(s.mesh_path == fs::path("/base/square.mesh"));
  REQUIRE(s.species.size() == 2);
  CHECK(s.species[0].count == 1);
  CHECK(s.species[1].count == 1);
  CHECK(s.species[1].immobile);
  CHECK(*s.dt == 1e-10);

  CHECK_THROWS_AS(parse("[mesh]\npath = a\n[bogus]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[mesh]\npath = a\n[time]\nstep = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[time]\nsteps = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[mesh]\npath = a\n[time]\nsteps = ten\n"), ParseError);
  CHECK_THROWS_AS(parse("[mesh]\npath = a\n[species.x]\ncharge = 1\n"), ParseError);
  CHECK_THROWS_AS(parse("[mesh]\npath = a\n[species.1]\ncharge = 1\nmass = 1\npositions = copy\npositions_from = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/missing.ini"), ParseError);
}

TEST_CASE("empty scenario stays at zero") {
  Simulation sim(parse("[mesh]\npath = x\n[time]\ndt = 1e-11\nsteps = 3\n", square(4)));
  const RunSummary s = sim.run({});
  CHECK(s.steps == 3);
  CHECK(sim.fields().e.norm() == 0.0);
  CHECK(sim.fields().b.norm() == 0.0);
  CHECK(sim.fields().q.norm() == 0.0);
}

TEST_CASE("cyclotron orbit and charge bookkeeping") {
  Simulation sim(parse(kCyclotron, square()));
  std::vector<Eigen::Vector2d> path{sim.particles()[0].r};
  for (int n = 0; n < 200; ++n) {
    const DiagnosticsRecord r = sim.step();
    CHECK(sim.check(r).empty());
    CHECK(std::abs(r.total_charge) <= 1e-30);
    path.push_back(sim.particles()[0].r);
  }
  const Eigen::Vector3d c = oracle::fit_circle(path);
  CHECK(c[2] == doctest::Approx(0.25).epsilon(0.01));
  for (const auto& p : path) CHECK(std::abs((p - c.head<2>()).norm() - 0.25) <= 0.0025);
  CHECK(sim.particles()[0].v.norm() == doctest::Approx(1e8).epsilon(1e-12));
}

TEST_CASE("initialization errors") {
  // A lone electron with zero field violates Gauss' law.
  CHECK_THROWS_AS(Simulation(parse("[mesh]\npath = x\n[species.1]\ncharge = -1.6e-19\nmass = 9.1e-31\nx = 0.1\ny = 0.1\n"
                                   "[time]\ndt = 1e-11\n",
                                   square(4))),
                  ConfigError);
  Scenario fast = parse(kCyclotron, square());
  fast.dt = 5e-10;
  CHECK_THROWS_AS(Simulation{fast}, ConfigError);
  EngineOptions allow;
  allow.allow_unstable = true;
  CHECK_NOTHROW(Simulation{fast, allow});

  Scenario outside = parse(kCyclotron, square());
  outside.species[0].point = Eigen::Vector2d(2, 0);
  CHECK_THROWS_AS(Simulation{outside}, ConfigError);
}

TEST_CASE("results do not depend on the thread count") {
  const std::string ball = R"(
[mesh]
path = x
[species.1]
charge = -1.6e-19
mass = 9.1e-31
count = 300
positions = disk
radius = 0.1
velocity = maxwellian
thermal_speed = 3e6
[species.2]
charge = 1.6e-19
mass = 1.67e-27
immobile = true
positions = copy
positions_from = 1
[time]
dt = 5e-11
steps = 40
seed = 9
)";
  const fs::path dir = fs::temp_directory_path() / "wpic_threads";
  fs::remove_all(dir);
  EngineOptions one, four;
  four.threads = 4;
  Simulation a(parse(ball, square(8)), one), b(parse(ball, square(8)), four);
  a.run(dir / "a");
  b.run(dir / "b");
  CHECK(slurp(dir / "a" / "diagnostics.csv") == slurp(dir / "b" / "diagnostics.csv"));
  CHECK(slurp(dir / "a" / "particles.csv") == slurp(dir / "b" / "particles.csv"));
  CHECK(slurp(dir / "a" / "fields.csv") == slurp(dir / "b" / "fields.csv"));
  fs::remove_all(dir);
}

TEST_CASE("zero-step run writes valid outputs") {
  const fs::path dir = fs::temp_directory_path() / "wpic_zero";
  fs::remove_all(dir);
  EngineOptions opt;
  opt.steps = 0;
  Simulation sim(parse(kCyclotron, square()), opt);
  const RunSummary s = sim.run(dir);
  CHECK(s.steps == 0);
  for (const char* f : {"diagnostics.csv", "watch.csv", "particles.csv", "fields.csv", "summary.json"})
    CHECK(fs::exists(dir / f));
  for (const auto& entry : fs::directory_iterator(dir)) CHECK(entry.path().extension() != ".partial");
  const std::string diag = slurp(dir / "diagnostics.csv");
  CHECK(std::count(diag.begin(), diag.end(), '\n') == 2);
  fs::remove_all(dir);
}

TEST_CASE("particles leaving the domain become wall charge") {
  Scenario s = parse(kCyclotron, square());
  s.bz = 0;
  s.species[0].fixed_velocity = Eigen::Vector3d(5e7, 0, 0);
  Simulation sim(s);
  long escaped = 0;
  for (int n = 0; n < 60; ++n) {
    const DiagnosticsRecord r = sim.step();
    escaped += r.escaped;
    CHECK(r.continuity_residual_inf <= r.continuity_bound);
    CHECK(std::abs(r.total_charge - r.expected_charge) <= 1e-30);
  }
  CHECK(escaped == 1);
  CHECK_FALSE(sim.particles()[0].alive);
  CHECK(sim.wall_charge().sum() == doctest::Approx(-1.6e-19));
}

TEST_CASE("loosening the solver tolerance degrades Gauss' law") {
  auto drift = [&](double tol) {
    Scenario s = parse(kCyclotron, square());
    s.cg_rel_tol = tol;
    Simulation sim(s);
    double worst = 0;
    for (int n = 0; n < 200; ++n) worst = std::max(worst, sim.step().gauss_drift_inf);
    return worst;
  };
  const double tight = drift(1e-12), loose = drift(1e-2);
  CHECK(loose > 100 * tight);
}
