// Command-line front end. Exit codes: 0 success, 1 usage or I/O error,
// 2 invariant violation.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wpic/engine.hpp"
#include "wpic/error.hpp"
#include "wpic/hodge.hpp"
#include "wpic/io.hpp"
#include "wpic/log.hpp"
#include "wpic/maxwell.hpp"
#include "wpic/mesh.hpp"
#include "wpic/scenario.hpp"
#include "wpic/verify.hpp"

namespace fs = std::filesystem;
using namespace wpic;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kViolation = 2;

struct Args {
  std::string scenario;
  std::string mesh;
  std::string out = "out";
  bool strict = false;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  bool allow_unstable = false;
  std::optional<long> steps;
  double epsilon_r = 1.0;
  double mu_r = 1.0;
  bool corrupt_incidence = false;
};

// Mesh and materials from --scenario, or from --mesh with --epsilon-r/--mu-r.
struct Setup {
  Mesh mesh;
  HodgeOperators hodge;
  IncidenceMatrices incidence;
  double courant_safety = 0.9;
};

Setup load_setup(const Args& a) {
  std::string mesh_path = a.mesh;
  double eps_r = a.epsilon_r, mu_r = a.mu_r, safety = 0.9;
  if (!a.scenario.empty()) {
    const Scenario sc = load_scenario(a.scenario);
    if (mesh_path.empty()) mesh_path = sc.mesh_path.string();
    eps_r = sc.epsilon_r;
    mu_r = sc.mu_r;
    safety = sc.courant_safety;
  }
  if (mesh_path.empty()) throw ConfigError("need --scenario or --mesh");
  Setup s{load_mesh(mesh_path), {}, {}, safety};
  s.incidence = build_incidence(s.mesh);
  s.hodge = assemble_hodge(s.mesh, Materials::uniform(s.mesh, kEpsilon0 * eps_r, kMu0 * mu_r));
  return s;
}

int cmd_run(const Args& a) {
  if (a.scenario.empty()) throw ConfigError("run needs a scenario file");
  EngineOptions opt;
  opt.threads = a.threads;
  opt.strict = a.strict;
  opt.allow_unstable = a.allow_unstable;
  opt.steps = a.steps;
  opt.seed = a.seed;
  Simulation sim(load_scenario(a.scenario), opt);
  const RunSummary s = sim.run(a.out);
  std::cout << std::setprecision(10) << "steps " << s.steps << "  dt " << s.dt << " s  dt_c "
            << s.dt_courant << " s\n"
            << "alive " << s.alive << "  escaped " << s.escaped << "  total charge "
            << s.total_charge << " C\n"
            << "max continuity residual / bound " << s.max_continuity_ratio << "\n"
            << "max Gauss drift " << s.max_gauss_drift << " C\n"
            << "max energy balance residual (relative) " << s.max_energy_relative << "\n"
            << "wall time " << s.wall_seconds << " s, outputs in " << a.out << "\n";
  if (s.invariant_violations > 0) {
    std::cout << s.invariant_violations << " steps violated invariants; first: " << s.first_violation << "\n";
    if (a.strict) return kViolation;
  }
  return kOk;
}

int cmd_check_mesh(const Args& a) {
  const std::string path = !a.mesh.empty() ? a.mesh : load_scenario(a.scenario).mesh_path.string();
  const Mesh mesh = load_mesh(path);
  std::cout << "vertices " << mesh.num_vertices() << "  edges " << mesh.num_edges() << "  faces "
            << mesh.num_faces() << "  holes " << mesh.holes << "  V-E+F "
            << mesh.euler_characteristic() << "\n";
  const std::string problem = check_mesh(mesh);
  if (!problem.empty()) {
    std::cout << "FAIL " << problem << "\n";
    return kViolation;
  }
  std::cout << "ok\n";
  return kOk;
}

int cmd_courant(const Args& a) {
  const Setup s = load_setup(a);
  const CourantEstimate c = estimate_courant(s.mesh, s.incidence, s.hodge);
  std::cout << std::setprecision(10) << "dt_c " << c.dt_c << " s\n"
            << "suggested dt " << s.courant_safety * c.dt_c << " s (safety " << s.courant_safety
            << ")\n";
  return kOk;
}

int cmd_verify(const Args& a) {
  Setup s = load_setup(a);
  if (a.corrupt_incidence) {
    // Test hook: flip one curl entry so the exact sequence breaks.
    s.incidence.curl.coeffRef(0, s.mesh.face_edges[0][0]) *= -1;
  }
  PropertySuiteOptions opt;
  if (a.seed) opt.seed = *a.seed;
  bool all = true;
  for (const CheckResult& r : run_property_suite(s.mesh, s.incidence, s.hodge, opt)) {
    std::cout << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(42) << r.name << r.detail << "\n";
    all = all && r.passed;
  }
  return all ? kOk : kViolation;
}

int cmd_dump(const Args& a) {
  const Setup s = load_setup(a);
  const fs::path out(a.out);
  auto dump = [&](const char* name, const auto& m) {
    AtomicFile f(out / name);
    write_matrix_market(f.stream(), m);
    f.commit();
  };
  dump("curl.mtx", s.incidence.curl);
  dump("div_dual.mtx", s.incidence.div_dual);
  dump("star_eps.mtx", s.hodge.star_eps);
  dump("star_mu_inv.mtx", s.hodge.star_mu_inv);
  std::cout << "wrote curl.mtx, div_dual.mtx, star_eps.mtx, star_mu_inv.mtx to " << out.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Charge-conserving particle-in-cell on triangular meshes"};
  app.require_subcommand(1, 1);
  Args a;

  auto scenario_opts = [&](CLI::App* sub, bool positional) {
    if (positional) sub->add_option("scenario_file", a.scenario, "Scenario INI file");
    sub->add_option("--scenario", a.scenario, "Scenario INI file");
  };
  auto mesh_opts = [&](CLI::App* sub) {
    sub->add_option("--mesh", a.mesh, "Mesh file (instead of a scenario)");
    sub->add_option("--epsilon-r", a.epsilon_r, "Relative permittivity with --mesh");
    sub->add_option("--mu-r", a.mu_r, "Relative permeability with --mesh");
  };

  CLI::App* run = app.add_subcommand("run", "Run a scenario");
  scenario_opts(run, true);
  run->add_option("--out", a.out, "Output directory");
  run->add_flag("--strict", a.strict, "Exit 2 when an invariant is violated");
  run->add_option("--threads", a.threads, "Worker threads for the particle loop")->check(CLI::PositiveNumber);
  run->add_option("--seed", a.seed, "Override the scenario seed");
  run->add_flag("--allow-unstable", a.allow_unstable, "Permit dt above the Courant limit");
  run->add_option("--steps", a.steps, "Override the step count")->check(CLI::NonNegativeNumber);

  CLI::App* check = app.add_subcommand("check-mesh", "Validate a mesh file");
  check->add_option("mesh_file", a.mesh, "Mesh file");
  scenario_opts(check, false);

  CLI::App* courant = app.add_subcommand("courant", "Estimate the Courant limit");
  scenario_opts(courant, true);
  mesh_opts(courant);

  CLI::App* verify = app.add_subcommand("verify", "Run the property suite on a mesh");
  scenario_opts(verify, true);
  mesh_opts(verify);
  verify->add_option("--seed", a.seed, "Seed for random samples");
  verify->add_flag("--corrupt-incidence", a.corrupt_incidence, "Break the curl matrix (negative control)");

  CLI::App* dump = app.add_subcommand("dump-matrices", "Write operators in Matrix Market format");
  scenario_opts(dump, true);
  mesh_opts(dump);
  dump->add_option("--out", a.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*run) return cmd_run(a);
    if (*check) return cmd_check_mesh(a);
    if (*courant) return cmd_courant(a);
    if (*verify) return cmd_verify(a);
    if (*dump) return cmd_dump(a);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
