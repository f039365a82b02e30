#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wpic/deposit.hpp"
#include "wpic/diagnostics.hpp"
#include "wpic/hodge.hpp"
#include "wpic/maxwell.hpp"
#include "wpic/mesh.hpp"
#include "wpic/pusher.hpp"
#include "wpic/scenario.hpp"

namespace wpic {

struct EngineOptions {
  int threads = 1;
  bool strict = false;
  bool allow_unstable = false;
  std::optional<long> steps;
  std::optional<std::uint64_t> seed;
};

/// Invariant checks applied to every step record.
struct InvariantTolerances {
  double energy_relative = 1e-9;
  double gauss_floor = 1e-12;
};

struct RunSummary {
  long steps = 0;
  double dt = 0.0;
  double dt_courant = 0.0;
  double wall_seconds = 0.0;
  long alive = 0;
  long escaped = 0;
  double total_charge = 0.0;
  double max_continuity_ratio = 0.0;  // residual / bound
  double max_gauss_drift = 0.0;       // C
  double max_energy_relative = 0.0;
  long charge_totality_violations = 0;
  long invariant_violations = 0;
  std::string first_violation;
};

/// Simulation state plus the per-step update. Construction performs the
/// initialization: mesh, operators, Courant check, particle sampling and the
/// initial Gauss condition.
class Simulation {
 public:
  Simulation(Scenario scenario, const EngineOptions& options = {});

  /// One full leap-frog step; returns its diagnostics.
  DiagnosticsRecord step();

  /// Diagnostics of the current state without advancing (the step-0 row).
  DiagnosticsRecord snapshot() const;

  /// Empty when the record satisfies all invariants, else a description.
  std::string check(const DiagnosticsRecord& r) const;

  /// Run the configured number of steps, writing outputs to `out_dir`
  /// (skipped when empty).
  RunSummary run(const std::filesystem::path& out_dir);

  const Mesh& mesh() const { return *mesh_; }
  const IncidenceMatrices& incidence() const { return incidence_; }
  const HodgeOperators& hodge() const { return hodge_; }
  const FieldState& fields() const { return fields_; }
  const std::vector<Particle>& particles() const { return particles_; }
  std::vector<Particle>& particles() { return particles_; }
  const Scenario& scenario() const { return scenario_; }
  MaxwellStepper& stepper() { return *stepper_; }
  long step_count() const { return step_; }
  double dt() const { return dt_; }
  double dt_courant() const { return dt_courant_; }
  const VectorXd& wall_charge() const { return wall_charge_; }
  InvariantTolerances& tolerances() { return tolerances_; }

  void write_particles(std::ostream& out) const;
  void write_fields(std::ostream& out) const;

 private:
  struct ParticleWork {
    Contributions current;
    Contributions wall;
    bool crossed = false;
    bool escaped = false;
  };

  void place_particles();
  void rebuild_charge(long& totality_violations);
  DiagnosticsRecord base_record() const;
  template <typename Fn>
  void for_each_particle(Fn&& fn);

  Scenario scenario_;
  EngineOptions options_;
  std::shared_ptr<const Mesh> mesh_;
  IncidenceMatrices incidence_;
  HodgeOperators hodge_;
  std::unique_ptr<MaxwellStepper> stepper_;
  FieldState fields_;
  std::vector<Particle> particles_;
  std::vector<ParticleWork> work_;
  VectorXd wall_charge_;
  VectorXd initial_gauss_;
  double dt_ = 0.0;
  double dt_courant_ = 0.0;
  double max_abs_charge_ = 0.0;
  double gauss_scale_ = 0.0;  // max over steps of max(|q|, |[★ε]e|)
  long step_ = 0;
  InvariantTolerances tolerances_;
};

}  // namespace wpic
