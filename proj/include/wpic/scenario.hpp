#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wpic/mesh.hpp"

namespace wpic {

struct SpeciesConfig {
  int label = 0;  // the N in [species.N]
  std::string name;
  double charge = 0.0;  // C per particle
  double mass = 0.0;    // kg
  long count = 0;
  bool immobile = false;

  /// point | disk | list | copy (the positions of species `positions_from`)
  std::string positions = "point";
  Vec2 point = Vec2::Zero();
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  std::vector<Vec2> points;
  int positions_from = 0;

  /// fixed | maxwellian | list
  std::string velocity = "fixed";
  Vec3 fixed_velocity = Vec3::Zero();
  double thermal_speed = 0.0;
  std::vector<Vec3> velocities;
};

struct Scenario {
  std::filesystem::path mesh_path;
  /// Set by callers that build meshes in memory; takes precedence over mesh_path.
  std::shared_ptr<const Mesh> mesh;

  double epsilon_r = 1.0;
  double mu_r = 1.0;

  double bz = 0.0;        // static external field, Wb/m²
  double random_b = 0.0;  // amplitude of a random initial B_z, Wb/m²

  std::vector<SpeciesConfig> species;

  std::optional<double> dt;
  double courant_safety = 0.9;
  long steps = 0;

  long diagnostics_cadence = 1;
  long particle_cadence = 0;  // 0: first and last step only
  long field_cadence = 0;     // 0: last step only
  std::vector<int> watch;     // 1-based vertex ids

  double cg_rel_tol = 1e-12;
  int cg_max_iter = 2000;
  bool half_step_backpush = false;

  std::uint64_t seed = 1;
};

/// Parse the INI scenario format. Relative mesh paths resolve against
/// `base_dir`. Throws ParseError or ConfigError.
Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace wpic
