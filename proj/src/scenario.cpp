#include "wpic/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "wpic/error.hpp"

namespace wpic {

namespace pt = boost::property_tree;

namespace {

void require_known(const std::string& section, const pt::ptree& tree,
                   const std::set<std::string>& known) {
  for (const auto& [key, value] : tree) {
    if (!value.empty()) throw ParseError("[" + section + "] has a nested key '" + key + "'");
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
  }
}

template <typename T>
T get(const std::string& section, const pt::ptree& tree, const std::string& key, T fallback) {
  const auto raw = tree.get_optional<std::string>(pt::ptree::path_type(key, '/'));
  if (!raw) return fallback;
  if constexpr (std::is_same_v<T, std::string>) {
    return *raw;
  } else {
    std::istringstream in(*raw);
    T value{};
    in >> std::boolalpha >> value;
    if (!in || !(in >> std::ws).eof())
      throw ParseError("[" + section + "] " + key + ": cannot parse '" + *raw + "'");
    return value;
  }
}

template <typename T>
T require(const std::string& section, const pt::ptree& tree, const std::string& key) {
  if (!tree.get_optional<std::string>(pt::ptree::path_type(key, '/')))
    throw ConfigError("[" + section + "] is missing '" + key + "'");
  return get<T>(section, tree, key, T{});
}

// "a b c; d e f" → rows of `width` numbers.
std::vector<std::vector<double>> rows(const std::string& section, const std::string& key,
                                      const std::string& text, int width) {
  std::vector<std::vector<double>> out;
  std::istringstream all(text);
  std::string chunk;
  while (std::getline(all, chunk, ';')) {
    std::istringstream in(chunk);
    std::vector<double> row;
    double x;
    while (in >> x) row.push_back(x);
    if (!in.eof()) throw ParseError("[" + section + "] " + key + ": bad number in '" + chunk + "'");
    if (row.empty()) continue;
    if (static_cast<int>(row.size()) != width)
      throw ParseError("[" + section + "] " + key + ": expected " + std::to_string(width) +
                       " numbers per entry");
    out.push_back(std::move(row));
  }
  return out;
}

SpeciesConfig parse_species(const std::string& section, int label, const pt::ptree& t) {
  require_known(section, t,
                {"name", "charge", "mass", "count", "immobile", "positions", "x", "y", "center_x",
                 "center_y", "radius", "points", "positions_from", "velocity", "vx", "vy", "vz",
                 "thermal_speed", "velocities"});
  SpeciesConfig s;
  s.label = label;
  s.name = get<std::string>(section, t, "name", section);
  s.charge = require<double>(section, t, "charge");
  s.mass = require<double>(section, t, "mass");
  s.immobile = get<bool>(section, t, "immobile", false);
  s.positions = get<std::string>(section, t, "positions", "point");
  s.velocity = get<std::string>(section, t, "velocity", "fixed");
  if (!(s.mass > 0)) throw ConfigError("[" + section + "] mass must be positive");

  if (s.positions == "point") {
    s.point = Vec2(require<double>(section, t, "x"), require<double>(section, t, "y"));
    s.count = get<long>(section, t, "count", 1);
  } else if (s.positions == "disk") {
    s.center = Vec2(get<double>(section, t, "center_x", 0.0), get<double>(section, t, "center_y", 0.0));
    s.radius = require<double>(section, t, "radius");
    s.count = require<long>(section, t, "count");
    if (!(s.radius > 0)) throw ConfigError("[" + section + "] radius must be positive");
  } else if (s.positions == "list") {
    for (const auto& r : rows(section, "points", require<std::string>(section, t, "points"), 2))
      s.points.emplace_back(r[0], r[1]);
    s.count = static_cast<long>(s.points.size());
  } else if (s.positions == "copy") {
    s.positions_from = require<int>(section, t, "positions_from");
  } else {
    throw ConfigError("[" + section + "] positions must be point, disk, list or copy");
  }

  if (s.velocity == "fixed") {
    s.fixed_velocity = Vec3(get<double>(section, t, "vx", 0.0), get<double>(section, t, "vy", 0.0),
                            get<double>(section, t, "vz", 0.0));
  } else if (s.velocity == "maxwellian") {
    s.thermal_speed = require<double>(section, t, "thermal_speed");
    if (s.thermal_speed < 0) throw ConfigError("[" + section + "] thermal_speed must be >= 0");
  } else if (s.velocity == "list") {
    for (const auto& r : rows(section, "velocities", require<std::string>(section, t, "velocities"), 3))
      s.velocities.emplace_back(r[0], r[1], r[2]);
  } else {
    throw ConfigError("[" + section + "] velocity must be fixed, maxwellian or list");
  }
  if (s.count < 0) throw ConfigError("[" + section + "] count must be >= 0");
  return s;
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("scenario line " + std::to_string(e.line()) + ": " + e.message());
  }

  Scenario sc;
  bool have_mesh = false;
  for (const auto& [section, t] : tree) {
    if (t.empty() && !t.data().empty())
      throw ParseError("key '" + section + "' appears outside any section");
    if (section == "mesh") {
      require_known(section, t, {"path"});
      std::filesystem::path p = require<std::string>(section, t, "path");
      sc.mesh_path = p.is_absolute() ? p : base_dir / p;
      have_mesh = true;
    } else if (section == "materials") {
      require_known(section, t, {"epsilon_r", "mu_r"});
      sc.epsilon_r = get<double>(section, t, "epsilon_r", 1.0);
      sc.mu_r = get<double>(section, t, "mu_r", 1.0);
    } else if (section == "fields") {
      require_known(section, t, {"bz", "random_b"});
      sc.bz = get<double>(section, t, "bz", 0.0);
      sc.random_b = get<double>(section, t, "random_b", 0.0);
    } else if (section.rfind("species.", 0) == 0) {
      int label = 0;
      try {
        std::size_t used = 0;
        label = std::stoi(section.substr(8), &used);
        if (used != section.size() - 8) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError("species section '" + section + "' must be [species.N]");
      }
      sc.species.push_back(parse_species(section, label, t));
    } else if (section == "time") {
      require_known(section, t, {"dt", "steps", "courant_safety", "seed"});
      if (t.get_optional<std::string>("dt")) sc.dt = get<double>(section, t, "dt", 0.0);
      sc.steps = get<long>(section, t, "steps", 0);
      sc.courant_safety = get<double>(section, t, "courant_safety", 0.9);
      sc.seed = get<std::uint64_t>(section, t, "seed", 1);
    } else if (section == "output") {
      require_known(section, t, {"diagnostics_cadence", "particle_cadence", "field_cadence", "watch"});
      sc.diagnostics_cadence = get<long>(section, t, "diagnostics_cadence", 1);
      sc.particle_cadence = get<long>(section, t, "particle_cadence", 0);
      sc.field_cadence = get<long>(section, t, "field_cadence", 0);
      std::istringstream ids(get<std::string>(section, t, "watch", ""));
      int id;
      while (ids >> id) sc.watch.push_back(id);
      if (!ids.eof()) throw ParseError("[output] watch must be a list of vertex ids");
    } else if (section == "solver") {
      require_known(section, t, {"cg_rel_tol", "cg_max_iter", "half_step_backpush"});
      sc.cg_rel_tol = get<double>(section, t, "cg_rel_tol", 1e-12);
      sc.cg_max_iter = get<int>(section, t, "cg_max_iter", 2000);
      sc.half_step_backpush = get<bool>(section, t, "half_step_backpush", false);
    } else {
      throw ConfigError("unknown section [" + section + "]");
    }
  }
  if (!have_mesh) throw ConfigError("scenario has no [mesh] section");

  std::sort(sc.species.begin(), sc.species.end(),
            [](const SpeciesConfig& a, const SpeciesConfig& b) { return a.label < b.label; });
  for (std::size_t k = 1; k < sc.species.size(); ++k)
    if (sc.species[k].label == sc.species[k - 1].label)
      throw ConfigError("duplicate [species." + std::to_string(sc.species[k].label) + "]");
  for (auto& s : sc.species) {
    if (s.positions != "copy") continue;
    auto src = std::find_if(sc.species.begin(), sc.species.end(),
                            [&](const SpeciesConfig& o) { return o.label == s.positions_from; });
    if (src == sc.species.end() || src->positions == "copy")
      throw ConfigError("[species." + std::to_string(s.label) + "] positions_from must name a species with its own positions");
    s.count = src->count;
  }
  for (const auto& s : sc.species)
    if (s.velocity == "list" && static_cast<long>(s.velocities.size()) != s.count)
      throw ConfigError("[species." + std::to_string(s.label) + "] needs one velocity per particle");
  if (sc.steps < 0) throw ConfigError("[time] steps must be >= 0");
  if (sc.dt && !(*sc.dt > 0)) throw ConfigError("[time] dt must be positive");
  if (!(sc.epsilon_r > 0) || !(sc.mu_r > 0)) throw MaterialError("relative permittivity and permeability must be positive");
  if (sc.diagnostics_cadence < 1) throw ConfigError("[output] diagnostics_cadence must be >= 1");
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario '" + path.string() + "'");
  return parse_scenario(in, path.parent_path());
}

}  // namespace wpic
