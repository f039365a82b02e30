#include "wpic/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "wpic/error.hpp"
#include "wpic/io.hpp"
#include "wpic/rng.hpp"
#include "log.hpp"

namespace wpic {

namespace {

std::uint64_t stream_seed(std::uint64_t seed, int species_index) {
  // One SplitMix64 output per species keeps the streams unrelated.
  CounterRng mix(seed + 0x632BE59BD9B4E019ULL * static_cast<std::uint64_t>(species_index + 1));
  return mix();
}

int find_face(const Mesh& mesh, const Vec2& r) {
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (contains(mesh, f, barycentric(mesh, f, r))) return f;
  return -1;
}

}  // namespace

Simulation::Simulation(Scenario scenario, const EngineOptions& options)
    : scenario_(std::move(scenario)), options_(options) {
  if (options_.steps) scenario_.steps = *options_.steps;
  if (options_.seed) scenario_.seed = *options_.seed;
  if (options_.threads < 1) throw ConfigError("thread count must be >= 1");
  if (scenario_.steps < 0) throw ConfigError("step count must be >= 0");

  mesh_ = scenario_.mesh ? scenario_.mesh
                         : std::make_shared<const Mesh>(load_mesh(scenario_.mesh_path.string()));
  const Mesh& mesh = *mesh_;
  incidence_ = build_incidence(mesh);
  hodge_ = assemble_hodge(mesh, Materials::uniform(mesh, kEpsilon0 * scenario_.epsilon_r,
                                                   kMu0 * scenario_.mu_r));

  dt_courant_ = estimate_courant(mesh, incidence_, hodge_).dt_c;
  dt_ = scenario_.dt ? *scenario_.dt : scenario_.courant_safety * dt_courant_;
  if (dt_ > dt_courant_) {
    if (!options_.allow_unstable)
      throw ConfigError("dt = " + std::to_string(dt_) + " s exceeds the Courant limit " +
                        std::to_string(dt_courant_) + " s (use --allow-unstable to run anyway)");
    log::warn("dt = {:.6e} s exceeds the Courant limit {:.6e} s", dt_, dt_courant_);
  }

  SolverConfig config;
  config.dt = dt_;
  config.cg_rel_tol = scenario_.cg_rel_tol;
  config.cg_max_iter = scenario_.cg_max_iter;
  config.courant_safety = scenario_.courant_safety;
  stepper_ = std::make_unique<MaxwellStepper>(mesh, incidence_, hodge_, config);

  fields_ = FieldState::zeros(mesh);
  for (int f = 0; f < mesh.num_faces(); ++f) fields_.b[f] = mesh.areas[f] * scenario_.bz;
  if (scenario_.random_b != 0.0) {
    CounterRng rng(stream_seed(scenario_.seed, -1));
    for (int f = 0; f < mesh.num_faces(); ++f)
      fields_.b[f] += mesh.areas[f] * scenario_.random_b * rng.uniform(-1.0, 1.0);
  }
  wall_charge_ = VectorXd::Zero(mesh.num_vertices());

  place_particles();
  for (const Particle& p : particles_) max_abs_charge_ = std::max(max_abs_charge_, std::abs(p.charge));
  long violations = 0;
  rebuild_charge(violations);

  initial_gauss_ = gauss_residual(fields_.e, fields_.q, incidence_.div_dual, hodge_.star_eps);
  const double q_scale = fields_.q.lpNorm<Eigen::Infinity>();
  const double mismatch = interior_max_abs(initial_gauss_, mesh.boundary_vertex);
  if (mismatch > 1e-12 * std::max(q_scale, max_abs_charge_))
    throw ConfigError("initial fields and charges violate Gauss' law (residual " +
                      std::to_string(mismatch) + " C); overlap opposite charges or supply consistent fields");
  gauss_scale_ = std::max({q_scale, max_abs_charge_, (hodge_.star_eps * fields_.e).lpNorm<Eigen::Infinity>()});
  for (int id : scenario_.watch)
    if (id < 1 || id > mesh.num_vertices())
      throw ConfigError("watched vertex " + std::to_string(id) + " does not exist");
}

void Simulation::place_particles() {
  const Mesh& mesh = *mesh_;
  std::vector<std::vector<Vec2>> placed(scenario_.species.size());
  for (std::size_t s = 0; s < scenario_.species.size(); ++s) {
    const SpeciesConfig& sp = scenario_.species[s];
    CounterRng rng(stream_seed(scenario_.seed, static_cast<int>(s)));
    std::vector<Vec2>& pos = placed[s];
    if (sp.positions == "point") {
      pos.assign(sp.count, sp.point);
    } else if (sp.positions == "list") {
      pos = sp.points;
    } else if (sp.positions == "disk") {
      while (static_cast<long>(pos.size()) < sp.count) {
        const Vec2 d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        if (d.squaredNorm() <= 1.0) pos.push_back(sp.center + sp.radius * d);
      }
    } else {
      for (std::size_t o = 0; o < s; ++o)
        if (scenario_.species[o].label == sp.positions_from) pos = placed[o];
      if (pos.empty() && sp.count > 0)
        throw ConfigError("positions_from must refer to an earlier species");
    }

    int cell = 0;
    for (long k = 0; k < static_cast<long>(pos.size()); ++k) {
      Particle p;
      p.charge = sp.charge;
      p.mass = sp.mass;
      p.immobile = sp.immobile;
      p.species = static_cast<int>(s);
      p.r = pos[k];
      if (!contains(mesh, cell, barycentric(mesh, cell, p.r))) cell = find_face(mesh, p.r);
      if (cell < 0)
        throw ConfigError("species '" + sp.name + "' places a particle outside the mesh");
      p.cell = cell;
      if (sp.immobile) {
        p.v.setZero();
      } else if (sp.velocity == "fixed") {
        p.v = sp.fixed_velocity;
      } else if (sp.velocity == "list") {
        p.v = sp.velocities[k];
      } else {
        const double sigma = sp.thermal_speed / std::sqrt(2.0);
        p.v = Vec3(sigma * rng.normal(), sigma * rng.normal(), 0.0);
      }
      if (scenario_.half_step_backpush && !p.immobile) {
        // Rotate back half a step so the configured velocity is v⁰.
        const Bary lambda = barycentric(mesh, p.cell, p.r);
        const Vec2 e = gather_e(mesh, fields_.e, p.cell, lambda);
        const Vec3 b(0.0, 0.0, gather_b(mesh, fields_.b, p.cell));
        const Eigen::Matrix3d n = build_n_matrix(p.charge, p.mass, -0.5 * dt_, b, b);
        accelerate(p, Vec3(e.x(), e.y(), 0.0), n, -0.5 * dt_);
      }
      particles_.push_back(p);
    }
  }
  work_.resize(particles_.size());
}

void Simulation::rebuild_charge(long& totality_violations) {
  fields_.q = wall_charge_;
  Contributions c;
  for (const Particle& p : particles_) {
    if (!p.alive) continue;
    c.clear();
    charge_contributions(*mesh_, p.charge, p.cell, barycentric(*mesh_, p.cell, p.r), c);
    double sum = 0.0;
    for (const auto& [v, value] : c) sum += value;
    if (std::abs(sum - p.charge) > charge_tolerance(p.charge)) ++totality_violations;
    accumulate(c, fields_.q);
  }
}

template <typename Fn>
void Simulation::for_each_particle(Fn&& fn) {
  const std::size_t n = particles_.size();
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(options_.threads), std::max<std::size_t>(n / 64, 1));
  if (threads <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t k = t * n / threads; k < (t + 1) * n / threads; ++k) fn(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

DiagnosticsRecord Simulation::base_record() const {
  DiagnosticsRecord r;
  r.step = step_;
  r.time = step_ * dt_;
  r.continuity_bound = 1e-12 * max_abs_charge_ / dt_;
  const VectorXd star_e = hodge_.star_eps * fields_.e;
  const VectorXd lhs = incidence_.div_dual.cast<double>() * star_e;
  const VectorXd gauss = lhs - fields_.q;
  r.gauss_residual_inf = interior_max_abs(gauss, mesh_->boundary_vertex);
  r.gauss_drift_inf = interior_max_abs(gauss - initial_gauss_, mesh_->boundary_vertex);
  r.total_charge = fields_.q.sum();
  r.expected_charge = wall_charge_.sum();
  for (const Particle& p : particles_) {
    if (!p.alive) continue;
    ++r.alive;
    r.expected_charge += p.charge;
    if (!p.immobile) r.max_speed = std::max(r.max_speed, p.v.norm());
  }
  r.watch = watch_vertices(*mesh_, lhs, fields_.q, scenario_.watch);
  return r;
}

DiagnosticsRecord Simulation::snapshot() const {
  DiagnosticsRecord r = base_record();
  const VectorXd b_next = fields_.b - stepper_->curl_increment(fields_.e);
  r.electric_energy = 0.5 * fields_.e.dot(hodge_.star_eps * fields_.e);
  r.magnetic_energy = 0.5 * fields_.b.dot(hodge_.star_mu_inv * b_next);
  r.energy_scale = std::abs(r.electric_energy + r.magnetic_energy);
  long violations = 0;
  for (const Particle& p : particles_) {
    if (!p.alive) continue;
    Contributions c;
    charge_contributions(*mesh_, p.charge, p.cell, barycentric(*mesh_, p.cell, p.r), c);
    double sum = 0.0;
    for (const auto& [v, value] : c) sum += value;
    if (std::abs(sum - p.charge) > charge_tolerance(p.charge)) ++violations;
  }
  r.charge_totality_violations = violations;
  return r;
}

DiagnosticsRecord Simulation::step() {
  const Mesh& mesh = *mesh_;
  if (fields_.e_level != static_cast<double>(step_) || fields_.b_level != step_ - 0.5)
    throw Error("staggering out of sync at step " + std::to_string(step_));

  const VectorXd q_prev = fields_.q;
  const VectorXd e_prev = fields_.e;
  const VectorXd b_prev = fields_.b;

  // (1) b^{n-1/2} -> b^{n+1/2}
  stepper_->step_b(fields_);

  // (2)-(6) gather, accelerate, push and scatter, independently per particle.
  const double dt = dt_;
  for_each_particle([&](std::size_t k) {
    Particle& p = particles_[k];
    ParticleWork& w = work_[k];
    w.current.clear();
    w.wall.clear();
    w.crossed = false;
    w.escaped = false;
    if (!p.alive || p.immobile) return;

    const Bary lambda = barycentric(mesh, p.cell, p.r);
    const Vec2 e = gather_e(mesh, fields_.e, p.cell, lambda);
    const Vec3 b_old(0.0, 0.0, gather_b(mesh, b_prev, p.cell));
    const Vec3 b_new(0.0, 0.0, gather_b(mesh, fields_.b, p.cell));
    const Eigen::Matrix3d n = build_n_matrix(p.charge, p.mass, dt, b_old, b_new);
    accelerate(p, Vec3(e.x(), e.y(), 0.0), n, dt);

    const PushResult moved = push(p, dt, mesh);
    const SegmentChain chain = split_segment(mesh, moved.from_cell, moved.from, moved.to);
    current_contributions(mesh, p.charge, chain, dt, w.current);
    w.crossed = chain.pieces.size() > 1;
    p.cell = chain.final_face();
    p.alive = !chain.hit_boundary;
    if (chain.hit_boundary) {
      w.escaped = true;
      charge_contributions(mesh, p.charge, chain.final_face(), chain.final_lambda(), w.wall);
    }
  });

  // Deterministic merge in particle order.
  fields_.i.setZero();
  long crossings = 0, escaped = 0;
  for (const ParticleWork& w : work_) {
    accumulate(w.current, fields_.i);
    accumulate(w.wall, wall_charge_);
    crossings += w.crossed;
    escaped += w.escaped;
  }

  // (7) e^n -> e^{n+1}
  const SolveStats solve = stepper_->step_e(fields_);
  ++step_;

  long totality_violations = 0;
  rebuild_charge(totality_violations);

  if (!fields_.finite()) throw SolverError("non-finite field values at step " + std::to_string(step_));

  DiagnosticsRecord r = base_record();
  r.boundary_crossings = crossings;
  r.escaped = escaped;
  r.charge_totality_violations = totality_violations;
  r.cg_iterations = solve.iterations;
  r.continuity_residual_inf =
      continuity_residual(q_prev, fields_.q, fields_.i, incidence_.div_dual, dt_).lpNorm<Eigen::Infinity>();
  const VectorXd b_next = fields_.b - stepper_->curl_increment(fields_.e);
  const EnergyBalance energy = energy_balance(e_prev, fields_.e, b_prev, fields_.b, b_next, fields_.i,
                                              hodge_.star_eps, hodge_.star_mu_inv, dt_);
  r.electric_energy = energy.electric_next;
  r.magnetic_energy = energy.magnetic_next;
  r.source_work = energy.source_work;
  r.energy_residual = energy.residual;
  r.energy_scale = energy.scale();
  gauss_scale_ = std::max({gauss_scale_, fields_.q.lpNorm<Eigen::Infinity>(),
                           (hodge_.star_eps * fields_.e).lpNorm<Eigen::Infinity>()});
  return r;
}

std::string Simulation::check(const DiagnosticsRecord& r) const {
  std::ostringstream why;
  why.precision(6);
  if (r.continuity_residual_inf > r.continuity_bound)
    why << "continuity residual " << r.continuity_residual_inf << " exceeds " << r.continuity_bound;
  else if (r.charge_totality_violations > 0)
    why << r.charge_totality_violations << " particles scattered a charge different from Q";
  else if (r.gauss_drift_inf >
           (r.step * stepper_->config().cg_rel_tol + tolerances_.gauss_floor) * gauss_scale_)
    why << "Gauss residual drifted by " << r.gauss_drift_inf << " C";
  else if (std::abs(r.energy_residual) > tolerances_.energy_relative * r.energy_scale)
    why << "energy balance residual " << r.energy_residual << " J against scale " << r.energy_scale;
  else
    return {};
  return "step " + std::to_string(r.step) + ": " + why.str();
}

void Simulation::write_particles(std::ostream& out) const {
  Contributions nodal;
  for (std::size_t k = 0; k < particles_.size(); ++k) {
    const Particle& p = particles_[k];
    if (!p.alive) continue;
    // Q is the sum of the particle's own nodal charges.
    nodal.clear();
    charge_contributions(*mesh_, p.charge, p.cell, barycentric(*mesh_, p.cell, p.r), nodal);
    double q = 0.0;
    for (const auto& [index, value] : nodal) q += value;
    out << step_ << ',' << k + 1 << ',' << p.species << ',' << q << ',' << p.r.x() << ',' << p.r.y()
        << ',' << p.v.x() << ',' << p.v.y() << ',' << p.v.z() << ',' << p.cell + 1 << '\n';
  }
}

void Simulation::write_fields(std::ostream& out) const {
  for (Eigen::Index k = 0; k < fields_.e.size(); ++k)
    out << step_ << ",e," << k + 1 << ',' << fields_.e[k] << '\n';
  for (Eigen::Index k = 0; k < fields_.b.size(); ++k)
    out << step_ << ",b," << k + 1 << ',' << fields_.b[k] << '\n';
}

RunSummary Simulation::run(const std::filesystem::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  const bool write = !out_dir.empty();
  std::unique_ptr<AtomicFile> diag, watch, parts, fields;
  if (write) {
    std::filesystem::create_directories(out_dir);
    diag = std::make_unique<AtomicFile>(out_dir / "diagnostics.csv");
    watch = std::make_unique<AtomicFile>(out_dir / "watch.csv");
    parts = std::make_unique<AtomicFile>(out_dir / "particles.csv");
    fields = std::make_unique<AtomicFile>(out_dir / "fields.csv");
    write_diagnostics_header(diag->stream());
    write_watch_header(watch->stream());
    parts->stream() << "step,id,species,Q,x,y,vx,vy,vz,cell\n";
    fields->stream() << "step,kind,index,value\n";
  }

  RunSummary summary;
  summary.dt = dt_;
  summary.dt_courant = dt_courant_;
  auto note = [&](const DiagnosticsRecord& r) {
    if (r.continuity_bound > 0)
      summary.max_continuity_ratio =
          std::max(summary.max_continuity_ratio, r.continuity_residual_inf / r.continuity_bound);
    summary.max_gauss_drift = std::max(summary.max_gauss_drift, r.gauss_drift_inf);
    if (r.energy_scale > 0)
      summary.max_energy_relative =
          std::max(summary.max_energy_relative, std::abs(r.energy_residual) / r.energy_scale);
    summary.charge_totality_violations += r.charge_totality_violations;
    const std::string why = check(r);
    if (!why.empty()) {
      if (summary.invariant_violations == 0) {
        summary.first_violation = why;
        if (options_.strict)
          log::error("invariant violated at {}", why);
        else
          log::warn("invariant violated at {}", why);
      }
      ++summary.invariant_violations;
    }
    if (write) {
      if (r.step % scenario_.diagnostics_cadence == 0 || r.step == scenario_.steps) {
        write_diagnostics_row(diag->stream(), r);
        write_watch_rows(watch->stream(), r);
      }
      const long pc = scenario_.particle_cadence;
      if ((pc > 0 && r.step % pc == 0) || r.step == 0 || r.step == scenario_.steps)
        write_particles(parts->stream());
      const long fc = scenario_.field_cadence;
      if ((fc > 0 && r.step % fc == 0) || r.step == scenario_.steps) write_fields(fields->stream());
    }
  };

  note(snapshot());
  try {
    while (step_ < scenario_.steps) {
      const DiagnosticsRecord r = step();
      note(r);
      summary.escaped += r.escaped;
      if (options_.strict && summary.invariant_violations > 0) break;
    }
  } catch (const Error&) {
    if (write) {
      AtomicFile dump(out_dir / "abort_state.csv");
      dump.stream() << "step,kind,index,value\n";
      write_fields(dump.stream());
      dump.commit();
    }
    throw;
  }

  summary.steps = step_;
  summary.total_charge = fields_.q.sum();
  summary.alive = std::count_if(particles_.begin(), particles_.end(), [](const Particle& p) { return p.alive; });
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (write) {
    diag->commit();
    watch->commit();
    parts->commit();
    fields->commit();
    nlohmann::json j;
    j["steps"] = summary.steps;
    j["dt"] = summary.dt;
    j["dt_courant"] = summary.dt_courant;
    j["wall_seconds"] = summary.wall_seconds;
    j["particles_alive"] = summary.alive;
    j["particles_escaped"] = summary.escaped;
    j["total_charge"] = summary.total_charge;
    j["max_continuity_ratio"] = summary.max_continuity_ratio;
    j["max_gauss_drift"] = summary.max_gauss_drift;
    j["max_energy_relative_residual"] = summary.max_energy_relative;
    j["charge_totality_violations"] = summary.charge_totality_violations;
    j["invariant_violations"] = summary.invariant_violations;
    j["first_violation"] = summary.first_violation;
    j["magnetic_gauss"] = true;
    write_text_atomic(out_dir / "summary.json", j.dump(2) + "\n");
  }
  return summary;
}

}  // namespace wpic
