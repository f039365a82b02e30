#include "wpic/pusher.hpp"

#include <atomic>

#include "wpic/error.hpp"
#include "wpic/hodge.hpp"
#include "log.hpp"

namespace wpic {

PushResult push(Particle& p, double dt, const Mesh& mesh) {
  PushResult out;
  out.from = p.r;
  out.from_cell = p.cell;
  static std::atomic_flag warned = ATOMIC_FLAG_INIT;
  if (p.v.norm() > kSpeedWarningFraction * kSpeedOfLight && !warned.test_and_set())
    log::warn("particle speed {:.3e} m/s exceeds {}c; the push is non-relativistic (reported once)",
              p.v.norm(), kSpeedWarningFraction);
  p.r += dt * p.v.head<2>();
  out.to = p.r;
  if (out.to == out.from) return out;
  try {
    const LocateResult found = locate(mesh, p.cell, p.r);
    p.cell = found.face;
    out.walk_steps = found.steps;
  } catch (const WalkEscapedError& escaped) {
    p.cell = escaped.last_face();
    p.alive = false;
  }
  return out;
}

}  // namespace wpic
