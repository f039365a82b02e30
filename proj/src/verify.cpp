#include "wpic/verify.hpp"

#include <cmath>
#include <sstream>

#include "wpic/deposit.hpp"
#include "wpic/diagnostics.hpp"
#include "wpic/error.hpp"
#include "wpic/rng.hpp"
#include "wpic/whitney.hpp"

namespace wpic {

namespace {

std::string sci(double x) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << x;
  return s.str();
}

Bary random_bary(CounterRng& rng) {
  double a = rng.uniform(), b = rng.uniform();
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  return Bary(1.0 - a - b, a, b);
}

CheckResult exact_sequence(const IncidenceMatrices& inc) {
  const IntSparse product = inc.div_dual * IntSparse(inc.curl.transpose());
  long nonzero = 0;
  for (int k = 0; k < product.outerSize(); ++k)
    for (IntSparse::InnerIterator it(product, k); it; ++it) nonzero += it.value() != 0;
  return {"exact sequence S~ C^T = 0", nonzero == 0, std::to_string(nonzero) + " nonzero entries"};
}

CheckResult interpolatory(const Mesh& mesh) {
  // The local form k integrates to 1 along its own edge and 0 along the others.
  double worst = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    for (int j = 0; j < 3; ++j) {
      Bary s = Bary::Zero(), e = Bary::Zero();
      s[kLocalEdge[j][0]] = 1.0;
      e[kLocalEdge[j][1]] = 1.0;
      const Vec2 tangent = mesh.vertex(f, kLocalEdge[j][1]) - mesh.vertex(f, kLocalEdge[j][0]);
      for (int k = 0; k < 3; ++k) {
        const double expected = k == j ? 1.0 : 0.0;
        // Midpoint rule is exact: the integrand is linear along the edge.
        const Vec2 w = whitney::eval_w1<double>(mesh.gradients[f], 0.5 * (s + e), k);
        worst = std::max(worst, std::abs(w.dot(tangent) - expected));
        worst = std::max(worst, std::abs(whitney::line_integral_w1<double>(s, e, k) - expected));
      }
    }
  }
  return {"interpolatory duality", worst <= 1e-12, "max error " + sci(worst)};
}

CheckResult closed_form(const Mesh& mesh, CounterRng& rng, int samples) {
  const int points = 1000;
  double worst = 0.0;
  for (int n = 0; n < samples; ++n) {
    const int f = static_cast<int>(rng() % mesh.num_faces());
    const Bary s = random_bary(rng), e = random_bary(rng);
    const Vec2 d = to_cartesian(mesh, f, e) - to_cartesian(mesh, f, s);
    for (int k = 0; k < 3; ++k) {
      double sum = 0.0;
      for (int m = 0; m < points; ++m) {
        const double t = (m + 0.5) / points;
        sum += whitney::eval_w1<double>(mesh.gradients[f], s + t * (e - s), k).dot(d);
      }
      worst = std::max(worst, std::abs(sum / points - whitney::line_integral_w1<double>(s, e, k)));
    }
  }
  return {"closed-form line integral vs quadrature", worst <= 1e-12, "max error " + sci(worst)};
}

CheckResult constant_field(const Mesh& mesh, CounterRng& rng, int samples) {
  const Vec2 field(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  VectorXd e(mesh.num_edges());
  for (int k = 0; k < mesh.num_edges(); ++k)
    e[k] = field.dot(mesh.vertices[mesh.edges[k][1]] - mesh.vertices[mesh.edges[k][0]]);
  double worst = 0.0;
  for (int n = 0; n < samples; ++n) {
    const int f = static_cast<int>(rng() % mesh.num_faces());
    worst = std::max(worst, (gather_e(mesh, e, f, random_bary(rng)) - field).norm() / field.norm());
  }
  return {"constant field reproduction", worst <= 1e-12, "max relative error " + sci(worst)};
}

CheckResult continuity(const Mesh& mesh, const IncidenceMatrices& inc, CounterRng& rng, int pushes) {
  const double charge = -1.6e-19, dt = 1e-10;
  double worst = 0.0;
  int crossings = 0;
  for (int n = 0; n < pushes; ++n) {
    const int f = static_cast<int>(rng() % mesh.num_faces());
    const Bary start = random_bary(rng);
    const Vec2 from = to_cartesian(mesh, f, start);
    const double reach = 2.0 * mesh.diameter(f);
    const Vec2 to = from + Vec2(rng.uniform(-reach, reach), rng.uniform(-reach, reach));
    const SegmentChain chain = split_segment(mesh, f, from, to);
    crossings += chain.pieces.size() > 1;

    VectorXd q0 = VectorXd::Zero(mesh.num_vertices()), q1 = q0;
    VectorXd i = VectorXd::Zero(mesh.num_edges());
    scatter_charge(mesh, charge, f, chain.pieces.front().start, q0);
    scatter_charge(mesh, charge, chain.final_face(), chain.final_lambda(), q1);
    scatter_current(mesh, charge, chain, dt, i);
    const double r = continuity_residual(q0, q1, i, inc.div_dual, dt).lpNorm<Eigen::Infinity>();
    worst = std::max(worst, r / (std::abs(charge) / dt));
  }
  return {"discrete continuity on random pushes", worst <= 1e-12,
          "max residual " + sci(worst) + " |Q|/dt, " + std::to_string(crossings) + "/" +
              std::to_string(pushes) + " pushes crossed faces"};
}

}  // namespace

std::vector<CheckResult> run_property_suite(const Mesh& mesh, const IncidenceMatrices& incidence,
                                            const HodgeOperators& hodge,
                                            const PropertySuiteOptions& options) {
  CounterRng rng(options.seed);
  std::vector<CheckResult> out;
  out.push_back({"mesh invariants", check_mesh(mesh).empty(), check_mesh(mesh)});
  out.push_back(exact_sequence(incidence));
  out.push_back({"[*eps] symmetric positive definite", verify_spd(hodge.star_eps), ""});
  out.push_back({"[*mu^-1] symmetric positive definite", verify_spd(hodge.star_mu_inv), ""});
  out.push_back(interpolatory(mesh));
  out.push_back(closed_form(mesh, rng, options.samples));
  out.push_back(constant_field(mesh, rng, options.samples));
  out.push_back(continuity(mesh, incidence, rng, options.random_pushes));
  return out;
}

}  // namespace wpic
