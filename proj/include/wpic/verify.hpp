#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wpic/hodge.hpp"
#include "wpic/mesh.hpp"

namespace wpic {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct PropertySuiteOptions {
  std::uint64_t seed = 1;
  int samples = 1000;
  int random_pushes = 2000;
};

/// Structural and numerical properties of a mesh and its operators: exact
/// sequence, SPD Hodge matrices, interpolatory duality, closed-form line
/// integrals against quadrature, constant-field reproduction, and discrete
/// continuity over random particle pushes.
std::vector<CheckResult> run_property_suite(const Mesh& mesh, const IncidenceMatrices& incidence,
                                            const HodgeOperators& hodge,
                                            const PropertySuiteOptions& options = {});

}  // namespace wpic
