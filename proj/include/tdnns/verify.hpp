#pragma once

// Self-checks of the discretisation against independent oracles: material
// round trips, reference trace conditions, finite differences of the
// transforms, constant-state patch tests, the dense reduced eigenproblem and
// inter-element trace continuity.

#include "tdnns/solvers.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tdnns {

struct CheckResult {
  std::string module;
  std::string name;
  bool pass = false;
  double residual = 0.0;
  double tol = 0.0;
  std::string detail;  // location of the worst case
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

void print_checks(std::ostream& os, const VerifyReport& r);

/// PZT-5H C <-> S round trip and eps_sigma - d e^T = eps (relative).
CheckResult check_material_roundtrip();

/// rotate_material keeps S and eps_sigma positive definite on random rotations.
CheckResult check_material_rotation(int samples, std::uint64_t seed);

struct BasisTraceRow {
  CellKind cell = CellKind::prism;
  int p = 1;
  int n_stress = 0, n_displacement = 0, n_potential = 0;
  bool counts_ok = false;       // (p+1)^2 per quad face, (p+1)(p+2)/2 per triangle face
  double trace_residual = 0.0;  // largest |n.N.n| off the associated face
};
std::vector<BasisTraceRow> basis_trace_rows(int p_max);
CheckResult check_basis(int p_max, double tol = 1e-12);

struct TransformOracle {
  double strain_error = 0.0;      // max relative error against central differences
  double divergence_error = 0.0;
  double gradient_error = 0.0;    // scalar potential gradient
  double duality_error = 0.0;     // volume vs divergence form
  int worst_element = -1;
  int elements = 0;
};
/// Random curved single-element meshes with geometry order 1..3.
TransformOracle transform_oracle(int elements, std::uint64_t seed);

/// Hybrid block with x = 0 clamped and grounded (electrode 0) and x = 2
/// carrying electrode 1, in the coordinates before the affine map.
Mesh tagged_block(const BlockParams& p);

struct PatchTestResult {
  double stress_error = 0.0;
  double displacement_error = 0.0;
  double potential_error = 0.0;
  double residual = 0.0;
  int dofs = 0;
};
/// Constant stress and field state on a distorted, affinely mapped hybrid block.
PatchTestResult patch_test(int p, int p_phi, bool condense, std::uint64_t seed);

struct DenseEquivalence {
  Eigen::VectorXd iterated, dense;
  double max_rel_diff = 0.0;
  double cbar_min = 0.0;
  int dofs = 0;
  bool converged = false;
};
DenseEquivalence dense_equivalence(int k, std::uint64_t seed);

/// Continuity of all three fields on a curved hybrid mesh. With `inject_fault`
/// the stress face block of one non-owning element is negated first.
struct ContinuityResult {
  ConformityReport u, sigma, phi;
  int faulted_face = -1;
};
ContinuityResult continuity_check(bool inject_fault);

/// "quick" runs the sub-second subset, "full" everything.
VerifyReport run_verify(const std::string& level, std::uint64_t seed);
VerifyReport verify_basis(int p_max);
VerifyReport verify_transform(int elements, std::uint64_t seed);

}  // namespace tdnns
