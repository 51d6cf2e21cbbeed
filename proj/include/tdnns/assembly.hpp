#pragma once

// Element matrices and global assembly of the coupled saddle-point system
//
//   [ 0   B^T  0  ] [u  ]   [f_u  ]
//   [ B   -C   D^T] [sig] = [f_sig]
//   [ 0   D    -E ] [phi]   [f_phi]
//
// with C = int sig:S:dsig, E = int grad phi . eps_sigma . grad dphi,
// D = int (d:sig) . grad dphi and B the element-wise duality pairing
// <eps(u), dsig> = sum_T ( int_T dsig:eps(u) - int_dT dsig_nn u_n ).
// The mass matrix M = int rho u.du lives on the displacement block only.
//
// Essential conditions are eliminated: u_t on clamped faces, sig_nn on free
// faces, phi on electrodes with a prescribed potential. Nonzero essential
// values are lifted by an L2 projection of the boundary trace.

#include "tdnns/dof_map.hpp"
#include "tdnns/material.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <iosfwd>
#include <map>

namespace tdnns {

using SpMat = Eigen::SparseMatrix<double>;

struct ElementMatrices {
  Eigen::MatrixXd B;  // n_sig x n_u
  Eigen::MatrixXd C;  // n_sig x n_sig
  Eigen::MatrixXd D;  // n_phi x n_sig (empty if not electric)
  Eigen::MatrixXd E;  // n_phi x n_phi
  Eigen::MatrixXd M;  // n_u x n_u
};

/// Quadrature points per direction used by default: max(p, p_phi) + g + 2.
int default_quadrature(int p, int p_phi, int g);

/// Element matrices in local shape-function coefficients. `quad` <= 0 selects
/// the default rule. Material laws are in their local frame; the element frame
/// rotates them per quadrature point.
ElementMatrices element_matrices(const Mesh& mesh, int e, const MaterialLawCompliance& mat, int p, int p_phi,
                                 bool electric, int quad = 0);

/// The duality block computed in both element-wise forms:
///   volume:     int_T dsig:eps(u) - int_dT dsig_nn u_n
///   divergence: -int_T div(dsig).u + int_dT dsig_nt.u_t
struct DualityForms {
  Eigen::MatrixXd volume;
  Eigen::MatrixXd divergence;
};
DualityForms duality_forms(const Mesh& mesh, int e, int p, int quad = 0);

/// Boundary data. Empty functions mean zero.
struct BoundaryData {
  // essential
  std::function<Vec3(const Vec3&)> displacement;              // u_t on clamped faces
  std::function<double(const Vec3&, const Vec3&)> normal_stress;  // sig_nn(x, n) on free faces
  std::map<int, double> electrode_potential;  // electrodes not listed are left floating
  std::function<double(const Vec3&)> potential;  // overrides the constants when set
  // natural
  std::function<Vec3(const Vec3&)> body_force;
  std::function<double(const Vec3&, const Vec3&)> normal_displacement;  // u_n(x, n) on clamped faces
  std::function<Vec3(const Vec3&, const Vec3&)> traction;              // tangential part on free faces
  std::function<double(const Vec3&, const Vec3&)> surface_charge;      // D.n on charge-free faces
};

struct AssemblyOptions {
  bool condense = true;  // eliminate element-interior stress functions
  int threads = 0;       // 0: hardware concurrency
  int quad = 0;          // points per direction, 0: default
};

/// Gather of one element: local coefficients = G * x[global].
struct ElementGather {
  std::vector<int> global;
  Eigen::MatrixXd G;  // n_local x global.size(); zero rows for element-local functions
};
ElementGather element_gather(const FieldDofs& fd, int e, int n_local);

struct BlockSystem {
  const Mesh* mesh = nullptr;
  DofMap dofs;
  std::vector<MaterialLawCompliance> materials;
  BoundaryData bc;
  AssemblyOptions options;

  SpMat A;            // free x free
  SpMat M;            // free x free
  Eigen::VectorXd b;  // free rhs including lifting

  std::vector<int> free_to_global;
  std::vector<int> global_to_free;  // -1 for essential dofs
  Eigen::VectorXd lifting;          // global vector of essential values
  int n_free[3] = {0, 0, 0};        // free dofs per field (u, sig, phi), in this order

  /// Per element: interior stress = recovery * local boundary coefficients,
  /// boundary coefficients ordered (u, sig without interior, phi).
  std::vector<Eigen::MatrixXd> recovery;
  std::vector<std::vector<int>> interior;  // local interior stress indices per element

  int size() const { return static_cast<int>(free_to_global.size()); }
};

/// Throws std::invalid_argument for inconsistent input (missing material,
/// untagged faces), std::runtime_error on singular interior blocks.
BlockSystem assemble(const Mesh& mesh, const std::vector<MaterialLawCompliance>& materials, int p, int p_phi,
                     const BoundaryData& bc, const AssemblyOptions& opt = {});

/// Solution over all global dofs plus condensed interior stresses.
struct Solution {
  const BlockSystem* system = nullptr;
  Eigen::VectorXd x;                          // global vector
  std::vector<Eigen::VectorXd> sigma_interior;  // per element, local interior coefficients
};

/// Expands a free-dof vector into a global solution and recovers the interior stresses.
Solution expand_solution(const BlockSystem& sys, const Eigen::VectorXd& x_free);

/// Local coefficients of one field on element e.
Eigen::VectorXd local_coefficients(const Solution& s, FieldKind f, int e);

/// Triplet text export: "rows cols nnz" then "i j value" lines, 17 digits.
void write_triplets(std::ostream& os, const SpMat& A);

}  // namespace tdnns
