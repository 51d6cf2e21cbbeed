#pragma once

// Static solves of the saddle-point system, inverse iteration for the
// smallest eigenpairs of A q = lambda M q, and the dense reduction
//   q_phi = E^-1 D q_sig,  Cbar = C - D^T E^-1 D,  B^T Cbar^-1 B q_u = lambda M q_u
// used to cross-check the iteration on small problems.

#include "tdnns/assembly.hpp"

#include <cstdint>
#include <memory>

namespace tdnns {

/// Sparse LU of a symmetric indefinite matrix after symmetric Ruiz
/// equilibration, with iterative refinement in solve().
class SaddlePointSolver {
 public:
  /// Throws std::runtime_error("saddle-point system singular") on breakdown.
  explicit SaddlePointSolver(const SpMat& A);
  ~SaddlePointSolver();
  SaddlePointSolver(const SaddlePointSolver&) = delete;
  SaddlePointSolver& operator=(const SaddlePointSolver&) = delete;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  /// Relative residual of the last solve.
  double last_residual() const { return residual_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  const SpMat* A_;
  mutable double residual_ = 0.0;
};

struct StaticResult {
  Solution solution;
  double residual = 0.0;  // ||A x - b|| / ||b|| on free dofs
};

/// Throws std::runtime_error if the system is singular or the residual exceeds tol.
StaticResult solve_static(const BlockSystem& sys, double tol = 1e-10);

struct EigenPair {
  double lambda = 0.0;      // rad^2/s^2
  double frequency = 0.0;   // Hz
  double residual = 0.0;    // ||A q - lambda M q|| / ||A q||
  int iterations = 0;
  bool converged = false;
  Eigen::VectorXd q;        // over the free dofs of the pencil
  std::vector<double> history;  // Rayleigh quotient per iteration
};

struct EigenOptions {
  int k = 1;
  double tol = 1e-10;           // relative eigenvalue change
  double residual_tol = 1e-8;
  int max_it = 2000;
  std::uint64_t seed = 1;
};

struct EigenResult {
  std::vector<EigenPair> pairs;  // ascending
  bool all_converged = false;
};

double frequency_from_lambda(double lambda);

/// Inverse iteration for the eigenvalue of smallest magnitude. `solver`
/// factorizes A; `deflate` holds M-orthonormal converged vectors.
/// Throws std::invalid_argument("start vector has no mass content").
EigenPair inverse_iteration(const SpMat& A, const SpMat& M, const SaddlePointSolver& solver, Eigen::VectorXd q0,
                            double tol, double residual_tol, int max_it,
                            const std::vector<Eigen::VectorXd>& deflate = {});

/// k smallest eigenpairs by block inverse iteration (max(2k, k+4) vectors) with
/// Rayleigh-Ritz on the iterated block; one factorization of A. A pair stops
/// updating once it meets both tolerances.
EigenResult eigen_smallest_k(const SpMat& A, const SpMat& M, const EigenOptions& opt);
EigenResult eigen_smallest_k(const BlockSystem& sys, const EigenOptions& opt);

struct DenseReduction {
  Eigen::VectorXd eigenvalues;  // ascending
  double cbar_min_eigenvalue = 0.0;
  double cbar_max_eigenvalue = 0.0;
};

/// Requires an uncondensed system with at most `limit` free dofs.
/// Throws std::runtime_error if Cbar is not positive definite.
DenseReduction dense_reduction_check(const BlockSystem& sys, int limit = 2000);

/// Fields at a reference point of element e. The strain follows from the
/// constitutive law, eps = S sig - d^T grad phi; E = -grad phi.
struct FieldValues {
  Vec3 x = Vec3::Zero();
  Vec3 u = Vec3::Zero();
  double phi = 0.0;
  Mat3 sigma = Mat3::Zero();
  Mat3 strain = Mat3::Zero();
  Vec3 E = Vec3::Zero();
};
FieldValues eval_field(const Solution& s, int e, const Vec3& xh);

/// Displacement at a physical point (located by search). Throws std::invalid_argument if outside.
Vec3 displacement_at(const Solution& s, const Vec3& x);

}  // namespace tdnns
