#include "doctest.h"
#include "generators.hpp"

#include "tdnns/solvers.hpp"
#include "tdnns/verify.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace tdnns;
namespace tg = tdnns::testgen;

namespace {

SpMat sparse(const Eigen::MatrixXd& d) { return d.sparseView(); }

BlockParams tiny_block() {
  BlockParams bp;
  bp.nx = 1;
  bp.ny = 1;
  bp.nz = 1;
  bp.affine *= 1e-2;
  return bp;
}

BlockSystem tiny_system(bool condense, double v1 = 0.0) {
  static const Mesh m = tagged_block(tiny_block());
  BoundaryData bc;
  bc.electrode_potential = {{0, 0.0}, {1, v1}};
  AssemblyOptions opt;
  opt.condense = condense;
  return assemble(m, {invert_material(pzt5h())}, 1, 2, bc, opt);
}

}  // namespace

TEST_CASE("frequency conversion") {
  CHECK(frequency_from_lambda(0.0) == 0.0);
  CHECK(frequency_from_lambda(4.0 * std::numbers::pi * std::numbers::pi) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(frequency_from_lambda(1e10) == doctest::Approx(1e5 / (2.0 * std::numbers::pi)).epsilon(1e-15));
}

TEST_CASE("inverse iteration on a diagonal pencil") {
  const SpMat A = sparse(Eigen::Vector2d(2, 5).asDiagonal().toDenseMatrix());
  const SpMat M = sparse(Eigen::Matrix2d::Identity());
  const SaddlePointSolver s(A);
  const EigenPair ep = inverse_iteration(A, M, s, Eigen::Vector2d(1, 1), 1e-12, 1e-8, 200);
  CHECK(ep.converged);
  CHECK(ep.lambda == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(std::abs(ep.q[1] / ep.q[0]) < 1e-4);
  CHECK(ep.frequency == doctest::Approx(frequency_from_lambda(2.0)));
}

TEST_CASE("inverse iteration on a coupled pencil") {
  Eigen::Matrix2d a;
  a << 3, 1, 1, 3;
  const SpMat A = sparse(a), M = sparse(Eigen::Vector2d(1, 2).asDiagonal().toDenseMatrix());
  const SaddlePointSolver s(A);
  const EigenPair ep = inverse_iteration(A, M, s, Eigen::Vector2d(1, 1), 1e-13, 1e-9, 200);
  CHECK(ep.converged);
  // 2 l^2 - 9 l + 8 = 0
  CHECK(ep.lambda == doctest::Approx((9.0 - std::sqrt(17.0)) / 4.0).epsilon(1e-10));
  CHECK(ep.residual <= 1e-9);
}

TEST_CASE("start vector without mass content is rejected") {
  const SpMat A = sparse(Eigen::Matrix2d::Identity());
  const SpMat M = sparse(Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix());
  const SaddlePointSolver s(A);
  CHECK_THROWS_WITH_AS(inverse_iteration(A, M, s, Eigen::Vector2d(0, 1), 1e-10, 1e-8, 10),
                       doctest::Contains("no mass content"), std::invalid_argument);
}

TEST_CASE("iteration limit flags a non-converged pair") {
  const SpMat A = sparse(Eigen::Vector3d(1.0, 1.0001, 7.0).asDiagonal().toDenseMatrix());
  const SpMat M = sparse(Eigen::Matrix3d::Identity());
  const SaddlePointSolver s(A);
  const EigenPair ep = inverse_iteration(A, M, s, Eigen::Vector3d(1, 1, 1), 1e-14, 1e-12, 3);
  CHECK_FALSE(ep.converged);
  CHECK(ep.iterations == 3);
}

TEST_CASE("smallest eigenpairs of random SPD pencils") {
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6 + trial;
    Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(n, n, [] { return tg::uniform(-1, 1); });
    const Eigen::MatrixXd a = X * X.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd md = Eigen::VectorXd::NullaryExpr(n, [] { return tg::uniform(0.5, 2.0); });
    const Eigen::MatrixXd m = md.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ref(a, m);
    EigenOptions opt;
    opt.k = 3;
    opt.seed = trial + 1;
    const EigenResult r = eigen_smallest_k(sparse(a), sparse(m), opt);
    REQUIRE(r.all_converged);
    REQUIRE(r.pairs.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(r.pairs[i].lambda == doctest::Approx(ref.eigenvalues()[i]).epsilon(1e-8));
      CHECK(r.pairs[i].residual <= opt.residual_tol);
      for (int j = 0; j < 3; ++j)
        CHECK(r.pairs[i].q.dot(m * r.pairs[j].q) == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("zero load gives the zero solution") {
  const BlockSystem sys = tiny_system(true);
  const StaticResult r = solve_static(sys);
  CHECK(r.solution.x.norm() == 0.0);
  const FieldValues f = eval_field(r.solution, 0, Vec3(0.3, 0.3, 0.3));
  CHECK(f.u.norm() == 0.0);
  CHECK(f.phi == 0.0);
  CHECK(f.sigma.norm() == 0.0);
  CHECK(f.E.norm() == 0.0);
}

TEST_CASE("static solve matches a dense solve") {
  const BlockSystem sys = tiny_system(false, 25.0);
  const StaticResult r = solve_static(sys);
  const Eigen::VectorXd xd = Eigen::MatrixXd(sys.A).partialPivLu().solve(sys.b);
  Eigen::VectorXd xs(sys.size());
  for (int i = 0; i < sys.size(); ++i) xs[i] = r.solution.x[sys.free_to_global[i]];
  CHECK((xs - xd).norm() <= 1e-10 * xd.norm());
  CHECK(r.residual <= 1e-10);
}

TEST_CASE("eigenpairs match the dense reduction") {
  const BlockSystem sys = tiny_system(false);
  const DenseReduction dr = dense_reduction_check(sys);
  CHECK(dr.cbar_min_eigenvalue > 0.0);
  EigenOptions opt;
  opt.k = 4;
  const EigenResult r = eigen_smallest_k(sys, opt);
  REQUIRE(r.all_converged);
  for (int i = 0; i < opt.k; ++i) CHECK(r.pairs[i].lambda == doctest::Approx(dr.eigenvalues[i]).epsilon(1e-8));
  for (int i = 1; i < opt.k; ++i) CHECK(r.pairs[i].lambda >= r.pairs[i - 1].lambda);
  // the condensed pencil has the same spectrum
  const EigenResult rc = eigen_smallest_k(tiny_system(true), opt);
  for (int i = 0; i < opt.k; ++i) CHECK(rc.pairs[i].lambda == doctest::Approx(r.pairs[i].lambda).epsilon(1e-8));
}

TEST_CASE("eigenvectors are mass-orthonormal on the displacement block") {
  const BlockSystem sys = tiny_system(true);
  EigenOptions opt;
  opt.k = 4;
  const EigenResult r = eigen_smallest_k(sys, opt);
  for (int i = 0; i < opt.k; ++i)
    for (int j = 0; j < opt.k; ++j)
      CHECK(r.pairs[i].q.dot(sys.M * r.pairs[j].q) == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-8));
}

TEST_CASE("single pair agrees with plain inverse iteration") {
  const BlockSystem sys = tiny_system(true);
  EigenOptions opt;
  opt.k = 1;
  const EigenResult r = eigen_smallest_k(sys, opt);
  const SaddlePointSolver s(sys.A);
  Eigen::VectorXd q0 = Eigen::VectorXd::NullaryExpr(sys.size(), [] { return tg::uniform(-1, 1); });
  const EigenPair ep = inverse_iteration(sys.A, sys.M, s, q0, opt.tol, opt.residual_tol, opt.max_it);
  REQUIRE(ep.converged);
  CHECK(ep.lambda == doctest::Approx(r.pairs[0].lambda).epsilon(1e-9));
  // Rayleigh quotient is non-increasing after the first iterate
  for (std::size_t i = 2; i < ep.history.size(); ++i) CHECK(ep.history[i] <= ep.history[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("decoupled material leaves the reduced compliance unchanged") {
  static const Mesh m = tagged_block(tiny_block());
  MaterialLawStiffness iso = pzt5h();
  iso.e.setZero();
  BoundaryData bc;
  bc.electrode_potential = {{0, 0.0}};
  AssemblyOptions opt;
  opt.condense = false;
  const BlockSystem sys = assemble(m, {invert_material(iso)}, 1, 2, bc, opt);
  const BlockSystem coupled = assemble(m, {invert_material(pzt5h())}, 1, 2, bc, opt);
  const DenseReduction a = dense_reduction_check(sys), b = dense_reduction_check(coupled);
  // coupling stiffens: the smallest eigenvalue grows
  CHECK(b.eigenvalues[0] >= a.eigenvalues[0]);
  CHECK(a.cbar_min_eigenvalue > 0.0);
}

TEST_CASE("normal-normal stress is continuous across a hexahedron-prism face") {
  const BlockSystem sys = tiny_system(true, 40.0);
  const StaticResult r = solve_static(sys);
  const Mesh& m = *sys.mesh;
  REQUIRE(m.elements[0].kind == CellKind::hexahedron);
  double worst = 0.0, full_jump = 0.0;
  for (int t = 0; t < 8; ++t) {
    const double y = tg::uniform(0.1, 0.9), z = tg::uniform(0.1, 0.9), h = 1e-6;
    const Vec3 x = eval_field(r.solution, 0, Vec3(1.0, y, z)).x;
    const Vec3 ty = eval_field(r.solution, 0, Vec3(1.0, y + h, z)).x - x;
    const Vec3 tz = eval_field(r.solution, 0, Vec3(1.0, y, z + h)).x - x;
    const Vec3 n = ty.cross(tz).normalized();
    const auto hits = m.locate_all(x);
    REQUIRE(hits.size() == 2);
    const FieldValues a = eval_field(r.solution, hits[0].first, hits[0].second);
    const FieldValues b = eval_field(r.solution, hits[1].first, hits[1].second);
    const double scale = std::max(a.sigma.norm(), b.sigma.norm());
    worst = std::max(worst, std::abs(n.dot(a.sigma * n) - n.dot(b.sigma * n)) / scale);
    full_jump = std::max(full_jump, (a.sigma - b.sigma).norm() / scale);
  }
  CHECK(worst < 1e-9);
  // tangential components are not continuous in general
  CHECK(full_jump > 1e-6);
  CHECK(continuity_check(false).sigma.max_residual < 1e-9);
}

TEST_CASE("point location") {
  const BlockSystem sys = tiny_system(true, 10.0);
  const StaticResult r = solve_static(sys);
  CHECK_THROWS_AS(displacement_at(r.solution, Vec3(1.0, 1.0, 1.0)), std::invalid_argument);
  const FieldValues f = eval_field(r.solution, 0, Vec3(0.2, 0.2, 0.5));
  CHECK((displacement_at(r.solution, f.x) - f.u).norm() <= 1e-10 * f.u.norm() + 1e-300);
}
