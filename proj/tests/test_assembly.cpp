#include "doctest.h"
#include "generators.hpp"

#include "tdnns/solvers.hpp"
#include "tdnns/verify.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

using namespace tdnns;
namespace tg = tdnns::testgen;

namespace {

Mesh unit_cell(CellKind kind, MechTag mech_face0 = MechTag::free) {
  Mesh m;
  for (const Vec3& v : reference_cell(kind).vertices) m.vertices.push_back(v);
  Element e;
  e.kind = kind;
  e.vertices.resize(m.vertices.size());
  std::iota(e.vertices.begin(), e.vertices.end(), 0);
  m.elements.push_back(e);
  for (int f = 0; f < reference_cell(kind).num_faces(); ++f)
    m.facets.push_back({0, f, f == 0 ? mech_face0 : MechTag::free, ElecTag::charge_free, -1});
  m.finalize();
  return m;
}

// Coefficients of a field in a catalog by least squares at random points.
Eigen::VectorXd fit(const ShapeCatalog& c, CellKind kind, const std::function<Eigen::VectorXd(const Vec3&)>& f) {
  std::vector<Dual3> v;
  const int nc = c.components();
  const int npts = 3 * c.size();
  Eigen::MatrixXd A(npts * nc, c.size());
  Eigen::VectorXd b(npts * nc);
  for (int k = 0; k < npts; ++k) {
    Vec3 x(tg::uniform(0.05, 0.95), tg::uniform(0.05, 0.95), tg::uniform(0.05, 0.95));
    if (kind == CellKind::prism && x.x() + x.y() > 1.0) {
      x.x() = 1.0 - x.x();
      x.y() = 1.0 - x.y();
    }
    c.evaluate(x, v);
    for (int i = 0; i < c.size(); ++i)
      for (int q = 0; q < nc; ++q) A(k * nc + q, i) = v[i * nc + q].v;
    b.segment(k * nc, nc) = f(x);
  }
  return A.colPivHouseholderQr().solve(b);
}

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double s = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return s > 0 ? (a - b).cwiseAbs().maxCoeff() / s : 0.0;
}

bool structurally_zero(const SpMat& A, int r0, int nr, int c0, int nc) {
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      if (it.row() >= r0 && it.row() < r0 + nr && it.col() >= c0 && it.col() < c0 + nc) return false;
  return true;
}

BlockSystem block_system(const Mesh& m, bool condense, int threads = 1) {
  BoundaryData bc;
  bc.electrode_potential = {{0, 0.0}, {1, 10.0}};
  bc.body_force = [](const Vec3& x) { return Vec3(1e3 * x.y(), 0.0, -2e3); };
  AssemblyOptions opt;
  opt.condense = condense;
  opt.threads = threads;
  return assemble(m, {invert_material(pzt5h())}, 2, 2, bc, opt);
}

BlockParams small_block() {
  BlockParams bp;
  bp.nx = 1;
  bp.ny = 2;
  bp.nz = 1;
  bp.affine *= 1e-2;
  return bp;
}

}  // namespace

TEST_CASE("dof counts on one hexahedron") {
  const Mesh m = unit_cell(CellKind::hexahedron);
  const DofMap dm = build_dof_map(m, 1, 1, {true});
  // order-p displacement with full tangential traces: 24 edge, 24 face, 6 interior
  CHECK(dm.u.count == 54);
  CHECK(dm.phi.count == 8);
  CHECK(dm.s.count == 24);
  CHECK(dm.s.local_only == catalog(FieldKind::tensor, CellKind::hexahedron, 1).count(EntityType::cell));
  const DofMap full = build_dof_map(m, 1, 1, {true}, false);
  CHECK(full.s.count == 24 + dm.s.local_only);
}

TEST_CASE("duality pairing of a constant stress and a linear displacement") {
  // prism: volume 1/2 minus 1/4 from the slanted face x + y = 1; cube: 1 minus 1 from x = 1
  for (auto [kind, expected] : {std::pair{CellKind::prism, 0.25}, std::pair{CellKind::hexahedron, 0.0}}) {
    const Mesh m = unit_cell(kind);
    const DualityForms df = duality_forms(m, 0, 1);
    const Eigen::VectorXd as = fit(catalog(FieldKind::tensor, kind, 1), kind,
                                   [](const Vec3&) { return Eigen::VectorXd((Vec6() << 1, 0, 0, 0, 0, 0).finished()); });
    const Eigen::VectorXd au =
        fit(catalog(FieldKind::vector, kind, 1), kind, [](const Vec3& x) { return Eigen::VectorXd(Vec3(x.x(), 0, 0)); });
    CHECK(as.dot(df.volume * au) == doctest::Approx(expected).scale(1.0));
    CHECK(as.dot(df.divergence * au) == doctest::Approx(expected).scale(1.0));
    CHECK(rel(df.volume, df.divergence) < 1e-12);
    CHECK((df.volume * Eigen::VectorXd::Zero(df.volume.cols())).norm() == 0.0);
  }
  // stress with vanishing normal-normal trace on x = 1 keeps the volume value
  const Mesh m = unit_cell(CellKind::hexahedron);
  const DualityForms df = duality_forms(m, 0, 1);
  const Eigen::VectorXd as = fit(catalog(FieldKind::tensor, CellKind::hexahedron, 1), CellKind::hexahedron,
                                 [](const Vec3&) { return Eigen::VectorXd((Vec6() << 0, 0, 0, 0, 0, 1).finished()); });
  const Eigen::VectorXd au = fit(catalog(FieldKind::vector, CellKind::hexahedron, 1), CellKind::hexahedron,
                                 [](const Vec3& x) { return Eigen::VectorXd(Vec3(x.y(), 0, 0)); });
  CHECK(as.dot(df.volume * au) == doctest::Approx(1.0));
}

TEST_CASE("element matrices: symmetry, decoupling and over-integration") {
  for (CellKind kind : {CellKind::prism, CellKind::hexahedron}) {
    const Mesh m = unit_cell(kind);
    const MaterialLawCompliance pzt = invert_material(pzt5h());
    const ElementMatrices em = element_matrices(m, 0, pzt, 1, 2, true);
    CHECK(em.C == em.C.transpose());
    CHECK(em.E == em.E.transpose());
    CHECK(em.M == em.M.transpose());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(em.C).eigenvalues().minCoeff() > 0.0);
    const ElementMatrices hi = element_matrices(m, 0, pzt, 1, 2, true, 2 * default_quadrature(1, 2, 1));
    CHECK(rel(em.C, hi.C) < 1e-12);
    CHECK(rel(em.D, hi.D) < 1e-12);
    CHECK(rel(em.E, hi.E) < 1e-12);
    MaterialLawStiffness dec = pzt5h();
    dec.e.setZero();
    const ElementMatrices ed = element_matrices(m, 0, invert_material(dec), 1, 2, true);
    CHECK(ed.D.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("duality forms agree on random curved elements") {
  CHECK(transform_oracle(12, 3).duality_error < 1e-10);
}

TEST_CASE("global block structure") {
  const Mesh m = tagged_block(small_block());
  const BlockSystem sys = block_system(m, false);
  const int nu = sys.n_free[0], ns = sys.n_free[1], np = sys.n_free[2];
  CHECK(nu + ns + np == sys.size());
  const Eigen::MatrixXd A(sys.A);
  CHECK(rel(A, A.transpose()) == 0.0);
  CHECK(structurally_zero(sys.A, 0, nu, 0, nu));
  CHECK(structurally_zero(sys.A, 0, nu, nu + ns, np));
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(-A.block(nu, nu, ns, ns)).eigenvalues().minCoeff() > 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(-A.block(nu + ns, nu + ns, np, np)).eigenvalues().minCoeff() > 0.0);
  const Eigen::MatrixXd M(sys.M);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M.topLeftCorner(nu, nu)).eigenvalues().minCoeff() > 0.0);
  CHECK(structurally_zero(sys.M, nu, ns + np, 0, sys.size()));
}

TEST_CASE("condensed and full systems give the same fields") {
  const Mesh m = tagged_block(small_block());
  const BlockSystem full = block_system(m, false);
  const BlockSystem cond = block_system(m, true);
  CHECK(cond.size() < full.size());
  const StaticResult a = solve_static(full), b = solve_static(cond);
  for (int e = 0; e < m.num_elements(); ++e) {
    const FieldValues fa = eval_field(a.solution, e, Vec3(0.2, 0.3, 0.5)), fb = eval_field(b.solution, e, Vec3(0.2, 0.3, 0.5));
    CHECK((fa.u - fb.u).norm() <= 1e-10 * fa.u.norm());
    CHECK((fa.sigma - fb.sigma).norm() <= 1e-7 * fa.sigma.norm());
    CHECK(std::abs(fa.phi - fb.phi) <= 1e-10 * 10.0);
  }
}

TEST_CASE("p = 1 prism condenses 27 interior stress functions") {
  const Mesh m = tagged_block(small_block());
  BoundaryData bc;
  bc.electrode_potential = {{0, 0.0}};
  const BlockSystem sys = assemble(m, {invert_material(pzt5h())}, 1, 1, bc);
  for (int e = 0; e < m.num_elements(); ++e)
    if (m.elements[e].kind == CellKind::prism) CHECK(sys.interior[e].size() == 27);
}

TEST_CASE("element order does not change the discrete problem") {
  const Mesh m = tagged_block(small_block());
  Mesh perm = m;
  std::vector<int> order(m.num_elements());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), tg::rng());
  std::vector<int> where(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    perm.elements[i] = m.elements[order[i]];
    perm.control_points[i] = m.control_points[order[i]];
    where[order[i]] = static_cast<int>(i);
  }
  for (auto& f : perm.facets) f.element = where[f.element];
  perm.finalize();
  const BlockSystem a = block_system(m, true), b = block_system(perm, true);
  CHECK(a.size() == b.size());
  CHECK(Eigen::MatrixXd(a.A).norm() == doctest::Approx(Eigen::MatrixXd(b.A).norm()).epsilon(1e-12));
  const StaticResult ra = solve_static(a), rb = solve_static(b);
  for (int e = 0; e < m.num_elements(); ++e) {
    const FieldValues fa = eval_field(ra.solution, e, Vec3(0.25, 0.25, 0.5));
    const FieldValues fb = eval_field(rb.solution, where[e], Vec3(0.25, 0.25, 0.5));
    CHECK((fa.x - fb.x).norm() < 1e-15);
    CHECK((fa.u - fb.u).norm() <= 1e-12 * fa.u.norm());
    CHECK(std::abs(fa.phi - fb.phi) <= 1e-12 * 10.0);
  }
}

TEST_CASE("assembly is bitwise independent of the worker count") {
  const Mesh m = tagged_block(small_block());
  const BlockSystem a = block_system(m, true, 1), b = block_system(m, true, 4);
  CHECK(a.A.nonZeros() == b.A.nonZeros());
  CHECK(Eigen::MatrixXd(a.A) == Eigen::MatrixXd(b.A));
  CHECK(Eigen::MatrixXd(a.M) == Eigen::MatrixXd(b.M));
  CHECK(a.b == b.b);
}

TEST_CASE("floating potential without coupling is detected as singular") {
  Mesh m = tagged_block(small_block());
  for (auto& f : m.facets)
    if (f.elec == ElecTag::electrode) f.elec = ElecTag::charge_free;
  m.finalize();
  MaterialLawStiffness dec = pzt5h();
  dec.e.setZero();
  BoundaryData bc;
  bc.body_force = [](const Vec3&) { return Vec3(0, 0, 1e3); };
  const BlockSystem sys = assemble(m, {invert_material(dec)}, 1, 1, bc);
  CHECK_THROWS_WITH_AS(solve_static(sys), doctest::Contains("singular"), std::runtime_error);
  const BlockSystem coupled = assemble(m, {invert_material(pzt5h())}, 1, 1, bc);
  CHECK_THROWS_WITH_AS(solve_static(coupled), doctest::Contains("singular"), std::runtime_error);
}

TEST_CASE("input errors") {
  const Mesh m = tagged_block(small_block());
  CHECK_THROWS_WITH_AS(assemble(m, {}, 1, 1, {}), doctest::Contains("undefined material"), std::invalid_argument);
}
