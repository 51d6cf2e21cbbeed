#include "doctest.h"
#include "generators.hpp"

#include "tdnns/basis.hpp"
#include "tdnns/transform.hpp"
#include "tdnns/verify.hpp"

#include <numbers>

using namespace tdnns;
namespace tg = tdnns::testgen;

namespace {

ElementMap curved_map(CellKind kind, int g) {
  return ElementMap::interpolate(kind, g, [](const Vec3& x) {
    return Vec3(x.x() + 0.1 * std::sin(x.y()) + 0.05 * x.z() * x.z(), 0.9 * x.y() + 0.08 * x.x() * x.z(),
                1.1 * x.z() + 0.07 * std::cos(x.x() + x.y()));
  });
}

Vec3 interior_point() { return Vec3(tg::uniform(0.1, 0.4), tg::uniform(0.1, 0.4), tg::uniform(0.1, 0.9)); }

}  // namespace

TEST_CASE("map jacobian and hessian match finite differences") {
  const double h = 1e-5;
  for (CellKind kind : {CellKind::prism, CellKind::hexahedron})
    for (int g = 1; g <= 3; ++g) {
      const ElementMap m = curved_map(kind, g);
      for (int t = 0; t < 5; ++t) {
        const Vec3 x = interior_point();
        const MapPoint mp = m.eval(x);
        CHECK(mp.J > 0.0);
        CHECK(mp.J == doctest::Approx(mp.F.determinant()));
        for (int d = 0; d < 3; ++d) {
          Vec3 xp = x, xm = x;
          xp[d] += h;
          xm[d] -= h;
          const MapPoint a = m.eval(xp), b = m.eval(xm);
          CHECK(((a.x - b.x) / (2 * h) - mp.F.col(d)).norm() <= 1e-6 * mp.F.norm());
          for (int i = 0; i < 3; ++i)
            CHECK(((a.F.row(i) - b.F.row(i)).transpose() / (2 * h) - mp.H[i].col(d)).norm() <= 1e-6 * (1.0 + mp.H[i].norm()));
        }
      }
    }
}

TEST_CASE("identity and scaling maps") {
  const Vec3 nh(0.3, -1.2, 0.7);
  Mat3 sh;
  sh << 1, 2, 3, 2, 4, 5, 3, 5, 6;
  for (CellKind kind : {CellKind::prism, CellKind::hexahedron}) {
    const ElementMap id = ElementMap::interpolate(kind, 1, [](const Vec3& x) { return x; });
    const PointGeometry p1 = point_geometry(id.eval(Vec3(0.2, 0.3, 0.4)));
    CHECK((push_displacement(p1, nh) - nh).norm() < 1e-15);
    CHECK((push_stress(p1, sh) - sh).norm() < 1e-14);
    const ElementMap two = ElementMap::interpolate(kind, 1, [](const Vec3& x) { return Vec3(2.0 * x); });
    const PointGeometry p2 = point_geometry(two.eval(Vec3(0.2, 0.3, 0.4)));
    CHECK(p2.mp.J == doctest::Approx(8.0));
    CHECK((push_displacement(p2, nh) - nh / 2).norm() < 1e-15);
    CHECK((push_stress(p2, sh) - sh / 16).norm() < 1e-14);
  }
}

TEST_CASE("affine maps: strain and divergence in closed form") {
  Mat3 A;
  A << 1.2, 0.3, -0.1, 0.2, 0.9, 0.15, -0.05, 0.1, 1.1;
  const ElementMap m = ElementMap::interpolate(CellKind::hexahedron, 1, [&](const Vec3& x) { return Vec3(A * x); });
  const PointGeometry pg = point_geometry(m.eval(Vec3(0.3, 0.6, 0.2)));
  const Mat3 G = A.inverse();
  for (int t = 0; t < 10; ++t) {
    const Vec3 nh = tg::vec3();
    Mat3 grad_h;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) grad_h(i, j) = tg::uniform();
    const Mat3 eh = 0.5 * (grad_h + grad_h.transpose());
    const Mat3 expected = G.transpose() * eh * G;
    CHECK((physical_strain(pg, nh, grad_h) - expected).norm() <= 1e-13 * expected.norm());
    const Mat3 sh = tg::sym3();
    const Vec3 div_h = tg::vec3();
    const double J = A.determinant();
    CHECK((physical_divergence(pg, sh, div_h) - A * div_h / (J * J)).norm() < 1e-14);
    CHECK(physical_divergence(pg, sh, Vec3::Zero()).norm() < 1e-14);
  }
}

TEST_CASE("rigid rotation: strain is the rotated reference strain") {
  const Mat3 R = tg::rotation();
  const ElementMap m = ElementMap::interpolate(CellKind::prism, 1, [&](const Vec3& x) { return Vec3(R * x); });
  const PointGeometry pg = point_geometry(m.eval(Vec3(0.2, 0.2, 0.5)));
  Mat3 grad_h;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) grad_h(i, j) = tg::uniform();
  const Mat3 eh = 0.5 * (grad_h + grad_h.transpose());
  CHECK((physical_strain(pg, tg::vec3(), grad_h) - R * eh * R.transpose()).norm() < 1e-14);
  // constant fields are strain free on affine maps only
  CHECK(physical_strain(pg, tg::vec3(), Mat3::Zero()).norm() < 1e-15);
  const PointGeometry curved = point_geometry(curved_map(CellKind::prism, 2).eval(Vec3(0.2, 0.2, 0.5)));
  CHECK(physical_strain(curved, Vec3(1, 0, 0), Mat3::Zero()).norm() > 1e-3);
}

TEST_CASE("finite-difference oracle on random curved elements") {
  const TransformOracle t = transform_oracle(24, 7);
  CHECK(t.strain_error < 1e-6);
  CHECK(t.divergence_error < 1e-6);
  CHECK(t.gradient_error < 1e-6);
  CHECK(t.duality_error < 1e-10);
}

TEST_CASE("covariant transform preserves edge circulation") {
  const QuadRule q = gauss_segment(8);
  std::vector<Dual3> v;
  for (CellKind kind : {CellKind::prism, CellKind::hexahedron}) {
    const ElementMap m = curved_map(kind, 3);
    const ShapeCatalog& c = catalog(FieldKind::vector, kind, 2);
    const ReferenceCell& rc = reference_cell(kind);
    for (int e = 0; e < rc.num_edges(); ++e) {
      const Vec3 a = rc.vertices[rc.edges[e][0]], b = rc.vertices[rc.edges[e][1]];
      for (int fn : c.functions_on({EntityType::edge, e})) {
        double ref = 0.0, phys = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) {
          const Vec3 xh = a + q.points[k].x() * (b - a);
          c.evaluate(xh, v);
          const PointGeometry pg = point_geometry(m.eval(xh));
          const Vec3 nh = vector_value(&v[3 * fn]);
          ref += q.weights[k] * nh.dot(b - a);
          phys += q.weights[k] * push_displacement(pg, nh).dot(pg.mp.F * (b - a));
        }
        CHECK(std::abs(phys - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
      }
    }
  }
}

TEST_CASE("degenerate points are rejected") {
  MapPoint mp;
  mp.F = Mat3::Zero();
  mp.J = 0.0;
  CHECK_THROWS_AS(point_geometry(mp), std::domain_error);
}
