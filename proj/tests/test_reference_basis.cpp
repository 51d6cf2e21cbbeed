#include "doctest.h"
#include "generators.hpp"

#include "tdnns/basis.hpp"
#include "tdnns/legendre.hpp"

#include <functional>
#include <numeric>

using namespace tdnns;
namespace tg = tdnns::testgen;

namespace {

Vec3 random_point(CellKind kind) {
  Vec3 x(tg::uniform(0.05, 0.95), tg::uniform(0.05, 0.95), tg::uniform(0.05, 0.95));
  if (kind == CellKind::prism && x.x() + x.y() > 0.95) {
    x.x() *= 0.5;
    x.y() *= 0.5;
  }
  return x;
}

// Values of selected functions at points, one row per point and component.
Eigen::MatrixXd sample(const ShapeCatalog& c, const std::vector<Vec3>& pts, const std::vector<int>& fns,
                       const std::function<Eigen::VectorXd(const Dual3*)>& f) {
  std::vector<Dual3> v;
  std::vector<Eigen::VectorXd> rows;
  Eigen::MatrixXd out;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    c.evaluate(pts[a], v);
    for (std::size_t i = 0; i < fns.size(); ++i) {
      const Eigen::VectorXd val = f(&v[fns[i] * c.components()]);
      if (out.size() == 0) out = Eigen::MatrixXd::Zero(pts.size() * val.size(), fns.size());
      out.block(a * val.size(), i, val.size(), 1) = val;
    }
  }
  return out;
}

double projection_residual(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& target) {
  const Eigen::MatrixXd coef = basis.colPivHouseholderQr().solve(target);
  return (basis * coef - target).norm() / target.norm();
}

}  // namespace

TEST_CASE("legendre identities") {
  for (double t : {-1.0, -0.3, 0.0, 0.4, 1.0}) CHECK(legendre(0, t) == 1.0);
  CHECK(legendre(2, 0.0) == doctest::Approx(-0.5));
  const QuadRule q = gauss_segment(4);
  double s = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double t = 2.0 * q.points[k].x() - 1.0;
    s += 2.0 * q.weights[k] * legendre(2, t) * legendre(3, t);
  }
  CHECK(std::abs(s) < 1e-15);
  for (int i = 0; i < 6; ++i) {
    const double t = 0.37, h = 1e-6;
    CHECK(legendre_derivative(i, t) ==
          doctest::Approx((legendre(i, t + h) - legendre(i, t - h)) / (2 * h)).epsilon(1e-8));
  }
}

TEST_CASE("scaled legendre on the triangle") {
  for (int trial = 0; trial < 20; ++trial) {
    const double x = tg::uniform(0, 0.5), y = tg::uniform(0, 0.5);
    const double lam[3] = {1 - x - y, x, y};
    for (int g = 0; g < 3; ++g) {
      const auto s = scaled_legendre_edge(g, 3, x, y);
      CHECK(s[0].v == 1.0);
      // edge g joins vertices (g + 1) % 3 and (g + 2) % 3
      const double a = lam[(g + 1) % 3], b = lam[(g + 2) % 3];
      CHECK(std::abs(s[1].v) == doctest::Approx(std::abs(a - b)).epsilon(1e-14));
    }
  }
  // on edge 2 (y = 0, from V0 to V1) the family reduces to Legendre in the edge parameter
  for (double t : {0.1, 0.5, 0.8}) {
    const auto s = scaled_legendre_edge(2, 4, t, 0.0);
    for (int i = 0; i <= 4; ++i) CHECK(std::abs(s[i].v) == doctest::Approx(std::abs(legendre(i, 2 * t - 1))));
  }
}

TEST_CASE("triangle polynomials span the full space") {
  for (int n = 0; n <= 4; ++n) {
    const int dim = (n + 1) * (n + 2) / 2;
    Eigen::MatrixXd V(3 * dim, dim);
    for (int r = 0; r < V.rows(); ++r) {
      const double x = tg::uniform(0, 0.5), y = tg::uniform(0, 0.5);
      const auto q = triangle_poly_q(n, x, y);
      int c = 0;
      for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j) V(r, c++) = q[i][j].v;
    }
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(V).rank() == dim);
  }
  // degree of q_ij along a line: a fit of degree i + j is exact
  const int n = 3;
  const Vec3 p0(0.1, 0.2, 0), d(0.3, -0.1, 0);
  Eigen::MatrixXd V(12, n + 1);
  std::vector<std::vector<double>> vals(12);
  for (int k = 0; k < 12; ++k) {
    const double t = k / 11.0;
    for (int m = 0; m <= n; ++m) V(k, m) = std::pow(t, m);
  }
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j) {
      Eigen::VectorXd f(12);
      for (int k = 0; k < 12; ++k) {
        const Vec3 x = p0 + (k / 11.0) * d;
        f[k] = triangle_poly_q(n, x.x(), x.y())[i][j].v;
      }
      const Eigen::MatrixXd Vd = V.leftCols(i + j + 1);
      CHECK(projection_residual(Vd, f) < 1e-10);
    }
}

TEST_CASE("stress face counts") {
  for (int p = 1; p <= 4; ++p) {
    const ShapeCatalog& pr = catalog(FieldKind::tensor, CellKind::prism, p);
    const ShapeCatalog& hx = catalog(FieldKind::tensor, CellKind::hexahedron, p);
    for (int f = 0; f < 5; ++f) {
      const int expected = f < 2 ? (p + 1) * (p + 2) / 2 : (p + 1) * (p + 1);
      CHECK(pr.functions_on({EntityType::face, f}).size() == static_cast<std::size_t>(expected));
    }
    for (int f = 0; f < 6; ++f)
      CHECK(hx.functions_on({EntityType::face, f}).size() == static_cast<std::size_t>((p + 1) * (p + 1)));
  }
  const ShapeCatalog& p1 = catalog(FieldKind::tensor, CellKind::prism, 1);
  CHECK(p1.count(EntityType::face) == 3 * 4 + 2 * 3);
  CHECK(p1.count(EntityType::cell) == 27);
  CHECK(catalog(FieldKind::tensor, CellKind::hexahedron, 1).count(EntityType::face) == 24);
}

TEST_CASE("stress normal-normal traces vanish off the associated face") {
  std::vector<Dual3> v;
  for (CellKind kind : {CellKind::prism, CellKind::hexahedron}) {
    const ReferenceCell& rc = reference_cell(kind);
    for (int p = 1; p <= 3; ++p) {
      const ShapeCatalog& c = catalog(FieldKind::tensor, kind, p);
      for (int f = 0; f < rc.num_faces(); ++f) {
        const auto& fv = rc.faces[f];
        const Vec3 n = rc.face_normals[f];
        for (int trial = 0; trial < 10; ++trial) {
          double s = tg::uniform(0, 1), t = tg::uniform(0, 1);
          if (fv.size() == 3 && s + t > 1) {
            s = 1 - s;
            t = 1 - t;
          }
          const Vec3 o = rc.vertices[fv[0]];
          const Vec3 x = o + s * (rc.vertices[fv[1]] - o) + t * (rc.vertices[fv.back()] - o);
          c.evaluate(x, v);
          for (int i = 0; i < c.size(); ++i) {
            const EntityRef e = c.info(i).entity;
            if (e.type == EntityType::face && e.index == f) continue;
            CHECK(std::abs(n.dot(tensor_value(&v[6 * i]) * n)) <= 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("own-face traces span the face polynomial space") {
  // prism quad face 4 (y = 0) and hexahedron face 2 (y = 0) share the points (x, 0, z)
  for (int p = 1; p <= 3; ++p) {
    std::vector<Vec3> pts;
    for (int k = 0; k < 3 * (p + 1) * (p + 1); ++k) pts.emplace_back(tg::uniform(0, 1), 0.0, tg::uniform(0, 1));
    auto nn = [](const Dual3* c) { return Eigen::VectorXd::Constant(1, c[1].v); };
    const ShapeCatalog& pr = catalog(FieldKind::tensor, CellKind::prism, p);
    const ShapeCatalog& hx = catalog(FieldKind::tensor, CellKind::hexahedron, p);
    const Eigen::MatrixXd A = sample(pr, pts, pr.functions_on({EntityType::face, 4}), nn);
    const Eigen::MatrixXd B = sample(hx, pts, hx.functions_on({EntityType::face, 2}), nn);
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(A).rank() == (p + 1) * (p + 1));
    for (int j = 0; j < B.cols(); ++j) CHECK(projection_residual(A, B.col(j)) < 1e-10);
    for (int j = 0; j < A.cols(); ++j) CHECK(projection_residual(B, A.col(j)) < 1e-10);
  }
}

TEST_CASE("lowest order edge functions have unit circulation on their edge") {
  const QuadRule q = gauss_segment(4);
  std::vector<Dual3> v;
  for (CellKind kind : {CellKind::prism, CellKind::hexahedron}) {
    const ShapeCatalog& c = catalog(FieldKind::vector, kind, 1);
    const ReferenceCell& rc = reference_cell(kind);
    for (int e = 0; e < rc.num_edges(); ++e) {
      const int fn = c.functions_on({EntityType::edge, e}).front();
      for (int e2 = 0; e2 < rc.num_edges(); ++e2) {
        const Vec3 a = rc.vertices[rc.edges[e2][0]], b = rc.vertices[rc.edges[e2][1]];
        double s = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) {
          c.evaluate(a + q.points[k].x() * (b - a), v);
          s += q.weights[k] * vector_value(&v[3 * fn]).dot(b - a);
        }
        CHECK(s == doctest::Approx(e == e2 ? 1.0 : 0.0));
      }
    }
  }
  CHECK(reference_cell(CellKind::hexahedron).num_edges() == 12);
}

TEST_CASE("displacement tangential traces vanish on other faces") {
  std::vector<Dual3> v;
  for (CellKind kind : {CellKind::prism, CellKind::hexahedron}) {
    const ReferenceCell& rc = reference_cell(kind);
    const ShapeCatalog& c = catalog(FieldKind::vector, kind, 2);
    for (int f = 0; f < rc.num_faces(); ++f) {
      const Vec3 n = rc.face_normals[f];
      const auto& fv = rc.faces[f];
      const Vec3 o = rc.vertices[fv[0]];
      const Vec3 x = o + 0.3 * (rc.vertices[fv[1]] - o) + 0.25 * (rc.vertices[fv.back()] - o);
      c.evaluate(x, v);
      for (int i = 0; i < c.size(); ++i) {
        const EntityRef e = c.info(i).entity;
        if (e.type != EntityType::face || e.index == f) continue;
        const Vec3 u = vector_value(&v[3 * i]);
        CHECK((u - u.dot(n) * n).norm() <= 1e-12);
      }
    }
  }
}

TEST_CASE("gradients of interior scalars are displacement fields") {
  for (CellKind kind : {CellKind::prism, CellKind::hexahedron})
    for (int p = 1; p <= 2; ++p) {
      const ShapeCatalog& cu = catalog(FieldKind::vector, kind, p);
      const ShapeCatalog& cs = catalog(FieldKind::scalar, kind, p + 1);
      std::vector<Vec3> pts;
      for (int k = 0; k < 2 * cu.size(); ++k) pts.push_back(random_point(kind));
      std::vector<int> all(cu.size());
      std::iota(all.begin(), all.end(), 0);
      const Eigen::MatrixXd U = sample(cu, pts, all, [](const Dual3* c) { return Eigen::VectorXd(vector_value(c)); });
      const Eigen::MatrixXd G = sample(cs, pts, cs.functions_on({EntityType::cell, 0}),
                                       [](const Dual3* c) { return Eigen::VectorXd(scalar_gradient(c)); });
      for (int j = 0; j < G.cols(); ++j) CHECK(projection_residual(U, G.col(j)) < 1e-10);
    }
}

TEST_CASE("potential functions") {
  std::vector<Dual3> v;
  for (CellKind kind : {CellKind::prism, CellKind::hexahedron}) {
    const ShapeCatalog& c = catalog(FieldKind::scalar, kind, 3);
    for (int t = 0; t < 20; ++t) {
      c.evaluate(random_point(kind), v);
      double s = 0.0;
      for (int i = 0; i < c.size(); ++i)
        if (c.info(i).entity.type == EntityType::vertex) s += v[i].v;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  // tensor-product Q_2 on the hexahedron: 8 vertex, 12 edge, 6 face, 1 interior
  const ShapeCatalog& h2 = catalog(FieldKind::scalar, CellKind::hexahedron, 2);
  CHECK(h2.size() == 27);
  CHECK(h2.count(EntityType::vertex) == 8);
  CHECK(h2.count(EntityType::edge) == 12);
}

TEST_CASE("evaluator derivatives match central differences") {
  std::vector<Dual3> v, vp, vm;
  const double h = 1e-6;
  for (CellKind kind : {CellKind::prism, CellKind::hexahedron})
    for (FieldKind f : {FieldKind::scalar, FieldKind::vector, FieldKind::tensor})
      for (int p = 1; p <= 3; ++p) {
        const ShapeCatalog& c = catalog(f, kind, p);
        double err = 0.0, scale = 0.0;
        for (int t = 0; t < 5; ++t) {
          const Vec3 x = random_point(kind);
          c.evaluate(x, v);
          for (int d = 0; d < 3; ++d) {
            Vec3 xp = x, xm = x;
            xp[d] += h;
            xm[d] -= h;
            c.evaluate(xp, vp);
            c.evaluate(xm, vm);
            for (std::size_t k = 0; k < v.size(); ++k) {
              err = std::max(err, std::abs((vp[k].v - vm[k].v) / (2 * h) - v[k].d[d]));
              scale = std::max(scale, std::abs(v[k].d[d]));
            }
          }
        }
        CHECK(err <= 1e-6 * scale);
      }
}
