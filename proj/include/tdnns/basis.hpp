#pragma once

// Hierarchical shape-function catalogs on the reference prism and hexahedron.
//
//   stress        symmetric tensors whose normal-normal trace is nonzero only on
//                 the associated face; interior functions have none
//   displacement  tangential-continuous vectors of order p (edge, face, cell)
//   potential     continuous scalars of order p (vertex, edge, face, cell)
//
// Each function is evaluated as Dual3 components (value and reference gradient):
// 1 component for scalars, 3 for vectors, 6 for tensors in Voigt slot order
// (11, 22, 33, 23, 13, 12), undoubled.

#include "tdnns/jet.hpp"
#include "tdnns/reference_cell.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace tdnns {

enum class FieldKind { scalar, vector, tensor };

int field_components(FieldKind f);
std::string to_string(FieldKind f);
std::string to_string(CellKind c);

struct ShapeInfo {
  EntityRef entity;
  int family = 0;                 // construction family within the entity
  std::array<int, 3> idx{0, 0, 0};  // polynomial indices as enumerated
};

class ShapeCatalog {
 public:
  using Evaluator = std::function<void(const Vec3&, std::vector<Dual3>&)>;

  ShapeCatalog(CellKind cell, FieldKind field, int order, Evaluator eval);

  CellKind cell() const { return cell_; }
  FieldKind field() const { return field_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(info_.size()); }
  int components() const { return field_components(field_); }
  const ShapeInfo& info(int i) const { return info_[i]; }
  const std::vector<ShapeInfo>& infos() const { return info_; }

  /// Local function indices associated with an entity, in enumeration order.
  const std::vector<int>& functions_on(EntityRef e) const;
  int count(EntityType t) const;

  /// All functions at one reference point: size() * components() entries, function-major.
  void evaluate(const Vec3& xh, std::vector<Dual3>& out) const { eval_(xh, out); }

 private:
  CellKind cell_;
  FieldKind field_;
  int order_;
  Evaluator eval_;
  std::vector<ShapeInfo> info_;
  std::vector<std::vector<int>> by_entity_[4];
};

ShapeCatalog stress_shapes_prism(int p);
ShapeCatalog stress_shapes_hex(int p);
ShapeCatalog displacement_shapes(CellKind cell, int p);
ShapeCatalog potential_shapes(CellKind cell, int p);

/// Process-wide cached catalog; thread safe.
const ShapeCatalog& catalog(FieldKind field, CellKind cell, int p);

// Building blocks exposed for testing.
/// b^i l_i(a/b) for triangle edge g at (x, y), i = 0..n.
std::vector<Dual3> scaled_legendre_edge(int g, int n, double x, double y);
/// q_ij on the triangle for all i + j <= n; entry [i][j].
std::vector<std::vector<Dual3>> triangle_poly_q(int n, double x, double y);

// Helpers on evaluated components.
inline Mat3 tensor_value(const Dual3* c) {
  Mat3 m;
  m << c[0].v, c[5].v, c[4].v, c[5].v, c[1].v, c[3].v, c[4].v, c[3].v, c[2].v;
  return m;
}
inline Vec3 tensor_divergence(const Dual3* c) {
  // rows: (11,12,13), (12,22,23), (13,23,33)
  return Vec3(c[0].d[0] + c[5].d[1] + c[4].d[2], c[5].d[0] + c[1].d[1] + c[3].d[2],
              c[4].d[0] + c[3].d[1] + c[2].d[2]);
}
inline Vec3 vector_value(const Dual3* c) { return Vec3(c[0].v, c[1].v, c[2].v); }
/// (i, j) = d c_i / d x_j
inline Mat3 vector_gradient(const Dual3* c) {
  Mat3 g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = c[i].d[j];
  return g;
}
inline Vec3 scalar_gradient(const Dual3* c) { return Vec3(c[0].d[0], c[0].d[1], c[0].d[2]); }

}  // namespace tdnns
