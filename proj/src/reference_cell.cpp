#include "tdnns/reference_cell.hpp"

#include <algorithm>
#include <stdexcept>

namespace tdnns {

namespace {

Vec3 outward_normal(const ReferenceCell& c, const std::vector<int>& f) {
  const Vec3 a = c.vertices[f[1]] - c.vertices[f[0]];
  const Vec3 b = c.vertices[f[2]] - c.vertices[f[0]];
  Vec3 n = a.cross(b).normalized();
  Vec3 centroid = Vec3::Zero();
  for (const auto& v : c.vertices) centroid += v;
  centroid /= static_cast<double>(c.vertices.size());
  if (n.dot(c.vertices[f[0]] - centroid) < 0) n = -n;
  return n;
}

ReferenceCell make_segment() {
  ReferenceCell c{CellKind::segment, 1, {}, {}, {}, {}};
  c.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  c.edges = {{0, 1}};
  return c;
}

ReferenceCell make_triangle() {
  ReferenceCell c{CellKind::triangle, 2, {}, {}, {}, {}};
  c.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  c.edges = {{1, 2}, {2, 0}, {0, 1}};
  c.faces = {{0, 1, 2}};
  c.face_normals = {Vec3(0, 0, 1)};
  return c;
}

ReferenceCell make_quadrilateral() {
  ReferenceCell c{CellKind::quadrilateral, 2, {}, {}, {}, {}};
  c.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  c.edges = {{0, 1}, {3, 2}, {0, 3}, {1, 2}};
  c.faces = {{0, 1, 2, 3}};
  c.face_normals = {Vec3(0, 0, 1)};
  return c;
}

ReferenceCell make_prism() {
  ReferenceCell c{CellKind::prism, 3, {}, {}, {}, {}};
  c.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(0, 1, 1)};
  c.edges = {{1, 2}, {2, 0}, {0, 1}, {4, 5}, {5, 3}, {3, 4}, {0, 3}, {1, 4}, {2, 5}};
  c.faces = {{0, 1, 2}, {3, 4, 5}};
  for (int g = 0; g < 3; ++g) {
    const int a = c.edges[g][0], b = c.edges[g][1];
    c.faces.push_back({a, b, b + 3, a + 3});
  }
  for (const auto& f : c.faces) c.face_normals.push_back(outward_normal(c, f));
  return c;
}

ReferenceCell make_hexahedron() {
  ReferenceCell c{CellKind::hexahedron, 3, {}, {}, {}, {}};
  c.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0),
                Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(1, 1, 1), Vec3(0, 1, 1)};
  c.edges = {{0, 1}, {3, 2}, {4, 5}, {7, 6}, {0, 3}, {1, 2}, {4, 7}, {5, 6}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
  c.faces = {{0, 3, 7, 4}, {1, 2, 6, 5}, {0, 1, 5, 4}, {3, 2, 6, 7}, {0, 1, 2, 3}, {4, 5, 6, 7}};
  for (const auto& f : c.faces) c.face_normals.push_back(outward_normal(c, f));
  return c;
}

std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

EntityRef ReferenceCell::entity_of(std::vector<int> verts) const {
  verts = sorted(std::move(verts));
  if (verts.size() == 1) return {EntityType::vertex, verts[0]};
  if (static_cast<int>(verts.size()) == num_vertices()) return {EntityType::cell, 0};
  if (verts.size() == 2)
    for (int e = 0; e < num_edges(); ++e)
      if (sorted({edges[e][0], edges[e][1]}) == verts) return {EntityType::edge, e};
  for (int f = 0; f < num_faces(); ++f)
    if (sorted(faces[f]) == verts) return {EntityType::face, f};
  throw std::logic_error("vertex set is not an entity of the reference cell");
}

std::vector<int> ReferenceCell::entity_vertices(EntityRef e) const {
  switch (e.type) {
    case EntityType::vertex: return {e.index};
    case EntityType::edge: return {edges[e.index][0], edges[e.index][1]};
    case EntityType::face: return faces[e.index];
    case EntityType::cell: {
      std::vector<int> all(vertices.size());
      for (int i = 0; i < num_vertices(); ++i) all[i] = i;
      return all;
    }
  }
  return {};
}

bool ReferenceCell::contains(EntityRef sup, EntityRef sub) const {
  const auto a = sorted(entity_vertices(sup));
  const auto b = sorted(entity_vertices(sub));
  return std::includes(a.begin(), a.end(), b.begin(), b.end());
}

const ReferenceCell& reference_cell(CellKind kind) {
  static const ReferenceCell seg = make_segment(), tri = make_triangle(), quad = make_quadrilateral(),
                             prism = make_prism(), hex = make_hexahedron();
  switch (kind) {
    case CellKind::segment: return seg;
    case CellKind::triangle: return tri;
    case CellKind::quadrilateral: return quad;
    case CellKind::prism: return prism;
    case CellKind::hexahedron: return hex;
  }
  throw std::invalid_argument("unknown cell kind");
}

int hex_vertex(int bx, int by, int bz) {
  static constexpr int table[2][2] = {{0, 3}, {1, 2}};  // [bx][by]
  return table[bx][by] + 4 * bz;
}

Eigen::Matrix2d unit_edge_tensor(int g) {
  Eigen::Matrix2d s;
  switch (g) {
    case 0: s << 0, 1, 1, 0; break;
    case 1: s << 1, -0.5, -0.5, 0; break;
    case 2: s << 0, -0.5, -0.5, 1; break;
    default: throw std::invalid_argument("triangle edge index out of range");
  }
  return s;
}

}  // namespace tdnns
