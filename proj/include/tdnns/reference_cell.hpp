#pragma once

// Reference cells and their fixed entity numbering.
//
// triangle   V0 (0,0)  V1 (1,0)  V2 (0,1); lambda = (1-x-y, x, y)
//            edge g is opposite vertex g: E0 = (1,2) hypotenuse, E1 = (2,0) on x=0, E2 = (0,1) on y=0
// prism      triangle x [0,1]: vertices 0..2 at z=0, 3..5 at z=1
//            edges  0..2 bottom (triangle edge g), 3..5 top, 6+a vertical (a, a+3)
//            faces  0 bottom, 1 top, 2+g quad over triangle edge g: (a, b, b+3, a+3)
// hexahedron VTK order (0,0,0) (1,0,0) (1,1,0) (0,1,0), same at z=1
//            edges  x-dir (0,1) (3,2) (4,5) (7,6); y-dir (0,3) (1,2) (4,7) (5,6); z-dir (0,4) (1,5) (2,6) (3,7)
//            faces  2*d + s is the face x_d = s

#include "tdnns/quadrature.hpp"
#include "tdnns/tensor.hpp"

#include <array>
#include <vector>

namespace tdnns {

enum class EntityType { vertex = 0, edge = 1, face = 2, cell = 3 };

struct EntityRef {
  EntityType type = EntityType::cell;
  int index = 0;
  bool operator==(const EntityRef&) const = default;
};

struct ReferenceCell {
  CellKind kind;
  int dim;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::vector<int>> faces;  // cyclic vertex order
  std::vector<Vec3> face_normals;       // outward unit normals

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
  bool face_is_triangle(int f) const { return faces[f].size() == 3; }

  /// Entity spanned by exactly this vertex set (order irrelevant); throws if none.
  EntityRef entity_of(std::vector<int> verts) const;
  /// Vertex list of an entity.
  std::vector<int> entity_vertices(EntityRef e) const;
  /// True if sub is contained in sup (as vertex sets).
  bool contains(EntityRef sup, EntityRef sub) const;
};

const ReferenceCell& reference_cell(CellKind kind);

int hex_vertex(int bx, int by, int bz);

/// Constant 2x2 unit tensor of triangle edge g: n.S.n = 1 on edge g, 0 on the others.
Eigen::Matrix2d unit_edge_tensor(int g);

}  // namespace tdnns
