#pragma once

// Global numbering for the three fields and the per-element maps from global
// to local coefficients.
//
// Every mesh entity (vertex, edge, face, cell) carries the functions that the
// catalogs associate with it. The element with the lexicographically smallest
// sorted vertex list among those containing the entity owns it: its local
// functions define the global basis there. Every other element expresses that
// basis in its own local functions by matching traces in a parametrisation
// fixed by global vertex ids:
//   edge      from the lower to the higher vertex id
//   triangle  vertices in increasing id order
//   quad      origin at the smallest id, first axis towards its smaller neighbour
// Matched trace quantities are map independent: potential value, tangential
// components u.tau for displacement, m.N.m with m = tau_s x tau_t for stress.
//
// Local coefficients of element K: a_K = R_K x, R_K block diagonal per entity.

#include "tdnns/basis.hpp"
#include "tdnns/mesh.hpp"

#include <vector>

namespace tdnns {

struct DofBlock {
  EntityRef entity;               // local entity of the element
  int global_entity = 0;          // topology id (element id for cells)
  std::vector<int> local;         // local function indices
  int global_start = -1;          // first global dof, -1 = element-local (condensed)
  Eigen::MatrixXd B;              // local coefficients = B * global coefficients
  bool identity = true;
};

struct ElementFieldDofs {
  std::vector<DofBlock> blocks;
  std::vector<int> gdof;  // per local function: global dof, -1 if element-local
};

struct FieldDofs {
  FieldKind field = FieldKind::scalar;
  int order = 1;
  int offset = 0;   // position of this field in the global vector
  int count = 0;    // number of global dofs
  int local_only = 0;  // condensed element-interior functions (stress only)
  std::vector<ElementFieldDofs> elem;  // empty entry: field absent on the element
  // global entity -> (first dof, count), indexed by entity type
  std::vector<std::pair<int, int>> vertex_dofs, edge_dofs, face_dofs, cell_dofs;

  const std::pair<int, int>& entity_dofs(EntityType t, int id) const;
};

struct DofMap {
  const Mesh* mesh = nullptr;
  int p = 1, p_phi = 1;
  bool condensed = true;
  std::vector<bool> electric;  // per element
  FieldDofs u, s, phi;

  int size() const { return u.count + s.count + phi.count; }
  /// Count including the element-interior stress functions.
  int size_with_interior() const { return size() + s.local_only; }
  const FieldDofs& field(FieldKind f) const {
    return f == FieldKind::vector ? u : (f == FieldKind::tensor ? s : phi);
  }
};

/// Throws std::invalid_argument on inconsistent input, std::runtime_error if
/// traces cannot be matched (non-conforming geometry or basis defect).
DofMap build_dof_map(const Mesh& mesh, int p, int p_phi, const std::vector<bool>& electric, bool condense = true);

/// Reference parameter points of a global entity as seen by element e (local entity le).
struct EntityParam {
  Vec3 origin;
  Vec3 ts, tt;  // reference tangents along the global parameters
};
EntityParam entity_param(const Mesh& mesh, int e, EntityRef le);

/// Trace quantities of functions `fns` of a catalog at parameter points.
/// Rows: point-major, then trace components.
Eigen::MatrixXd trace_matrix(const ShapeCatalog& cat, EntityType type, const EntityParam& par,
                             const std::vector<Eigen::Vector2d>& pts, const std::vector<int>& fns);

/// Parameter points used to sample traces on an entity.
std::vector<Eigen::Vector2d> entity_sample_points(EntityType type, bool triangle, int order);

/// Largest physical trace mismatch across interior faces for one field.
struct ConformityReport {
  double max_residual = 0.0;
  int face = -1;       // global face of the largest mismatch
  int element_a = -1, element_b = -1;
};
ConformityReport check_conformity(const DofMap& dm, FieldKind field);

}  // namespace tdnns
