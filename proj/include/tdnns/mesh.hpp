#pragma once

// Hybrid prism / hexahedron meshes with curved geometry and boundary tags.
//
// Boundary tags per element face:
//   mechanical  clamped (u_t prescribed) | free (sigma_nn prescribed) | interior
//   electric    electrode k (phi prescribed) | charge_free | none
// Electric tags are required on every boundary face of the electrically
// active subdomain, which may include faces interior to the mesh.

#include "tdnns/element_map.hpp"
#include "tdnns/reference_cell.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tdnns {

enum class MechTag { interior, clamped, free };
enum class ElecTag { none, electrode, charge_free };

std::string to_string(MechTag t);
std::string to_string(ElecTag t);

struct Element {
  CellKind kind = CellKind::prism;
  std::vector<int> vertices;
  int material = 0;
  int frame = 0;
};

struct Frame {
  enum class Kind { global, cylindrical_radial } kind = Kind::global;
  double cx = 0.0, cy = 0.0;  // axis (parallel to z) for the radial frame

  /// Columns are the local material axes in global coordinates at x.
  /// cylindrical_radial: (e_theta, e_z, e_r), polarisation axis 3 = radial.
  Mat3 rotation(const Vec3& x) const;
};

struct FacetTag {
  int element = 0;
  int local_face = 0;
  MechTag mech = MechTag::interior;
  ElecTag elec = ElecTag::none;
  int electrode = -1;
};

struct Probe {
  std::string name;
  Vec3 x;
};

/// Global entities derived from connectivity.
struct Topology {
  std::vector<std::array<int, 2>> edges;           // sorted global vertex pairs
  std::vector<std::vector<int>> faces;             // sorted global vertex ids
  std::vector<std::vector<std::pair<int, int>>> face_elements;  // (element, local face)
  std::vector<std::vector<int>> element_edges;     // local edge -> global edge
  std::vector<std::vector<int>> element_faces;     // local face -> global face
  std::vector<std::vector<int>> vertex_elements;
  std::vector<std::vector<int>> edge_elements;
};

class Mesh {
 public:
  std::vector<Vec3> vertices;
  std::vector<Element> elements;
  int geometry_order = 1;
  /// Lagrange node positions per element; empty entry = straight (from vertices).
  std::vector<std::vector<Vec3>> control_points;
  std::vector<Frame> frames{Frame{}};
  std::vector<FacetTag> facets;
  std::vector<Probe> probes;

  /// Validates connectivity, builds topology and element maps. Throws std::invalid_argument.
  void finalize();

  const Topology& topology() const { return topo_; }
  const ElementMap& map(int e) const { return maps_.at(e); }
  int num_elements() const { return static_cast<int>(elements.size()); }

  /// Tag record of (element, local face), or nullptr.
  const FacetTag* facet(int element, int local_face) const;
  /// Faces of the mesh boundary as (element, local face).
  std::vector<std::pair<int, int>> boundary_faces() const;
  const Probe& probe(const std::string& name) const;

  /// Sum of element volumes by quadrature.
  double volume(int quad_points = 6) const;
  /// Volume of elements with the given material id.
  double material_volume(int material, int quad_points = 6) const;

  /// Locates the element and reference point containing x (Newton on each element).
  bool locate(const Vec3& x, int& element, Vec3& xh, double tol = 1e-9) const;
  /// All elements containing x with their reference points.
  std::vector<std::pair<int, Vec3>> locate_all(const Vec3& x, double tol = 1e-9) const;

 private:
  Topology topo_;
  std::vector<ElementMap> maps_;
  std::map<std::pair<int, int>, int> facet_index_;
};

void write_mesh(std::ostream& os, const Mesh& m);
Mesh read_mesh(std::istream& is);
void write_mesh_file(const std::string& path, const Mesh& m);
Mesh read_mesh_file(const std::string& path);

// ------------------------------------------------------------------ generators
// Lengths are in metres. Material ids: 0 piezo, 1 substrate.

struct SemicylinderParams {
  double r = 15e-3;      // outer radius
  double t = 1e-3;       // wall thickness
  double L = 5e-3;       // length along the axis
  int n_circ = 10;
  int n_len = 1;
  int geom_order = 2;
};

/// Half shell theta in [0, pi], z in [0, L], radius in [r - t, r], axis along z.
/// Clamped at theta = pi; electrode 0 on the inner, electrode 1 on the outer
/// surface; radial material frame (id 1). Probe "tip" at (r, 0, 0).
Mesh gen_semicylinder(const SemicylinderParams& p);

struct PatchPlateParams {
  double plate_len = 25e-3;
  double plate_t = 1e-3;
  double patch_d = 15e-3;
  double patch_t = 0.5e-3;
  double ring_w = 0.25e-3;  // width of each hexahedral ring layer
  int n_ring_layers = 2;    // one inside and the rest outside the patch edge
  int n_circ = 8;           // multiple of 4
  int n_rad = 2;            // radial layers between outer ring and plate edge
  int n_core = 1;           // radial layers in the core disk
  double grading = 1.0;     // radial spacing exponent, > 1 clusters layers at the patch edge
  int geom_order = 2;
};

/// Square plate clamped at x = 0 with a circular piezo patch on top, centred.
/// Electrode 0 on the patch bottom, electrode 1 on the patch top.
/// Probe "corner" at (plate_len, 0, 0).
Mesh gen_patch_plate(const PatchPlateParams& p);

struct BlockParams {
  int nx = 2, ny = 2, nz = 1;  // nx columns of hexahedra, then nx columns of triangles
  double distortion = 0.2;      // random perturbation of triangle-region vertices
  double shear = 0.3;           // in-plane shear of the hexahedral columns
  unsigned seed = 1;
  Mat3 affine = Mat3::Identity();
  Vec3 shift = Vec3::Zero();
};

/// Straight-sided hybrid block on [0, 2] x [0, 1] x [0, 1] before the affine map:
/// parallelepiped hexahedra for x <= 1 and distorted prisms for x >= 1.
/// All boundary faces free and charge-free; callers retag as needed.
Mesh gen_hybrid_block(const BlockParams& p);

}  // namespace tdnns
