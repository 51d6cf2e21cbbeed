#pragma once

// Job configuration read from JSON. Dimensional values are written as
// {"value": v, "unit": "mm"} (a bare number means SI) and converted at use.
//
// {
//   "seed": 1, "threads": 0,
//   "mesh": {"generator": "semicylinder" | "patch_plate" | "block" | "file", ...},
//   "orders": {"p": 2, "p_phi": 3, "g": 2},
//   "materials": [{"id": 0, "preset": "pzt5h"}, {"id": 1, "isotropic": {...}}],
//   "boundary": {"electrodes": {"0": 0, "1": 100}, "body_force": [0, 0, 0]},
//   "analysis": {"kind": "static" | "eigen" | "convergence" | "verify", ...},
//   "probes": [{"name": "tip", "component": "magnitude", "reference": {...}}],
//   "output": {"report": "", "json": "", "vtk": "", "subdivision": 2}
// }

#include "tdnns/assembly.hpp"
#include "tdnns/mesh.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdnns {

/// Validation failure; `field` is a JSON path such as "materials[1].density".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& msg)
      : std::runtime_error("config " + field + ": " + msg), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct Quantity {
  double value = 0.0;
  std::string unit;  // empty: SI
  bool operator==(const Quantity&) const = default;
};

struct MeshConfig {
  std::string generator = "semicylinder";
  std::string file;
  // semicylinder
  Quantity r{15.0, "mm"}, t{1.0, "mm"}, L{5.0, "mm"};
  int n_circ = 10, n_len = 1;
  // patch plate
  Quantity plate_len{25.0, "mm"}, plate_t{1.0, "mm"}, patch_d{15.0, "mm"}, patch_t{0.5, "mm"}, ring_w{0.25, "mm"};
  int n_ring_layers = 2, plate_circ = 8, n_rad = 5, n_core = 3;
  double grading = 2.0;
  // hybrid block
  int nx = 2, ny = 2, nz = 1;
  double distortion = 0.2, shear = 0.3;
  unsigned block_seed = 1;
  bool operator==(const MeshConfig&) const = default;
};

struct MaterialConfig {
  int id = 0;
  std::string preset;  // "pzt5h", "aluminium" or empty
  // isotropic elastic
  bool isotropic = false;
  Quantity young{0.0, "GPa"};
  double poisson = 0.0;
  // general anisotropic (Voigt 11,22,33,23,13,12)
  std::string stiffness_unit = "GPa", coupling_unit = "C/m^2", permittivity_unit = "F/m";
  std::vector<double> stiffness;     // 36 entries, row major
  std::vector<double> coupling;      // 18 entries, row major; empty: not electric
  std::vector<double> permittivity;  // 9 entries at constant strain
  Quantity density{0.0, "kg/m^3"};
  std::string frame;  // "", "global", "cylindrical_radial"
  double axis_x = 0.0, axis_y = 0.0;
  bool operator==(const MaterialConfig&) const = default;
};

struct BoundaryConfig {
  std::vector<std::pair<int, double>> electrodes;  // id -> potential in V; unlisted electrodes float
  std::vector<double> body_force;                  // N/m^3, 3 entries or empty
  double surface_charge = 0.0;                     // C/m^2 on charge-free faces
  bool operator==(const BoundaryConfig&) const = default;
};

struct ConvergenceRow {
  Quantity h{5.0, "mm"};
  int n_circ = 10, n_len = 1, k = 1;
  bool operator==(const ConvergenceRow&) const = default;
};

struct AnalysisConfig {
  std::string kind = "static";  // static | eigen | convergence | verify
  // eigen
  int k = 5;
  std::string circuit = "SC";  // SC | OC | both
  double tol = 1e-10, residual_tol = 1e-8;
  int max_it = 2000;
  std::vector<double> reference_khz;
  // convergence (semicylinder rows; p_phi = k + 1)
  std::vector<ConvergenceRow> rows;
  // verify
  std::string level = "quick";
  bool operator==(const AnalysisConfig&) const = default;
};

struct ProbeConfig {
  std::string name;
  std::string component = "magnitude";  // magnitude | x | y | z
  std::optional<Quantity> reference;
  std::optional<Quantity> comparison;
  bool operator==(const ProbeConfig&) const = default;
};

struct OutputConfig {
  std::string report, json, vtk;
  int subdivision = 2;
  bool operator==(const OutputConfig&) const = default;
};

struct JobConfig {
  std::uint64_t seed = 1;
  int threads = 0;
  bool condense = true;
  MeshConfig mesh;
  int p = 2, p_phi = 3, g = 2;
  std::vector<MaterialConfig> materials;
  BoundaryConfig boundary;
  AnalysisConfig analysis;
  std::vector<ProbeConfig> probes;
  OutputConfig output;
  bool operator==(const JobConfig&) const = default;
};

/// Throws ConfigError; JSON syntax errors carry line and column.
JobConfig parse_config(const std::string& text);
JobConfig read_config_file(const std::string& path);
std::string serialize_config(const JobConfig& cfg);

/// Built-in jobs: "semicylinder", "patch_static", "patch_eigen", "convergence".
JobConfig preset_config(const std::string& name);

/// Length or displacement in metres (units m, mm, um).
double to_si_length(const Quantity& q);

Mesh build_mesh(const JobConfig& cfg);
std::vector<MaterialLawCompliance> build_materials(const JobConfig& cfg, Mesh& mesh);
BoundaryData build_boundary(const JobConfig& cfg, const Mesh& mesh);

}  // namespace tdnns
