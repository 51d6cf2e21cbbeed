#include "tdnns/config.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace tdnns {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(join(path, key), "unknown field");
  }
}

template <class T>
void get(const json& j, const std::string& path, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    if constexpr (std::is_same_v<T, int> || std::is_same_v<T, unsigned> || std::is_same_v<T, std::uint64_t>) {
      if (!it->is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw ConfigError(join(path, key), "expected a number");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(join(path, key), "expected true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError(join(path, key), "expected a string");
    }
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(join(path, key), e.what());
  }
}

void get_numbers(const json& j, const std::string& path, const char* key, std::vector<double>& out,
                 std::size_t expected) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  const std::string f = join(path, key);
  std::vector<double> v;
  auto push = [&](const json& x) {
    if (!x.is_number()) throw ConfigError(f, "expected numbers");
    v.push_back(x.get<double>());
  };
  if (!it->is_array()) throw ConfigError(f, "expected an array");
  for (const auto& row : *it) {
    if (row.is_array())
      for (const auto& x : row) push(x);
    else
      push(row);
  }
  if (expected && v.size() != expected)
    throw ConfigError(f, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
  out = v;
}

using Converter = double (*)(double, const std::string&);

Quantity parse_quantity(const json& j, const std::string& f, Converter conv) {
  Quantity q;
  if (j.is_number()) {
    q.value = j.get<double>();
  } else if (j.is_object()) {
    check_keys(j, f, {"value", "unit"});
    if (!j.contains("value") || !j["value"].is_number()) throw ConfigError(f + ".value", "expected a number");
    q.value = j["value"].get<double>();
    if (j.contains("unit")) {
      if (!j["unit"].is_string()) throw ConfigError(f + ".unit", "expected a string");
      q.unit = j["unit"].get<std::string>();
    }
  } else {
    throw ConfigError(f, "expected a number or {\"value\", \"unit\"}");
  }
  if (!q.unit.empty()) {
    try {
      conv(q.value, q.unit);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(f + ".unit", e.what());
    }
  }
  return q;
}

void get_quantity(const json& j, const std::string& path, const char* key, Quantity& out, Converter conv) {
  const auto it = j.find(key);
  if (it != j.end()) out = parse_quantity(*it, join(path, key), conv);
}

json quantity_json(const Quantity& q) {
  if (q.unit.empty()) return q.value;
  return json{{"value", q.value}, {"unit", q.unit}};
}

double convert(const Quantity& q, Converter conv) { return q.unit.empty() ? q.value : conv(q.value, q.unit); }

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

MeshConfig parse_mesh(const json& j) {
  const std::string P = "mesh";
  check_keys(j, P, {"generator", "file", "r", "t", "L", "n_circ", "n_len", "plate_len", "plate_t", "patch_d",
                    "patch_t", "ring_w", "n_ring_layers", "n_rad", "n_core", "grading", "nx", "ny", "nz",
                    "distortion", "shear", "seed"});
  MeshConfig m;
  get(j, P, "generator", m.generator);
  if (m.generator == "semicylinder") {
    get_quantity(j, P, "r", m.r, length_to_si);
    get_quantity(j, P, "t", m.t, length_to_si);
    get_quantity(j, P, "L", m.L, length_to_si);
    get(j, P, "n_circ", m.n_circ);
    get(j, P, "n_len", m.n_len);
  } else if (m.generator == "patch_plate") {
    get_quantity(j, P, "plate_len", m.plate_len, length_to_si);
    get_quantity(j, P, "plate_t", m.plate_t, length_to_si);
    get_quantity(j, P, "patch_d", m.patch_d, length_to_si);
    get_quantity(j, P, "patch_t", m.patch_t, length_to_si);
    get_quantity(j, P, "ring_w", m.ring_w, length_to_si);
    get(j, P, "n_ring_layers", m.n_ring_layers);
    get(j, P, "n_circ", m.plate_circ);
    get(j, P, "n_rad", m.n_rad);
    get(j, P, "n_core", m.n_core);
    get(j, P, "grading", m.grading);
  } else if (m.generator == "block") {
    get(j, P, "nx", m.nx);
    get(j, P, "ny", m.ny);
    get(j, P, "nz", m.nz);
    get(j, P, "distortion", m.distortion);
    get(j, P, "shear", m.shear);
    get(j, P, "seed", m.block_seed);
  } else if (m.generator == "file") {
    get(j, P, "file", m.file);
    if (m.file.empty()) throw ConfigError("mesh.file", "required for generator 'file'");
  } else {
    throw ConfigError("mesh.generator", "unknown generator '" + m.generator + "'");
  }
  return m;
}

json mesh_json(const MeshConfig& m) {
  json j{{"generator", m.generator}};
  if (m.generator == "semicylinder") {
    j["r"] = quantity_json(m.r);
    j["t"] = quantity_json(m.t);
    j["L"] = quantity_json(m.L);
    j["n_circ"] = m.n_circ;
    j["n_len"] = m.n_len;
  } else if (m.generator == "patch_plate") {
    j["plate_len"] = quantity_json(m.plate_len);
    j["plate_t"] = quantity_json(m.plate_t);
    j["patch_d"] = quantity_json(m.patch_d);
    j["patch_t"] = quantity_json(m.patch_t);
    j["ring_w"] = quantity_json(m.ring_w);
    j["n_ring_layers"] = m.n_ring_layers;
    j["n_circ"] = m.plate_circ;
    j["n_rad"] = m.n_rad;
    j["n_core"] = m.n_core;
    j["grading"] = m.grading;
  } else if (m.generator == "block") {
    j["nx"] = m.nx;
    j["ny"] = m.ny;
    j["nz"] = m.nz;
    j["distortion"] = m.distortion;
    j["shear"] = m.shear;
    j["seed"] = m.block_seed;
  } else {
    j["file"] = m.file;
  }
  return j;
}

MaterialConfig parse_material(const json& j, const std::string& P) {
  check_keys(j, P, {"id", "preset", "isotropic", "stiffness", "coupling", "permittivity", "density", "frame"});
  MaterialConfig m;
  if (!j.contains("id")) throw ConfigError(join(P, "id"), "required");
  get(j, P, "id", m.id);
  get(j, P, "preset", m.preset);
  const int kinds = (j.contains("preset") ? 1 : 0) + (j.contains("isotropic") ? 1 : 0) + (j.contains("stiffness") ? 1 : 0);
  if (kinds != 1) throw ConfigError(P, "exactly one of 'preset', 'isotropic', 'stiffness' is required");
  if (!m.preset.empty() && m.preset != "pzt5h" && m.preset != "aluminium")
    throw ConfigError(join(P, "preset"), "unknown preset '" + m.preset + "'");
  if (j.contains("isotropic")) {
    const std::string Q = join(P, "isotropic");
    check_keys(j["isotropic"], Q, {"young", "poisson"});
    m.isotropic = true;
    get_quantity(j["isotropic"], Q, "young", m.young, stiffness_to_si);
    get(j["isotropic"], Q, "poisson", m.poisson);
  }
  auto table = [&](const char* key, std::string& unit, std::vector<double>& values, std::size_t n, Converter conv) {
    if (!j.contains(key)) return;
    const std::string Q = join(P, key);
    check_keys(j[key], Q, {"unit", "values"});
    get(j[key], Q, "unit", unit);
    try {
      conv(1.0, unit);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(Q + ".unit", e.what());
    }
    get_numbers(j[key], Q, "values", values, n);
    if (values.empty()) throw ConfigError(Q + ".values", "required");
  };
  table("stiffness", m.stiffness_unit, m.stiffness, 36, stiffness_to_si);
  table("coupling", m.coupling_unit, m.coupling, 18, coupling_to_si);
  table("permittivity", m.permittivity_unit, m.permittivity, 9, permittivity_to_si);
  if (!m.stiffness.empty() && !m.coupling.empty() && m.permittivity.empty())
    throw ConfigError(join(P, "permittivity"), "required for a coupled material");
  if ((j.contains("isotropic") || j.contains("stiffness")) && !j.contains("density"))
    throw ConfigError(join(P, "density"), "required");
  get_quantity(j, P, "density", m.density, density_to_si);
  if (j.contains("frame")) {
    const std::string Q = join(P, "frame");
    const json& f = j["frame"];
    if (f.is_string()) {
      m.frame = f.get<std::string>();
    } else {
      check_keys(f, Q, {"kind", "axis"});
      get(f, Q, "kind", m.frame);
      std::vector<double> axis;
      get_numbers(f, Q, "axis", axis, 2);
      if (!axis.empty()) {
        m.axis_x = axis[0];
        m.axis_y = axis[1];
      }
    }
    if (m.frame != "global" && m.frame != "cylindrical_radial")
      throw ConfigError(Q, "unknown frame '" + m.frame + "'");
  }
  return m;
}

json material_json(const MaterialConfig& m) {
  json j{{"id", m.id}};
  if (!m.preset.empty()) j["preset"] = m.preset;
  if (m.isotropic) j["isotropic"] = json{{"young", quantity_json(m.young)}, {"poisson", m.poisson}};
  if (!m.stiffness.empty()) j["stiffness"] = json{{"unit", m.stiffness_unit}, {"values", m.stiffness}};
  if (!m.coupling.empty()) j["coupling"] = json{{"unit", m.coupling_unit}, {"values", m.coupling}};
  if (!m.permittivity.empty()) j["permittivity"] = json{{"unit", m.permittivity_unit}, {"values", m.permittivity}};
  if (m.preset.empty()) j["density"] = quantity_json(m.density);
  if (!m.frame.empty()) {
    if (m.frame == "cylindrical_radial")
      j["frame"] = json{{"kind", m.frame}, {"axis", {m.axis_x, m.axis_y}}};
    else
      j["frame"] = m.frame;
  }
  return j;
}

BoundaryConfig parse_boundary(const json& j) {
  const std::string P = "boundary";
  check_keys(j, P, {"electrodes", "body_force", "surface_charge"});
  BoundaryConfig b;
  if (j.contains("electrodes")) {
    const json& e = j["electrodes"];
    if (!e.is_object()) throw ConfigError("boundary.electrodes", "expected an object {\"id\": volts}");
    for (const auto& [key, value] : e.items()) {
      const std::string f = "boundary.electrodes." + key;
      int id = 0;
      try {
        std::size_t used = 0;
        id = std::stoi(key, &used);
        if (used != key.size() || id < 0) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw ConfigError(f, "electrode ids are non-negative integers");
      }
      if (!value.is_number()) throw ConfigError(f, "expected a potential in V");
      b.electrodes.emplace_back(id, value.get<double>());
    }
    std::sort(b.electrodes.begin(), b.electrodes.end());
  }
  get_numbers(j, P, "body_force", b.body_force, 3);
  get(j, P, "surface_charge", b.surface_charge);
  return b;
}

json boundary_json(const BoundaryConfig& b) {
  json j = json::object();
  json e = json::object();
  for (const auto& [id, v] : b.electrodes) e[std::to_string(id)] = v;
  j["electrodes"] = e;
  if (!b.body_force.empty()) j["body_force"] = b.body_force;
  if (b.surface_charge != 0.0) j["surface_charge"] = b.surface_charge;
  return j;
}

AnalysisConfig parse_analysis(const json& j) {
  const std::string P = "analysis";
  check_keys(j, P, {"kind", "k", "circuit", "tol", "residual_tol", "max_it", "reference_khz", "rows", "level"});
  AnalysisConfig a;
  get(j, P, "kind", a.kind);
  if (a.kind != "static" && a.kind != "eigen" && a.kind != "convergence" && a.kind != "verify")
    throw ConfigError("analysis.kind", "unknown analysis '" + a.kind + "'");
  get(j, P, "k", a.k);
  if (a.k < 1) throw ConfigError("analysis.k", "must be at least 1");
  get(j, P, "circuit", a.circuit);
  if (a.circuit != "SC" && a.circuit != "OC" && a.circuit != "both")
    throw ConfigError("analysis.circuit", "expected SC, OC or both");
  get(j, P, "tol", a.tol);
  get(j, P, "residual_tol", a.residual_tol);
  get(j, P, "max_it", a.max_it);
  get_numbers(j, P, "reference_khz", a.reference_khz, 0);
  if (j.contains("rows")) {
    if (!j["rows"].is_array()) throw ConfigError("analysis.rows", "expected an array");
    for (std::size_t i = 0; i < j["rows"].size(); ++i) {
      const std::string Q = "analysis.rows[" + std::to_string(i) + "]";
      const json& r = j["rows"][i];
      check_keys(r, Q, {"h", "n_circ", "n_len", "k"});
      ConvergenceRow row;
      get_quantity(r, Q, "h", row.h, length_to_si);
      get(r, Q, "n_circ", row.n_circ);
      get(r, Q, "n_len", row.n_len);
      get(r, Q, "k", row.k);
      if (row.k < 1) throw ConfigError(Q + ".k", "must be at least 1");
      a.rows.push_back(row);
    }
  }
  get(j, P, "level", a.level);
  if (a.level != "quick" && a.level != "full") throw ConfigError("analysis.level", "expected quick or full");
  if (a.kind == "convergence" && a.rows.empty()) throw ConfigError("analysis.rows", "required for a convergence study");
  return a;
}

json analysis_json(const AnalysisConfig& a) {
  json j{{"kind", a.kind},         {"k", a.k},           {"circuit", a.circuit},
         {"tol", a.tol},           {"residual_tol", a.residual_tol}, {"max_it", a.max_it},
         {"reference_khz", a.reference_khz}, {"level", a.level}};
  json rows = json::array();
  for (const auto& r : a.rows)
    rows.push_back(json{{"h", quantity_json(r.h)}, {"n_circ", r.n_circ}, {"n_len", r.n_len}, {"k", r.k}});
  j["rows"] = rows;
  return j;
}

ProbeConfig parse_probe(const json& j, const std::string& P) {
  check_keys(j, P, {"name", "component", "reference", "comparison"});
  ProbeConfig p;
  get(j, P, "name", p.name);
  if (p.name.empty()) throw ConfigError(join(P, "name"), "required");
  get(j, P, "component", p.component);
  if (p.component != "magnitude" && p.component != "x" && p.component != "y" && p.component != "z")
    throw ConfigError(join(P, "component"), "expected magnitude, x, y or z");
  if (j.contains("reference")) p.reference = parse_quantity(j["reference"], join(P, "reference"), length_to_si);
  if (j.contains("comparison")) p.comparison = parse_quantity(j["comparison"], join(P, "comparison"), length_to_si);
  return p;
}

json probe_json(const ProbeConfig& p) {
  json j{{"name", p.name}, {"component", p.component}};
  if (p.reference) j["reference"] = quantity_json(*p.reference);
  if (p.comparison) j["comparison"] = quantity_json(*p.comparison);
  return j;
}

}  // namespace

JobConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<syntax>", line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  check_keys(j, "", {"seed", "threads", "condense", "mesh", "orders", "materials", "boundary", "analysis", "probes",
                     "output"});
  JobConfig c;
  get(j, "", "seed", c.seed);
  get(j, "", "threads", c.threads);
  if (c.threads < 0) throw ConfigError("threads", "must be non-negative");
  get(j, "", "condense", c.condense);
  if (!j.contains("mesh")) throw ConfigError("mesh", "required");
  c.mesh = parse_mesh(j["mesh"]);
  if (j.contains("orders")) {
    check_keys(j["orders"], "orders", {"p", "p_phi", "g"});
    get(j["orders"], "orders", "p", c.p);
    get(j["orders"], "orders", "p_phi", c.p_phi);
    get(j["orders"], "orders", "g", c.g);
  }
  if (c.p < 1) throw ConfigError("orders.p", "must be at least 1");
  if (c.p_phi < 1) throw ConfigError("orders.p_phi", "must be at least 1");
  if (c.g < 1) throw ConfigError("orders.g", "must be at least 1");
  if (!j.contains("materials") || !j["materials"].is_array() || j["materials"].empty())
    throw ConfigError("materials", "a non-empty array is required");
  std::set<int> ids;
  for (std::size_t i = 0; i < j["materials"].size(); ++i) {
    const std::string P = "materials[" + std::to_string(i) + "]";
    c.materials.push_back(parse_material(j["materials"][i], P));
    if (!ids.insert(c.materials.back().id).second) throw ConfigError(P + ".id", "duplicate material id");
  }
  if (j.contains("boundary")) c.boundary = parse_boundary(j["boundary"]);
  if (j.contains("analysis")) c.analysis = parse_analysis(j["analysis"]);
  if (j.contains("probes")) {
    if (!j["probes"].is_array()) throw ConfigError("probes", "expected an array");
    for (std::size_t i = 0; i < j["probes"].size(); ++i)
      c.probes.push_back(parse_probe(j["probes"][i], "probes[" + std::to_string(i) + "]"));
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, "output", {"report", "json", "vtk", "subdivision"});
    get(o, "output", "report", c.output.report);
    get(o, "output", "json", c.output.json);
    get(o, "output", "vtk", c.output.vtk);
    get(o, "output", "subdivision", c.output.subdivision);
    if (c.output.subdivision < 1) throw ConfigError("output.subdivision", "must be at least 1");
  }
  return c;
}

JobConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const JobConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["condense"] = c.condense;
  j["mesh"] = mesh_json(c.mesh);
  j["orders"] = json{{"p", c.p}, {"p_phi", c.p_phi}, {"g", c.g}};
  json mats = json::array();
  for (const auto& m : c.materials) mats.push_back(material_json(m));
  j["materials"] = mats;
  j["boundary"] = boundary_json(c.boundary);
  j["analysis"] = analysis_json(c.analysis);
  json probes = json::array();
  for (const auto& p : c.probes) probes.push_back(probe_json(p));
  j["probes"] = probes;
  j["output"] = json{{"report", c.output.report},
                     {"json", c.output.json},
                     {"vtk", c.output.vtk},
                     {"subdivision", c.output.subdivision}};
  return j.dump(2) + "\n";
}

JobConfig preset_config(const std::string& name) {
  JobConfig c;
  MaterialConfig pzt;
  pzt.id = 0;
  pzt.preset = "pzt5h";
  if (name == "semicylinder" || name == "convergence") {
    c.mesh.generator = "semicylinder";
    c.mesh.n_circ = 20;
    c.mesh.n_len = 2;
    c.p = 2;
    c.p_phi = 3;
    c.materials = {pzt};
    c.boundary.electrodes = {{0, 0.0}, {1, 100.0}};
    c.probes = {ProbeConfig{"tip", "magnitude", Quantity{2.75525, "um"}, std::nullopt}};
    if (name == "convergence") {
      c.analysis.kind = "convergence";
      for (const auto& [h, nc, nl] : {std::tuple{5.0, 10, 1}, std::tuple{2.5, 20, 2}})
        for (int k = 1; k <= 3; ++k) c.analysis.rows.push_back(ConvergenceRow{Quantity{h, "mm"}, nc, nl, k});
    }
    return c;
  }
  if (name == "patch_static" || name == "patch_eigen") {
    c.mesh.generator = "patch_plate";
    c.p = 2;
    c.p_phi = 3;
    c.g = 3;
    MaterialConfig al;
    al.id = 1;
    al.preset = "aluminium";
    c.materials = {pzt, al};
    if (name == "patch_static") {
      c.boundary.electrodes = {{0, 0.0}, {1, 100.0}};
      c.probes = {ProbeConfig{"corner", "z", Quantity{-6.07325, "um"}, Quantity{-6.03698, "um"}}};
    } else {
      c.boundary.electrodes = {{0, 0.0}, {1, 0.0}};
      c.analysis.kind = "eigen";
      c.analysis.k = 5;
      c.analysis.circuit = "both";
      c.analysis.reference_khz = {1.2647, 3.7987, 8.8475, 11.6111, 12.1416};
    }
    return c;
  }
  throw ConfigError("<preset>", "unknown preset '" + name + "'");
}

double to_si_length(const Quantity& q) { return convert(q, length_to_si); }

Mesh build_mesh(const JobConfig& cfg) {
  const MeshConfig& m = cfg.mesh;
  try {
    if (m.generator == "semicylinder") {
      SemicylinderParams p;
      p.r = to_si_length(m.r);
      p.t = to_si_length(m.t);
      p.L = to_si_length(m.L);
      p.n_circ = m.n_circ;
      p.n_len = m.n_len;
      p.geom_order = cfg.g;
      return gen_semicylinder(p);
    }
    if (m.generator == "patch_plate") {
      PatchPlateParams p;
      p.plate_len = to_si_length(m.plate_len);
      p.plate_t = to_si_length(m.plate_t);
      p.patch_d = to_si_length(m.patch_d);
      p.patch_t = to_si_length(m.patch_t);
      p.ring_w = to_si_length(m.ring_w);
      p.n_ring_layers = m.n_ring_layers;
      p.n_circ = m.plate_circ;
      p.n_rad = m.n_rad;
      p.n_core = m.n_core;
      p.grading = m.grading;
      p.geom_order = cfg.g;
      return gen_patch_plate(p);
    }
    if (m.generator == "block") {
      BlockParams p;
      p.nx = m.nx;
      p.ny = m.ny;
      p.nz = m.nz;
      p.distortion = m.distortion;
      p.shear = m.shear;
      p.seed = m.block_seed;
      return gen_hybrid_block(p);
    }
    return read_mesh_file(m.file);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("mesh", e.what());
  }
}

std::vector<MaterialLawCompliance> build_materials(const JobConfig& cfg, Mesh& mesh) {
  int max_id = -1;
  for (const auto& el : mesh.elements) max_id = std::max(max_id, el.material);
  std::vector<MaterialLawCompliance> out(max_id + 1);
  std::vector<bool> have(max_id + 1, false);
  for (std::size_t i = 0; i < cfg.materials.size(); ++i) {
    const MaterialConfig& m = cfg.materials[i];
    const std::string P = "materials[" + std::to_string(i) + "]";
    if (m.id < 0 || m.id > max_id) continue;
    MaterialLawStiffness law;
    try {
      if (m.preset == "pzt5h") {
        law = pzt5h();
      } else if (m.preset == "aluminium") {
        law = aluminium();
      } else if (m.isotropic) {
        law = isotropic_elastic(convert(m.young, stiffness_to_si), m.poisson, convert(m.density, density_to_si));
      } else {
        for (int r = 0; r < 6; ++r)
          for (int s = 0; s < 6; ++s) law.C(r, s) = stiffness_to_si(m.stiffness[6 * r + s], m.stiffness_unit);
        law.electric = !m.coupling.empty();
        if (law.electric) {
          for (int r = 0; r < 3; ++r)
            for (int s = 0; s < 6; ++s) law.e(r, s) = coupling_to_si(m.coupling[6 * r + s], m.coupling_unit);
          for (int r = 0; r < 3; ++r)
            for (int s = 0; s < 3; ++s)
              law.eps(r, s) = permittivity_to_si(m.permittivity[3 * r + s], m.permittivity_unit);
        }
        law.rho = convert(m.density, density_to_si);
      }
      validate(law);
      out[m.id] = invert_material(law);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(P, e.what());
    }
    have[m.id] = true;
    if (!m.frame.empty()) {
      Frame f;
      if (m.frame == "cylindrical_radial") {
        f.kind = Frame::Kind::cylindrical_radial;
        f.cx = m.axis_x;
        f.cy = m.axis_y;
      }
      mesh.frames.push_back(f);
      const int fid = static_cast<int>(mesh.frames.size()) - 1;
      for (auto& el : mesh.elements)
        if (el.material == m.id) el.frame = fid;
    }
  }
  for (int id = 0; id <= max_id; ++id)
    if (!have[id]) throw ConfigError("materials", "mesh uses material id " + std::to_string(id) + " which is not defined");
  return out;
}

BoundaryData build_boundary(const JobConfig& cfg, const Mesh& mesh) {
  std::set<int> electrodes;
  for (const auto& f : mesh.facets)
    if (f.elec == ElecTag::electrode) electrodes.insert(f.electrode);
  BoundaryData bc;
  for (const auto& [id, v] : cfg.boundary.electrodes) {
    if (!electrodes.count(id))
      throw ConfigError("boundary.electrodes." + std::to_string(id), "the mesh has no electrode with this id");
    bc.electrode_potential[id] = v;
  }
  if (!cfg.boundary.body_force.empty()) {
    const Vec3 f(cfg.boundary.body_force[0], cfg.boundary.body_force[1], cfg.boundary.body_force[2]);
    bc.body_force = [f](const Vec3&) { return f; };
  }
  if (cfg.boundary.surface_charge != 0.0) {
    const double q = cfg.boundary.surface_charge;
    bc.surface_charge = [q](const Vec3&, const Vec3&) { return q; };
  }
  for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
    const auto& name = cfg.probes[i].name;
    if (std::none_of(mesh.probes.begin(), mesh.probes.end(), [&](const Probe& p) { return p.name == name; }))
      throw ConfigError("probes[" + std::to_string(i) + "].name", "the mesh has no probe '" + name + "'");
  }
  return bc;
}

}  // namespace tdnns
