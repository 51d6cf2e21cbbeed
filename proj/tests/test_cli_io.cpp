#include "doctest.h"
#include "generators.hpp"

#include "tdnns/drivers.hpp"
#include "tdnns/verify.hpp"
#include "tdnns/vtk.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace tdnns;
namespace tg = tdnns::testgen;

namespace {

int randint(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(tg::rng()); }

template <class T>
const T& pick(const std::vector<T>& v) {
  return v[randint(0, static_cast<int>(v.size()) - 1)];
}

Quantity random_quantity(const std::vector<std::string>& units) {
  return {tg::uniform(0.1, 50.0), pick(units)};
}

JobConfig random_config() {
  JobConfig c;
  c.seed = static_cast<std::uint64_t>(randint(0, 1 << 30));
  c.threads = randint(0, 8);
  c.condense = randint(0, 1) == 1;
  c.p = randint(1, 4);
  c.p_phi = randint(1, 5);
  c.g = randint(1, 3);
  c.mesh.generator = pick<std::string>({"semicylinder", "patch_plate", "block", "file"});
  if (c.mesh.generator == "semicylinder") {
    c.mesh.r = random_quantity({"mm", "m", ""});
    c.mesh.t = random_quantity({"mm", "um"});
    c.mesh.n_circ = randint(1, 40);
    c.mesh.n_len = randint(1, 5);
  } else if (c.mesh.generator == "patch_plate") {
    c.mesh.patch_d = random_quantity({"mm"});
    c.mesh.plate_circ = randint(2, 12);
    c.mesh.n_rad = randint(1, 6);
    c.mesh.grading = tg::uniform(1.0, 3.0);
  } else if (c.mesh.generator == "block") {
    c.mesh.nx = randint(1, 4);
    c.mesh.distortion = tg::uniform(0.0, 0.4);
    c.mesh.block_seed = static_cast<unsigned>(randint(0, 1000));
  } else {
    c.mesh.file = "meshes/m" + std::to_string(randint(0, 99)) + ".mesh";
  }
  const int nmat = randint(1, 3);
  for (int i = 0; i < nmat; ++i) {
    MaterialConfig m;
    m.id = i;
    switch (randint(0, 2)) {
      case 0:
        m.preset = pick<std::string>({"pzt5h", "aluminium"});
        break;
      case 1:
        m.isotropic = true;
        m.young = random_quantity({"GPa"});
        m.poisson = tg::uniform(0.0, 0.45);
        m.density = random_quantity({"kg/m^3"});
        break;
      default:
        m.stiffness.assign(36, 0.0);
        for (int r = 0; r < 6; ++r)
          for (int s = r; s < 6; ++s) m.stiffness[6 * r + s] = m.stiffness[6 * s + r] = tg::uniform(1.0, 100.0);
        m.coupling.resize(18);
        for (double& x : m.coupling) x = tg::uniform(-20.0, 20.0);
        m.permittivity = {1e-8, 0, 0, 0, 1e-8, 0, 0, 0, 2e-8};
        m.density = random_quantity({"kg/m^3"});
    }
    if (randint(0, 1)) m.frame = pick<std::string>({"global", "cylindrical_radial"});
    c.materials.push_back(m);
  }
  for (int e = 0; e < randint(0, 3); ++e) c.boundary.electrodes.emplace_back(e, tg::uniform(-200.0, 200.0));
  if (randint(0, 1)) c.boundary.body_force = {tg::uniform(-1, 1), tg::uniform(-1, 1), tg::uniform(-1, 1)};
  c.analysis.kind = pick<std::string>({"static", "eigen", "convergence", "verify"});
  c.analysis.k = randint(1, 8);
  c.analysis.circuit = pick<std::string>({"SC", "OC", "both"});
  c.analysis.tol = tg::uniform(1e-12, 1e-6);
  c.analysis.max_it = randint(1, 5000);
  for (int i = 0; i < randint(0, 3); ++i) c.analysis.reference_khz.push_back(tg::uniform(0.1, 20.0));
  for (int i = 0; i < randint(c.analysis.kind == "convergence" ? 1 : 0, 4); ++i) {
    ConvergenceRow row;
    row.h = random_quantity({"mm"});
    row.n_circ = randint(1, 40);
    row.n_len = randint(1, 4);
    row.k = randint(1, 3);
    c.analysis.rows.push_back(row);
  }
  c.analysis.level = pick<std::string>({"quick", "full"});
  for (int i = 0; i < randint(0, 2); ++i) {
    ProbeConfig p;
    p.name = pick<std::string>({"tip", "corner"});
    p.component = pick<std::string>({"magnitude", "x", "y", "z"});
    if (randint(0, 1)) p.reference = random_quantity({"um", "mm", ""});
    if (randint(0, 1)) p.comparison = random_quantity({"um"});
    c.probes.push_back(p);
  }
  c.output.report = randint(0, 1) ? "out/report.txt" : "";
  c.output.vtk = randint(0, 1) ? "out/fields.vtk" : "";
  c.output.subdivision = randint(1, 5);
  return c;
}

std::string parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

JobConfig small_semicylinder() {
  JobConfig c = preset_config("semicylinder");
  c.mesh.n_circ = 4;
  c.mesh.n_len = 1;
  c.p = 1;
  c.p_phi = 2;
  c.g = 2;
  c.threads = 1;
  return c;
}

// Displacements of a legacy VTK file keyed by element and point coordinates;
// every element of `kinds` contributes its own subdivision points.
std::map<std::tuple<int, double, double, double>, Vec3> vtk_displacements(const std::string& text,
                                                                         const std::vector<CellKind>& kinds, int n) {
  std::istringstream in(text);
  std::string tok;
  std::vector<Vec3> pts, u;
  while (in >> tok) {
    if (tok == "POINTS") {
      int np;
      in >> np >> tok;
      pts.resize(np);
      for (auto& p : pts) in >> p[0] >> p[1] >> p[2];
    } else if (tok == "VECTORS") {
      in >> tok;
      const bool is_u = tok == "u";
      in >> tok;
      std::vector<Vec3> v(pts.size());
      for (auto& p : v) in >> p[0] >> p[1] >> p[2];
      if (is_u) u = v;
    }
  }
  std::map<std::tuple<int, double, double, double>, Vec3> out;
  std::size_t i = 0;
  for (int e = 0; e < static_cast<int>(kinds.size()); ++e) {
    const int count = kinds[e] == CellKind::hexahedron ? (n + 1) * (n + 1) * (n + 1) : (n + 1) * (n + 1) * (n + 2) / 2;
    for (int k = 0; k < count; ++k, ++i) out[{e, pts[i][0], pts[i][1], pts[i][2]}] = u[i];
  }
  REQUIRE(i == pts.size());
  return out;
}

}  // namespace

TEST_CASE("config round trip is a fixed point") {
  for (int trial = 0; trial < 200; ++trial) {
    const JobConfig c = random_config();
    const std::string s1 = serialize_config(c);
    const JobConfig c1 = parse_config(s1);
    CHECK(c1 == c);
    CHECK(c1.mesh == c.mesh);
    CHECK(c1.materials == c.materials);
    CHECK(c1.boundary == c.boundary);
    CHECK(c1.analysis == c.analysis);
    CHECK(c1.probes == c.probes);
    CHECK(c1.output == c.output);
    CHECK(serialize_config(c1) == s1);
  }
  for (const char* name : {"semicylinder", "patch_static", "patch_eigen", "convergence"}) {
    const JobConfig c = preset_config(name);
    CHECK(parse_config(serialize_config(c)) == c);
  }
}

TEST_CASE("config errors name the field or the position") {
  const std::string base = serialize_config(preset_config("semicylinder"));
  CHECK(parse_error(R"({"mesh": {"generator": "semicylinder"}, "materials": [{"id": 0, "preset": "pzt5h"}], "colour": 1})")
            .find("config colour: unknown field") != std::string::npos);
  CHECK(parse_error(R"({"mesh": {"generator": "semicylinder"}, "materials": [{"id": 0, "preset": "pzt5h"}, {"id": 1, "isotropic": {"young": 70}}]})")
            .find("materials[1]") != std::string::npos);
  CHECK(parse_error(R"({"mesh": {"generator": "semicylinder", "n_circ": 2.5}, "materials": [{"id": 0, "preset": "pzt5h"}]})") ==
        "config mesh.n_circ: expected an integer");
  CHECK(parse_error(R"({"mesh": {"generator": "cone"}, "materials": [{"id": 0, "preset": "pzt5h"}]})")
            .find("config mesh.generator") == 0);
  CHECK(parse_error("{\n  \"seed\": 1,\n  \"mesh\": {\"generator\" \"semicylinder\"}\n}").find("line 3, column ") !=
        std::string::npos);
  CHECK(parse_error(R"({"mesh": {"generator": "semicylinder", "r": {"value": 15, "unit": "furlong"}}, "materials": [{"id": 0, "preset": "pzt5h"}]})")
            .find("mesh.r.unit") != std::string::npos);
  CHECK(parse_error(R"({"mesh": {"generator": "semicylinder"}, "materials": [{"id": 0, "preset": "pzt5h"}], "orders": {"p": 0}})") ==
        "config orders.p: must be at least 1");
  CHECK_THROWS_AS(read_config_file("/nonexistent/job.json"), ConfigError);

  JobConfig c = small_semicylinder();
  c.boundary.electrodes.emplace_back(7, 1.0);
  CHECK_THROWS_WITH_AS(build_problem(c), doctest::Contains("boundary.electrodes.7"), ConfigError);
  c = small_semicylinder();
  c.probes[0].name = "nowhere";
  CHECK_THROWS_AS(build_problem(c), ConfigError);
}

TEST_CASE("relative difference formatting") {
  CHECK(format_percent(-6.03698, -6.07325) == "-0.597 %");
  CHECK(format_percent(1.0, 1.0) == "0.000 %");
  CHECK(format_percent(2.80473, 2.75525) == "1.796 %");
}

TEST_CASE("zero drive gives zero displacement") {
  JobConfig c = small_semicylinder();
  c.boundary.electrodes = {{0, 0.0}, {1, 0.0}};
  const StaticRun r = run_static(c);
  REQUIRE(r.probes.size() == 1);
  CHECK(r.probes[0].value == 0.0);
  CHECK(r.report.exit_code == exit_ok);
}

TEST_CASE("static reports are deterministic and carry the seed") {
  JobConfig c = small_semicylinder();
  c.seed = 1234;
  const StaticRun a = run_static(c);
  c.threads = 3;
  const StaticRun b = run_static(c);
  CHECK(a.report.text == b.report.text);
  CHECK(a.report.json == b.report.json);
  CHECK(a.report.text.find("seed 1234") != std::string::npos);
  CHECK(a.report.json.find("\"seed\": 1234") != std::string::npos);
  CHECK(a.report.text.find("tip") != std::string::npos);
  CHECK(a.probes[0].value > 0.0);
}

TEST_CASE("a single convergence row equals the static run") {
  JobConfig c = preset_config("convergence");
  c.analysis.rows.resize(1);
  c.threads = 1;
  const ConvergenceRun conv = run_convergence(c);
  REQUIRE(conv.rows.size() == 1);
  JobConfig s = preset_config("semicylinder");
  s.mesh.n_circ = c.analysis.rows[0].n_circ;
  s.mesh.n_len = c.analysis.rows[0].n_len;
  s.p = c.analysis.rows[0].k;
  s.p_phi = s.p + 1;
  s.g = c.g;
  s.threads = 1;
  const StaticRun st = run_static(s);
  CHECK(conv.rows[0].value == st.probes[0].value);
  CHECK(conv.rows[0].dofs == st.dofs);
}

TEST_CASE("eigen run on a clamped block matches the dense reduction") {
  BlockParams bp;
  bp.nx = 1;
  bp.ny = 1;
  bp.nz = 1;
  bp.affine *= 1e-2;
  const Mesh m = tagged_block(bp);
  const std::string path = (std::filesystem::temp_directory_path() / "tdnns_test_block.mesh").string();
  write_mesh_file(path, m);
  JobConfig c = preset_config("patch_eigen");
  c.mesh = MeshConfig{};
  c.mesh.generator = "file";
  c.mesh.file = path;
  c.materials = {MaterialConfig{}};
  c.materials[0].preset = "pzt5h";
  c.p = 1;
  c.p_phi = 2;
  c.g = 1;
  c.analysis.k = 1;
  c.analysis.circuit = "SC";
  c.analysis.reference_khz.clear();
  c.boundary.electrodes = {{0, 0.0}};
  const EigenRun er = run_eigen(c);
  REQUIRE(er.modes.size() == 1);
  CHECK(er.report.exit_code == exit_ok);

  Problem pr = build_problem(c);
  AssemblyOptions opt;
  opt.condense = false;
  const BlockSystem sys = assemble(pr.mesh, pr.materials, c.p, c.p_phi, pr.bc, opt);
  const DenseReduction dr = dense_reduction_check(sys);
  CHECK(er.modes[0].f_sc == doctest::Approx(frequency_from_lambda(dr.eigenvalues[0])).epsilon(1e-8));

  c.analysis.max_it = 1;
  c.analysis.tol = 1e-16;
  CHECK(run_eigen(c).report.exit_code == exit_not_converged);
  std::remove(path.c_str());
}

TEST_CASE("vtk export") {
  JobConfig c = small_semicylinder();
  Problem pr = build_problem(c);
  const BlockSystem sys = assemble(pr.mesh, pr.materials, c.p, c.p_phi, pr.bc);
  const StaticResult r = solve_static(sys);

  std::ostringstream s2, s3;
  write_vtk(s2, r.solution, 2);
  write_vtk(s3, r.solution, 3);
  CHECK(s2.str().rfind("# vtk DataFile Version 3.0\n", 0) == 0);
  CHECK(s2.str().find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(s2.str().find("SCALARS S11 double 1") != std::string::npos);
  std::vector<CellKind> kinds;
  for (const auto& el : pr.mesh.elements) kinds.push_back(el.kind);
  const auto u2 = vtk_displacements(s2.str(), kinds, 2), u3 = vtk_displacements(s3.str(), kinds, 3);
  int shared = 0;
  for (const auto& [x, u] : u2) {
    const auto it = u3.find(x);
    if (it == u3.end()) continue;
    ++shared;
    CHECK(it->second == u);
  }
  CHECK(shared >= 6 * pr.mesh.num_elements());

  Solution zero = r.solution;
  zero.x.setZero();
  for (auto& v : zero.sigma_interior) v.setZero();
  std::ostringstream sz;
  write_vtk(sz, zero, 1);
  const std::string t = sz.str();
  std::istringstream in(t.substr(t.find("POINT_DATA")));
  std::string tok;
  int numbers = 0;
  bool nonzero = false;
  while (in >> tok) {
    if (tok == "LOOKUP_TABLE") {
      in >> tok;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(tok[0])) || tok == "POINT_DATA") continue;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (*end != '\0') continue;
    ++numbers;
    nonzero = nonzero || (v != 0.0 && tok.find_first_not_of("0123456789") != std::string::npos);
  }
  CHECK(numbers > 0);
  CHECK_FALSE(nonzero);
  CHECK_THROWS_AS(write_vtk_file("/nonexistent/dir/out.vtk", r.solution, 1), std::runtime_error);
  CHECK_THROWS_AS(write_vtk(sz, r.solution, 0), std::invalid_argument);
}

TEST_CASE("verification suite") {
  const VerifyReport q = run_verify("quick", 1);
  CHECK(q.all_pass());
  CHECK_FALSE(q.checks.empty());
  const ContinuityResult clean = continuity_check(false);
  CHECK(clean.sigma.max_residual < 1e-9);
  const ContinuityResult bad = continuity_check(true);
  CHECK(bad.sigma.max_residual > 1e-3);
  CHECK(bad.sigma.face == bad.faulted_face);
  const Report rep = run_verify_report("quick", 7);
  CHECK(rep.exit_code == exit_ok);
  CHECK(rep.text.find("seed 7") != std::string::npos);
}
