// Command line front end: static, eigen, convergence and export runs plus the
// verification suites. A JSON config file (--config) takes precedence over the
// individual flags; --preset selects a built-in job as the starting point.

#include "tdnns/drivers.hpp"
#include "tdnns/verify.hpp"
#include "tdnns/vtk.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>

using namespace tdnns;

namespace {

struct Flags {
  std::string config, preset;
  std::optional<int> p, p_phi, g, n_circ, n_len, k, max_it, threads, subdivision;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol, residual_tol;
  std::optional<std::string> circuit, mesh_file, report, json, vtk;
  bool no_condense = false;
};

void add_job_flags(CLI::App* app, Flags& f) {
  app->add_option("-c,--config", f.config, "JSON job file; its values take precedence over flags")
      ->check(CLI::ExistingFile);
  app->add_option("--preset", f.preset, "built-in job: semicylinder, patch_static, patch_eigen, convergence");
  app->add_option("-p,--order", f.p, "stress and displacement order")->check(CLI::PositiveNumber);
  app->add_option("--p-phi", f.p_phi, "potential order")->check(CLI::PositiveNumber);
  app->add_option("-g,--geometry-order", f.g, "geometry order")->check(CLI::PositiveNumber);
  app->add_option("--n-circ", f.n_circ, "circumferential elements")->check(CLI::PositiveNumber);
  app->add_option("--n-len", f.n_len, "elements along the semicylinder axis")->check(CLI::PositiveNumber);
  app->add_option("--mesh-file", f.mesh_file, "read the mesh from a file instead of a generator");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--threads", f.threads, "assembly workers, 0 = all cores")->check(CLI::NonNegativeNumber);
  app->add_flag("--no-condense", f.no_condense, "keep element-interior stress functions in the global system");
  app->add_option("--report", f.report, "text report path");
  app->add_option("--json", f.json, "machine-readable report path");
  app->add_option("--vtk", f.vtk, "VTK output path");
  app->add_option("--subdivision", f.subdivision, "VTK subdivision level")->check(CLI::PositiveNumber);
}

void add_eigen_flags(CLI::App* app, Flags& f) {
  app->add_option("-k,--modes", f.k, "number of eigenpairs")->check(CLI::PositiveNumber);
  app->add_option("--circuit", f.circuit, "SC, OC or both")->check(CLI::IsMember({"SC", "OC", "both"}));
  app->add_option("--tol", f.tol, "relative eigenvalue change");
  app->add_option("--residual-tol", f.residual_tol, "relative eigen residual");
  app->add_option("--max-it", f.max_it, "iteration limit")->check(CLI::PositiveNumber);
}

JobConfig make_config(const Flags& f, const std::string& default_preset) {
  JobConfig c = preset_config(f.preset.empty() ? default_preset : f.preset);
  if (f.p) c.p = *f.p;
  if (f.p_phi) c.p_phi = *f.p_phi;
  if (f.g) c.g = *f.g;
  if (f.n_circ) {
    c.mesh.n_circ = *f.n_circ;
    c.mesh.plate_circ = *f.n_circ;
  }
  if (f.n_len) c.mesh.n_len = *f.n_len;
  if (f.mesh_file) {
    c.mesh.generator = "file";
    c.mesh.file = *f.mesh_file;
  }
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  if (f.no_condense) c.condense = false;
  if (f.k) c.analysis.k = *f.k;
  if (f.circuit) c.analysis.circuit = *f.circuit;
  if (f.tol) c.analysis.tol = *f.tol;
  if (f.residual_tol) c.analysis.residual_tol = *f.residual_tol;
  if (f.max_it) c.analysis.max_it = *f.max_it;
  if (f.report) c.output.report = *f.report;
  if (f.json) c.output.json = *f.json;
  if (f.vtk) c.output.vtk = *f.vtk;
  if (f.subdivision) c.output.subdivision = *f.subdivision;
  if (!f.config.empty()) {
    JobConfig file = read_config_file(f.config);
    // output paths given only on the command line still apply
    if (file.output.report.empty()) file.output.report = c.output.report;
    if (file.output.json.empty()) file.output.json = c.output.json;
    if (file.output.vtk.empty()) file.output.vtk = c.output.vtk;
    c = file;
  }
  return c;
}

int emit(const Report& r) {
  std::cout << r.text;
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed finite elements for piezoelastic solids on curved prism and hexahedron meshes"};
  app.require_subcommand(1);
  Flags f;
  std::string level = "quick";
  int p_max = 3, elements = 50;

  auto* st = app.add_subcommand("static", "static solve with probe report");
  add_job_flags(st, f);
  auto* eig = app.add_subcommand("eigen", "smallest eigenfrequencies, short and/or open circuit");
  add_job_flags(eig, f);
  add_eigen_flags(eig, f);
  auto* conv = app.add_subcommand("convergence", "semicylinder convergence table");
  add_job_flags(conv, f);
  auto* exp = app.add_subcommand("export", "static solve written as VTK");
  add_job_flags(exp, f);
  auto* cfgcmd = app.add_subcommand("config", "print the resolved job as JSON");
  add_job_flags(cfgcmd, f);
  auto* ver = app.add_subcommand("verify", "run the verification suite");
  ver->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  ver->add_option("--seed", f.seed, "random seed");
  ver->add_option("--json", f.json, "machine-readable report path");
  auto* vb = app.add_subcommand("verify-basis", "shape function counts and trace checks per cell and order");
  vb->add_option("--p-max", p_max, "highest order")->check(CLI::PositiveNumber);
  auto* vt = app.add_subcommand("verify-transform", "finite-difference oracle of the transforms");
  vt->add_option("--elements", elements, "random curved elements")->check(CLI::PositiveNumber);
  vt->add_option("--seed", f.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_validation;
  }

  try {
    if (*st) return emit(run_static(make_config(f, "semicylinder")).report);
    if (*eig) {
      JobConfig c = make_config(f, "patch_eigen");
      c.analysis.kind = "eigen";
      return emit(run_eigen(c).report);
    }
    if (*conv) return emit(run_convergence(make_config(f, "convergence")).report);
    if (*exp) {
      JobConfig c = make_config(f, "semicylinder");
      if (c.output.vtk.empty()) throw ConfigError("output.vtk", "export needs --vtk or output.vtk");
      return emit(run_static(c).report);
    }
    if (*cfgcmd) {
      std::cout << serialize_config(make_config(f, "semicylinder"));
      return exit_ok;
    }
    if (*ver) {
      const Report r = run_verify_report(level, f.seed.value_or(1));
      if (f.json) {
        std::ofstream out(*f.json);
        out << r.json;
      }
      return emit(r);
    }
    if (*vb) {
      const VerifyReport r = verify_basis(p_max);
      print_checks(std::cout, r);
      return r.all_pass() ? exit_ok : exit_numerical;
    }
    if (*vt) {
      const VerifyReport r = verify_transform(elements, f.seed.value_or(1));
      print_checks(std::cout, r);
      return r.all_pass() ? exit_ok : exit_numerical;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  }
  return exit_ok;
}
