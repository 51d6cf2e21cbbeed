#include "tdnns/drivers.hpp"

#include "tdnns/verify.hpp"
#include "tdnns/vtk.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace tdnns {

using nlohmann::json;

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
}

void write_outputs(const JobConfig& cfg, const Report& r) {
  write_text(cfg.output.report, r.text);
  write_text(cfg.output.json, r.json);
}

std::string header(const JobConfig& cfg, const std::string& analysis) {
  std::ostringstream os;
  os << "analysis " << analysis << "\n";
  os << "seed " << cfg.seed << "\n";
  os << "mesh " << cfg.mesh.generator << ", orders p=" << cfg.p << " p_phi=" << cfg.p_phi << " g=" << cfg.g << "\n";
  return os.str();
}

double component(const Vec3& u, const std::string& c) {
  if (c == "x") return u.x();
  if (c == "y") return u.y();
  if (c == "z") return u.z();
  return u.norm();
}

AssemblyOptions assembly_options(const JobConfig& cfg) {
  AssemblyOptions o;
  o.condense = cfg.condense;
  o.threads = cfg.threads;
  return o;
}

std::vector<ProbeResult> evaluate_probes(const JobConfig& cfg, const Mesh& mesh, const Solution& sol) {
  std::vector<ProbeResult> out;
  for (const auto& pc : cfg.probes) {
    ProbeResult r;
    r.name = pc.name;
    r.component = pc.component;
    r.u = displacement_at(sol, mesh.probe(pc.name).x);
    r.value = component(r.u, pc.component);
    if (pc.reference) r.reference = to_si_length(*pc.reference);
    if (pc.comparison) r.comparison = to_si_length(*pc.comparison);
    out.push_back(r);
  }
  return out;
}

std::string mode_label(const std::string& circuit) { return circuit == "SC" ? "short circuit" : "open circuit"; }

}  // namespace

std::string format_percent(double value, double ref) { return fmt("%.3f %%", 100.0 * (value - ref) / ref); }

Problem build_problem(const JobConfig& cfg) {
  Problem p;
  p.mesh = build_mesh(cfg);
  p.materials = build_materials(cfg, p.mesh);
  p.bc = build_boundary(cfg, p.mesh);
  return p;
}

StaticRun run_static(const JobConfig& cfg) {
  const Problem pb = build_problem(cfg);
  const BlockSystem sys = assemble(pb.mesh, pb.materials, cfg.p, cfg.p_phi, pb.bc, assembly_options(cfg));
  const StaticResult res = solve_static(sys);
  StaticRun run;
  run.dofs = sys.dofs.size();
  run.residual = res.residual;
  run.probes = evaluate_probes(cfg, pb.mesh, res.solution);

  std::ostringstream os;
  os << header(cfg, "static");
  os << "elements " << pb.mesh.num_elements() << ", dofs " << run.dofs << " (u " << sys.dofs.u.count << ", sigma "
     << sys.dofs.s.count << ", phi " << sys.dofs.phi.count << "), free " << sys.size() << "\n";
  os << "relative residual " << fmt("%.3e", res.residual) << "\n";
  json j{{"analysis", "static"},
         {"seed", cfg.seed},
         {"elements", pb.mesh.num_elements()},
         {"dofs", run.dofs},
         {"free_dofs", sys.size()},
         {"residual", res.residual}};
  json probes = json::array();
  for (const auto& p : run.probes) {
    os << "probe " << p.name << " (" << p.component << ") u = (" << fmt("%.6f", p.u.x() * 1e6) << ", "
       << fmt("%.6f", p.u.y() * 1e6) << ", " << fmt("%.6f", p.u.z() * 1e6) << ") um, value " << fmt("%.6f", p.value * 1e6)
       << " um\n";
    json pj{{"name", p.name},
            {"component", p.component},
            {"u_um", {p.u.x() * 1e6, p.u.y() * 1e6, p.u.z() * 1e6}},
            {"value_um", p.value * 1e6}};
    if (p.reference) {
      os << "  reference " << fmt("%.6f", *p.reference * 1e6) << " um, relative difference "
         << format_percent(p.value, *p.reference) << "\n";
      pj["reference_um"] = *p.reference * 1e6;
      pj["delta_rel"] = (p.value - *p.reference) / *p.reference;
    }
    if (p.comparison) {
      os << "  comparison " << fmt("%.6f", *p.comparison * 1e6) << " um, relative difference "
         << format_percent(p.value, *p.comparison) << "\n";
      pj["comparison_um"] = *p.comparison * 1e6;
      pj["delta_rel_comparison"] = (p.value - *p.comparison) / *p.comparison;
      if (p.reference)
        os << "  comparison vs reference " << format_percent(*p.comparison, *p.reference) << "\n";
    }
    probes.push_back(pj);
  }
  j["probes"] = probes;
  run.report.text = os.str();
  run.report.json = j.dump(2) + "\n";
  write_outputs(cfg, run.report);
  if (!cfg.output.vtk.empty()) write_vtk_file(cfg.output.vtk, res.solution, cfg.output.subdivision);
  return run;
}

EigenRun run_eigen(const JobConfig& cfg) {
  if (cfg.boundary.electrodes.empty() && cfg.analysis.circuit != "SC")
    throw ConfigError("boundary.electrodes", "open circuit needs at least one grounded electrode");
  const Problem pb = build_problem(cfg);
  EigenRun run;
  const int k = cfg.analysis.k;
  run.modes.assign(k, EigenRow{});
  for (int i = 0; i < k && i < static_cast<int>(cfg.analysis.reference_khz.size()); ++i)
    run.modes[i].reference = cfg.analysis.reference_khz[i] * 1e3;

  std::vector<std::string> circuits;
  if (cfg.analysis.circuit == "both")
    circuits = {"SC", "OC"};
  else
    circuits = {cfg.analysis.circuit};

  EigenOptions eo;
  eo.k = k;
  eo.tol = cfg.analysis.tol;
  eo.residual_tol = cfg.analysis.residual_tol;
  eo.max_it = cfg.analysis.max_it;
  eo.seed = cfg.seed;

  json j{{"analysis", "eigen"}, {"seed", cfg.seed}, {"k", k}, {"elements", pb.mesh.num_elements()}};
  std::ostringstream detail;
  bool all_converged = true;
  for (const auto& circuit : circuits) {
    BoundaryData bc = pb.bc;
    bc.body_force = nullptr;
    bc.surface_charge = nullptr;
    bc.electrode_potential.clear();
    for (const auto& [id, v] : cfg.boundary.electrodes) {
      (void)v;
      bc.electrode_potential[id] = 0.0;
      if (circuit == "OC") break;
    }
    const BlockSystem sys = assemble(pb.mesh, pb.materials, cfg.p, cfg.p_phi, bc, assembly_options(cfg));
    const EigenResult er = eigen_smallest_k(sys, eo);
    all_converged = all_converged && er.all_converged;
    (circuit == "SC" ? run.dofs_sc : run.dofs_oc) = sys.size();
    detail << mode_label(circuit) << ": free dofs " << sys.size() << ", grounded electrodes";
    for (const auto& [id, v] : bc.electrode_potential) detail << " " << id;
    detail << "\n";
    json modes = json::array();
    for (int i = 0; i < k; ++i) {
      const EigenPair& p = er.pairs[i];
      if (circuit == "SC") {
        run.modes[i].f_sc = p.frequency;
        run.modes[i].sc_converged = p.converged;
      } else {
        run.modes[i].f_oc = p.frequency;
        run.modes[i].oc_converged = p.converged;
      }
      detail << "  mode " << i + 1 << "  f = " << fmt("%.5f", p.frequency / 1e3) << " kHz  residual "
             << fmt("%.2e", p.residual) << "  iterations " << p.iterations << (p.converged ? "" : "  NOT CONVERGED")
             << "\n";
      modes.push_back(json{{"mode", i + 1},
                           {"frequency_hz", p.frequency},
                           {"lambda", p.lambda},
                           {"residual", p.residual},
                           {"iterations", p.iterations},
                           {"converged", p.converged}});
    }
    j[circuit] = json{{"free_dofs", sys.size()}, {"modes", modes}};
  }

  std::ostringstream os;
  os << header(cfg, "eigen");
  os << detail.str();
  const bool sc = cfg.analysis.circuit != "OC", oc = cfg.analysis.circuit != "SC";
  os << "\n mode";
  if (oc) os << "   f_OC [kHz]";
  if (sc) os << "   f_SC [kHz]";
  os << "  f_ref [kHz]   df_ref/f_SC";
  if (sc && oc) os << "   f_OC >= f_SC";
  os << "\n";
  json table = json::array();
  for (int i = 0; i < k; ++i) {
    const EigenRow& r = run.modes[i];
    os << std::setw(5) << i + 1;
    json row{{"mode", i + 1}};
    if (oc) {
      os << std::setw(13) << fmt("%.4f", r.f_oc / 1e3);
      row["f_oc_khz"] = r.f_oc / 1e3;
    }
    if (sc) {
      os << std::setw(13) << fmt("%.4f", r.f_sc / 1e3);
      row["f_sc_khz"] = r.f_sc / 1e3;
    }
    const double fbase = sc ? r.f_sc : r.f_oc;
    if (r.reference) {
      os << std::setw(13) << fmt("%.4f", *r.reference / 1e3) << std::setw(14)
         << fmt("%.4f", *r.reference / fbase - 1.0);
      row["f_ref_khz"] = *r.reference / 1e3;
      row["delta_f"] = *r.reference / fbase - 1.0;
    } else {
      os << std::setw(13) << "-" << std::setw(14) << "-";
    }
    if (sc && oc) {
      os << std::setw(15) << (r.f_oc >= r.f_sc ? "yes" : "no");
      row["oc_above_sc"] = r.f_oc >= r.f_sc;
    }
    os << "\n";
    table.push_back(row);
  }
  j["table"] = table;
  j["all_converged"] = all_converged;
  if (!all_converged) os << "warning: some modes did not converge\n";
  run.report.text = os.str();
  run.report.json = j.dump(2) + "\n";
  run.report.exit_code = all_converged ? exit_ok : exit_not_converged;
  write_outputs(cfg, run.report);
  return run;
}

ConvergenceRun run_convergence(const JobConfig& cfg) {
  if (cfg.analysis.rows.empty()) throw ConfigError("analysis.rows", "required for a convergence study");
  if (cfg.probes.empty()) throw ConfigError("probes", "a convergence study needs a probe");
  const ProbeConfig& probe = cfg.probes.front();
  if (!probe.reference) throw ConfigError("probes[0].reference", "required for a convergence study");
  const double ref = to_si_length(*probe.reference);
  ConvergenceRun run;
  for (const auto& row : cfg.analysis.rows) {
    JobConfig c = cfg;
    c.mesh.n_circ = row.n_circ;
    c.mesh.n_len = row.n_len;
    c.p = row.k;
    c.p_phi = row.k + 1;
    c.probes = {probe};
    c.output = OutputConfig{};
    const StaticRun s = run_static(c);
    ConvergenceEntry e;
    e.h = to_si_length(row.h);
    e.k = row.k;
    e.dofs = s.dofs;
    e.value = s.probes.front().value;
    e.delta = (e.value - ref) / ref;
    run.rows.push_back(e);
  }

  std::set<double> hs;
  std::set<int> ks;
  for (const auto& e : run.rows) {
    hs.insert(-e.h);
    ks.insert(e.k);
  }
  std::ostringstream os;
  os << header(cfg, "convergence");
  os << "probe " << probe.name << " (" << probe.component << "), reference " << fmt("%.5f", ref * 1e6) << " um\n\n";
  os << "  h [mm]";
  for (int k : ks) os << "  k=" << k << ": dofs      delta_rel";
  os << "\n";
  for (double mh : hs) {
    os << std::setw(8) << fmt("%.2f", -mh * 1e3);
    for (int k : ks) {
      const ConvergenceEntry* found = nullptr;
      for (const auto& e : run.rows)
        if (e.h == -mh && e.k == k) found = &e;
      if (found)
        os << std::setw(13) << found->dofs << std::setw(15) << fmt("%.3e", found->delta);
      else
        os << std::setw(13) << "-" << std::setw(15) << "-";
    }
    os << "\n";
  }
  json rows = json::array();
  for (const auto& e : run.rows)
    rows.push_back(
        json{{"h_mm", e.h * 1e3}, {"k", e.k}, {"dofs", e.dofs}, {"value_um", e.value * 1e6}, {"delta_rel", e.delta}});
  json j{{"analysis", "convergence"}, {"seed", cfg.seed}, {"reference_um", ref * 1e6}, {"rows", rows}};
  run.report.text = os.str();
  run.report.json = j.dump(2) + "\n";
  write_outputs(cfg, run.report);
  return run;
}

Report run_verify_report(const std::string& level, std::uint64_t seed) {
  const VerifyReport v = run_verify(level, seed);
  std::ostringstream os;
  os << "analysis verify (" << level << ")\nseed " << seed << "\n";
  print_checks(os, v);
  os << (v.all_pass() ? "all checks passed\n" : "verification FAILED\n");
  json checks = json::array();
  for (const auto& c : v.checks)
    checks.push_back(json{{"module", c.module},
                          {"name", c.name},
                          {"pass", c.pass},
                          {"residual", c.residual},
                          {"tol", c.tol},
                          {"detail", c.detail}});
  Report r;
  r.text = os.str();
  r.json = json{{"analysis", "verify"}, {"level", level}, {"seed", seed}, {"checks", checks}}.dump(2) + "\n";
  r.exit_code = v.all_pass() ? exit_ok : exit_numerical;
  return r;
}

}  // namespace tdnns
