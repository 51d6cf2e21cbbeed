#pragma once

// Benchmark drivers behind the CLI. Each returns a human-readable report and
// a JSON document; both start with the seed and contain no timings, so equal
// inputs give byte-identical output.

#include "tdnns/config.hpp"
#include "tdnns/solvers.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tdnns {

/// Exit codes of the command line tool.
enum ExitCode { exit_ok = 0, exit_validation = 1, exit_numerical = 2, exit_not_converged = 3 };

/// Relative difference (value - ref) / ref as "-0.597 %".
std::string format_percent(double value, double ref);

struct ProbeResult {
  std::string name, component;
  Vec3 u = Vec3::Zero();  // m
  double value = 0.0;     // selected component or magnitude, m
  std::optional<double> reference, comparison;  // m
};

struct Report {
  std::string text;
  std::string json;
  int exit_code = exit_ok;
};

struct StaticRun {
  Report report;
  int dofs = 0;
  double residual = 0.0;
  std::vector<ProbeResult> probes;
};

/// Mesh, materials and boundary data of a job, assembled and kept alive together.
struct Problem {
  Mesh mesh;
  std::vector<MaterialLawCompliance> materials;
  BoundaryData bc;
};
Problem build_problem(const JobConfig& cfg);

/// Solves, evaluates the probes, writes report files and the VTK export if configured.
StaticRun run_static(const JobConfig& cfg);

struct EigenRow {
  double f_sc = 0.0, f_oc = 0.0;  // Hz, 0 if not computed
  bool sc_converged = true, oc_converged = true;
  std::optional<double> reference;  // Hz
};

struct EigenRun {
  Report report;
  int dofs_sc = 0, dofs_oc = 0;
  std::vector<EigenRow> modes;
};

/// SC grounds every configured electrode; OC keeps the lowest id grounded and
/// lets the others float.
EigenRun run_eigen(const JobConfig& cfg);

struct ConvergenceEntry {
  double h = 0.0;  // m
  int k = 1;
  int dofs = 0;
  double value = 0.0;  // probe value, m
  double delta = 0.0;  // (value - ref) / ref
};

struct ConvergenceRun {
  Report report;
  std::vector<ConvergenceEntry> rows;
};

/// Semicylinder rows with p = k, p_phi = k + 1; the first probe is the target.
ConvergenceRun run_convergence(const JobConfig& cfg);

/// Verification suite report.
Report run_verify_report(const std::string& level, std::uint64_t seed);

}  // namespace tdnns
