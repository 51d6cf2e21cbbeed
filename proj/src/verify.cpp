#include "tdnns/verify.hpp"

#include "tdnns/basis.hpp"
#include "tdnns/transform.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace tdnns {

namespace {

CheckResult make(const std::string& module, const std::string& name, double residual, double tol,
                 const std::string& detail = "") {
  return CheckResult{module, name, residual <= tol, residual, tol, detail};
}

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double s = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return s > 0.0 ? (a - b).cwiseAbs().maxCoeff() / s : 0.0;
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Eigen::Quaterniond q(n01(rng), n01(rng), n01(rng), n01(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// Reference points on a face: Gauss points of the face parametrisation.
std::vector<Vec3> face_points(const ReferenceCell& rc, int f, int n) {
  std::vector<Vec3> out;
  const auto& fv = rc.faces[f];
  if (fv.size() == 3) {
    const QuadRule q = gauss_triangle(n);
    for (const auto& pt : q.points)
      out.push_back(rc.vertices[fv[0]] + pt.x() * (rc.vertices[fv[1]] - rc.vertices[fv[0]]) +
                    pt.y() * (rc.vertices[fv[2]] - rc.vertices[fv[0]]));
  } else {
    const QuadRule q = gauss_quadrilateral(n);
    for (const auto& pt : q.points)
      out.push_back(rc.vertices[fv[0]] + pt.x() * (rc.vertices[fv[1]] - rc.vertices[fv[0]]) +
                    pt.y() * (rc.vertices[fv[3]] - rc.vertices[fv[0]]));
  }
  return out;
}

Vec3 random_interior(CellKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.15, 0.85);
  Vec3 xh(u(rng), u(rng), u(rng));
  if (kind == CellKind::prism) {
    std::uniform_real_distribution<double> t(0.1, 0.6);
    const double a = t(rng), b = t(rng) * (0.8 - a);
    xh.x() = a;
    xh.y() = b;
  }
  return xh;
}

// Smooth random distortion of the reference cell, interpolated at order g.
ElementMap random_curved_map(CellKind kind, int g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Mat3 A = Mat3::Identity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) A(i, j) += 0.25 * u(rng);
    const Vec3 shift(u(rng), u(rng), u(rng));
    Mat3 w;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) w(i, j) = 0.08 * u(rng);
    const Vec3 ph(u(rng), u(rng), u(rng));
    auto fn = [&](const Vec3& xh) {
      Vec3 x = A * xh + shift;
      for (int i = 0; i < 3; ++i)
        x[i] += w(i, 0) * std::sin(2.0 * xh.y() + ph[i]) + w(i, 1) * std::cos(1.5 * xh.z() - ph[i]) +
                w(i, 2) * xh.x() * xh.x();
      return x;
    };
    ElementMap map = ElementMap::interpolate(kind, g, fn);
    bool ok = A.determinant() > 0.3;
    for (const auto& xh : gauss_rule(kind, 5).points) ok = ok && map.eval(xh).J > 0.2;
    for (const auto& xh : lagrange_nodes(kind, 3)) ok = ok && map.eval(xh).J > 0.2;
    if (ok) return map;
  }
}

Vec3 inverse_map(const ElementMap& map, const Vec3& x, Vec3 xh) {
  for (int it = 0; it < 50; ++it) {
    const MapPoint mp = map.eval(xh);
    const Vec3 dx = mp.F.lu().solve(mp.x - x);
    xh -= dx;
    if (dx.norm() < 1e-15) break;
  }
  return xh;
}

Mesh single_element_mesh(const ElementMap& map) {
  Mesh m;
  const auto& rc = reference_cell(map.kind());
  const auto nodes = lagrange_nodes(map.kind(), map.order());
  for (const auto& v : rc.vertices) {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if ((nodes[i] - v).norm() < 1e-14) m.vertices.push_back(map.nodes()[i]);
  }
  Element el;
  el.kind = map.kind();
  for (int i = 0; i < rc.num_vertices(); ++i) el.vertices.push_back(i);
  m.elements.push_back(el);
  m.geometry_order = map.order();
  m.control_points = {map.nodes()};
  for (int f = 0; f < rc.num_faces(); ++f) m.facets.push_back({0, f, MechTag::free, ElecTag::charge_free, -1});
  m.finalize();
  return m;
}

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace

bool VerifyReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

void print_checks(std::ostream& os, const VerifyReport& r) {
  for (const auto& c : r.checks) {
    os << (c.pass ? "PASS " : "FAIL ") << std::left << std::setw(20) << c.module << std::setw(36) << c.name
       << std::right << std::scientific << std::setprecision(3) << " residual " << c.residual << " tol " << c.tol;
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
  }
  os << std::defaultfloat;
}

CheckResult check_material_roundtrip() {
  const MaterialLawStiffness st = pzt5h();
  const MaterialLawCompliance co = invert_material(st);
  const MaterialLawStiffness back = to_stiffness(co);
  const double err = std::max({rel(back.C, st.C), rel(back.e, st.e), rel(back.eps, st.eps),
                               rel(co.S * st.C, Mat6::Identity()),
                               rel(co.eps_sigma - co.d * st.e.transpose(), st.eps)});
  return make("tensor_core", "pzt5h inversion round trip", err, 1e-12);
}

CheckResult check_material_rotation(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const MaterialLawCompliance co = invert_material(pzt5h());
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const MaterialLawCompliance r = rotate_material(co, random_rotation(rng));
    const double s = Eigen::SelfAdjointEigenSolver<Mat6>(r.S).eigenvalues().minCoeff() /
                     Eigen::SelfAdjointEigenSolver<Mat6>(co.S).eigenvalues().minCoeff();
    const double e = Eigen::SelfAdjointEigenSolver<Mat3>(r.eps_sigma).eigenvalues().minCoeff() /
                     Eigen::SelfAdjointEigenSolver<Mat3>(co.eps_sigma).eigenvalues().minCoeff();
    worst = std::min({worst, s, e});
  }
  // residual: how far the smallest eigenvalue ratio falls below 1
  return make("tensor_core", "rotation keeps definiteness", std::max(0.0, 1.0 - worst), 1e-9);
}

std::vector<BasisTraceRow> basis_trace_rows(int p_max) {
  std::vector<BasisTraceRow> rows;
  std::vector<Dual3> v;
  for (CellKind cell : {CellKind::prism, CellKind::hexahedron}) {
    const auto& rc = reference_cell(cell);
    for (int p = 1; p <= p_max; ++p) {
      BasisTraceRow row;
      row.cell = cell;
      row.p = p;
      const ShapeCatalog& cs = catalog(FieldKind::tensor, cell, p);
      row.n_stress = cs.size();
      row.n_displacement = catalog(FieldKind::vector, cell, p).size();
      row.n_potential = catalog(FieldKind::scalar, cell, p).size();
      row.counts_ok = true;
      for (int f = 0; f < rc.num_faces(); ++f) {
        const int expected = rc.face_is_triangle(f) ? (p + 1) * (p + 2) / 2 : (p + 1) * (p + 1);
        if (static_cast<int>(cs.functions_on({EntityType::face, f}).size()) != expected) row.counts_ok = false;
      }
      for (int f = 0; f < rc.num_faces(); ++f) {
        const Vec3& n = rc.face_normals[f];
        for (const Vec3& xh : face_points(rc, f, p + 2)) {
          cs.evaluate(xh, v);
          for (int i = 0; i < cs.size(); ++i) {
            const EntityRef& owner = cs.info(i).entity;
            if (owner.type == EntityType::face && owner.index == f) continue;
            row.trace_residual = std::max(row.trace_residual, std::abs(n.dot(tensor_value(&v[6 * i]) * n)));
          }
        }
      }
      rows.push_back(row);
    }
  }
  return rows;
}

CheckResult check_basis(int p_max, double tol) {
  double worst = 0.0;
  std::string detail;
  bool counts = true;
  for (const auto& r : basis_trace_rows(p_max)) {
    if (r.trace_residual >= worst) {
      worst = r.trace_residual;
      detail = to_string(r.cell) + " p=" + std::to_string(r.p);
    }
    if (!r.counts_ok) {
      counts = false;
      detail = "face function count mismatch on " + to_string(r.cell) + " p=" + std::to_string(r.p);
    }
  }
  CheckResult c = make("reference_basis", "stress nn traces off their face", worst, tol, detail);
  c.pass = c.pass && counts;
  return c;
}

TransformOracle transform_oracle(int elements, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TransformOracle out;
  out.elements = elements;
  std::vector<Dual3> v;
  const double h = 1e-5;
  for (int el = 0; el < elements; ++el) {
    const CellKind kind = el % 2 ? CellKind::hexahedron : CellKind::prism;
    const int g = 1 + el % 3;
    const int p = 1 + (el / 2) % 3;
    const ElementMap map = random_curved_map(kind, g, rng);
    const ShapeCatalog& cu = catalog(FieldKind::vector, kind, p);
    const ShapeCatalog& cs = catalog(FieldKind::tensor, kind, p);
    const ShapeCatalog& cp = catalog(FieldKind::scalar, kind, p);
    const Eigen::VectorXd au = random_vector(cu.size(), rng), as = random_vector(cs.size(), rng),
                          ap = random_vector(cp.size(), rng);

    struct Fields {
      Vec3 u;
      Mat3 sigma;
      double phi;
    };
    auto fields_at_ref = [&](const Vec3& xh, Mat3* grad_u_ref, Vec3* div_ref, Vec3* grad_phi_ref, Vec3* uh_out,
                             Mat3* sh_out) {
      const PointGeometry pg = point_geometry(map.eval(xh));
      Vec3 uh = Vec3::Zero();
      Mat3 gu = Mat3::Zero();
      cu.evaluate(xh, v);
      for (int i = 0; i < cu.size(); ++i) {
        uh += au[i] * vector_value(&v[3 * i]);
        gu += au[i] * vector_gradient(&v[3 * i]);
      }
      Mat3 sh = Mat3::Zero();
      Vec3 dh = Vec3::Zero();
      cs.evaluate(xh, v);
      for (int i = 0; i < cs.size(); ++i) {
        sh += as[i] * tensor_value(&v[6 * i]);
        dh += as[i] * tensor_divergence(&v[6 * i]);
      }
      double ph = 0.0;
      Vec3 gp = Vec3::Zero();
      cp.evaluate(xh, v);
      for (int i = 0; i < cp.size(); ++i) {
        ph += ap[i] * v[i].v;
        gp += ap[i] * scalar_gradient(&v[i]);
      }
      if (grad_u_ref) *grad_u_ref = gu;
      if (div_ref) *div_ref = dh;
      if (grad_phi_ref) *grad_phi_ref = gp;
      if (uh_out) *uh_out = uh;
      if (sh_out) *sh_out = sh;
      return std::pair{pg, Fields{push_displacement(pg, uh), push_stress(pg, sh), ph}};
    };

    const Vec3 xh0 = random_interior(kind, rng);
    Mat3 gu_h, sh;
    Vec3 div_h, gp_h, uh;
    const auto [pg, f0] = fields_at_ref(xh0, &gu_h, &div_h, &gp_h, &uh, &sh);
    const Mat3 strain = physical_strain(pg, uh, gu_h);
    const Vec3 div = physical_divergence(pg, sh, div_h);
    const Vec3 grad_phi = push_gradient(pg, gp_h);

    Mat3 grad_fd;
    Vec3 div_fd = Vec3::Zero(), gphi_fd;
    for (int j = 0; j < 3; ++j) {
      Vec3 dx = Vec3::Zero();
      dx[j] = h;
      const Vec3 xp = inverse_map(map, pg.mp.x + dx, xh0);
      const Vec3 xm = inverse_map(map, pg.mp.x - dx, xh0);
      const Fields fp = fields_at_ref(xp, nullptr, nullptr, nullptr, nullptr, nullptr).second;
      const Fields fm = fields_at_ref(xm, nullptr, nullptr, nullptr, nullptr, nullptr).second;
      grad_fd.col(j) = (fp.u - fm.u) / (2 * h);
      div_fd += (fp.sigma.col(j) - fm.sigma.col(j)) / (2 * h);
      gphi_fd[j] = (fp.phi - fm.phi) / (2 * h);
    }
    const Mat3 strain_fd = 0.5 * (grad_fd + grad_fd.transpose());
    const double es = (strain - strain_fd).norm() / std::max(strain.norm(), 1e-300);
    const double ed = (div - div_fd).norm() / std::max(div.norm(), 1e-300);
    const double eg = (grad_phi - gphi_fd).norm() / std::max(grad_phi.norm(), 1e-300);

    const Mesh mesh = single_element_mesh(map);
    const DualityForms df = duality_forms(mesh, 0, p, default_quadrature(p, p, g) + 4);
    const double ef = rel(df.volume, df.divergence);

    if (std::max({es, ed, eg}) > std::max({out.strain_error, out.divergence_error, out.gradient_error}))
      out.worst_element = el;
    out.strain_error = std::max(out.strain_error, es);
    out.divergence_error = std::max(out.divergence_error, ed);
    out.gradient_error = std::max(out.gradient_error, eg);
    out.duality_error = std::max(out.duality_error, ef);
  }
  return out;
}

Mesh tagged_block(const BlockParams& p) {
  Mesh m = gen_hybrid_block(p);
  const Mat3 inv = p.affine.inverse();
  for (auto& t : m.facets) {
    const auto& rc = reference_cell(m.elements[t.element].kind);
    Vec3 c = Vec3::Zero();
    for (int v : rc.faces[t.local_face]) c += m.vertices[m.elements[t.element].vertices[v]];
    c = inv * (c / static_cast<double>(rc.faces[t.local_face].size()) - p.shift);
    const double s = c.x() - p.shear * c.y();
    if (std::abs(s) < 1e-9) {
      t.mech = MechTag::clamped;
      t.elec = ElecTag::electrode;
      t.electrode = 0;
    } else if (std::abs(s - 2.0) < 1e-9) {
      t.elec = ElecTag::electrode;
      t.electrode = 1;
    }
  }
  m.finalize();
  return m;
}

PatchTestResult patch_test(int p, int p_phi, bool condense, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  BlockParams bp;
  bp.nx = 2;
  bp.ny = 2;
  bp.nz = 1;
  bp.distortion = 0.4;
  bp.seed = static_cast<unsigned>(seed);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) bp.affine(i, j) += 0.2 * u(rng);
  bp.affine *= 1e-2;
  bp.shift = Vec3(u(rng), u(rng), u(rng)) * 1e-2;
  const Mesh m = tagged_block(bp);
  const MaterialLawCompliance mat = invert_material(pzt5h());

  Vec6 s0;
  for (int i = 0; i < 6; ++i) s0[i] = 1e6 * u(rng);
  const Vec3 E0 = 1e5 * Vec3(u(rng), u(rng), u(rng));
  const Mat3 eps = from_strain_voigt(mat.S * s0 + mat.d.transpose() * E0).to_matrix();
  const Mat3 sig = to_matrix_from_stress_voigt(s0);
  const Vec3 D0 = mat.d * s0 + mat.eps_sigma * E0;

  BoundaryData bc;
  bc.displacement = [eps](const Vec3& x) { return Vec3(eps * x); };
  bc.normal_displacement = [eps](const Vec3& x, const Vec3& n) { return n.dot(eps * x); };
  bc.normal_stress = [sig](const Vec3&, const Vec3& n) { return n.dot(sig * n); };
  bc.traction = [sig](const Vec3&, const Vec3& n) { return Vec3(sig * n); };
  bc.potential = [E0](const Vec3& x) { return -E0.dot(x); };
  bc.surface_charge = [D0](const Vec3&, const Vec3& n) { return D0.dot(n); };
  AssemblyOptions opt;
  opt.condense = condense;
  opt.threads = 1;
  const BlockSystem sys = assemble(m, {mat}, p, p_phi, bc, opt);
  const StaticResult r = solve_static(sys);

  PatchTestResult out;
  out.residual = r.residual;
  out.dofs = sys.size();
  const double Lref = 1e-2;
  for (int e = 0; e < m.num_elements(); ++e) {
    for (const Vec3& xh : gauss_rule(m.elements[e].kind, 2).points) {
      const FieldValues fv = eval_field(r.solution, e, xh);
      out.stress_error = std::max(out.stress_error, (fv.sigma - sig).norm() / sig.norm());
      out.displacement_error = std::max(out.displacement_error, (fv.u - eps * fv.x).norm() / (eps.norm() * Lref));
      out.potential_error = std::max(out.potential_error, std::abs(fv.phi + E0.dot(fv.x)) / (E0.norm() * Lref));
    }
  }
  return out;
}

DenseEquivalence dense_equivalence(int k, std::uint64_t seed) {
  BlockParams bp;
  bp.nx = 1;
  bp.ny = 1;
  bp.nz = 1;
  bp.affine *= 1e-2;
  const Mesh m = tagged_block(bp);
  BoundaryData bc;
  bc.electrode_potential = {{0, 0.0}, {1, 0.0}};
  AssemblyOptions opt;
  opt.condense = false;
  opt.threads = 1;
  const BlockSystem sys = assemble(m, {invert_material(pzt5h())}, 1, 2, bc, opt);
  DenseEquivalence out;
  out.dofs = sys.size();
  const DenseReduction dr = dense_reduction_check(sys, 500);
  out.cbar_min = dr.cbar_min_eigenvalue;
  EigenOptions eo;
  eo.k = k;
  eo.seed = seed;
  eo.tol = 1e-12;
  eo.residual_tol = 1e-10;
  const EigenResult er = eigen_smallest_k(sys, eo);
  out.converged = er.all_converged;
  out.iterated.resize(k);
  out.dense = dr.eigenvalues.head(k);
  for (int i = 0; i < k; ++i) {
    out.iterated[i] = er.pairs[i].lambda;
    out.max_rel_diff = std::max(out.max_rel_diff, std::abs(out.iterated[i] - out.dense[i]) / std::abs(out.dense[i]));
  }
  return out;
}

ContinuityResult continuity_check(bool inject_fault) {
  PatchPlateParams pp;
  pp.n_rad = 1;
  pp.n_core = 1;
  pp.geom_order = 2;
  const Mesh m = gen_patch_plate(pp);
  std::vector<bool> electric(m.num_elements());
  for (int e = 0; e < m.num_elements(); ++e) electric[e] = m.elements[e].material == 0;
  DofMap dm = build_dof_map(m, 2, 2, electric, true);
  ContinuityResult out;
  if (inject_fault) {
    const auto& topo = m.topology();
    for (std::size_t f = 0; f < topo.faces.size() && out.faulted_face < 0; ++f) {
      if (topo.face_elements[f].size() != 2) continue;
      const auto [e, lf] = topo.face_elements[f][1];
      for (auto& blk : dm.s.elem[e].blocks) {
        if (blk.entity.type == EntityType::face && blk.entity.index == lf && blk.global_start >= 0) {
          const int n = static_cast<int>(blk.local.size());
          blk.B = blk.identity ? Eigen::MatrixXd(-Eigen::MatrixXd::Identity(n, n)) : Eigen::MatrixXd(-blk.B);
          blk.identity = false;
          out.faulted_face = static_cast<int>(f);
          break;
        }
      }
    }
  }
  out.u = check_conformity(dm, FieldKind::vector);
  out.sigma = check_conformity(dm, FieldKind::tensor);
  out.phi = check_conformity(dm, FieldKind::scalar);
  return out;
}

VerifyReport verify_basis(int p_max) {
  VerifyReport r;
  for (const auto& row : basis_trace_rows(p_max)) {
    std::ostringstream name;
    name << to_string(row.cell) << " p=" << row.p << " counts " << row.n_stress << "/" << row.n_displacement << "/"
         << row.n_potential;
    CheckResult c = make("reference_basis", name.str(), row.trace_residual, 1e-12,
                         row.counts_ok ? "" : "face function count mismatch");
    c.pass = c.pass && row.counts_ok;
    r.checks.push_back(c);
  }
  return r;
}

VerifyReport verify_transform(int elements, std::uint64_t seed) {
  const TransformOracle t = transform_oracle(elements, seed);
  const std::string where = "worst element " + std::to_string(t.worst_element);
  VerifyReport r;
  r.checks.push_back(make("geometry_transform", "strain vs finite differences", t.strain_error, 1e-6, where));
  r.checks.push_back(make("geometry_transform", "divergence vs finite differences", t.divergence_error, 1e-6, where));
  r.checks.push_back(make("geometry_transform", "potential gradient vs differences", t.gradient_error, 1e-6, where));
  r.checks.push_back(make("assembly", "duality volume vs divergence form", t.duality_error, 1e-9));
  return r;
}

VerifyReport run_verify(const std::string& level, std::uint64_t seed) {
  if (level != "quick" && level != "full") throw std::invalid_argument("verify level must be quick or full");
  const bool full = level == "full";
  VerifyReport r;
  r.checks.push_back(check_material_roundtrip());
  r.checks.push_back(check_material_rotation(full ? 200 : 20, seed));
  r.checks.push_back(check_basis(full ? 3 : 2));
  for (auto& c : verify_transform(full ? 50 : 6, seed).checks) r.checks.push_back(c);

  for (int p = 1; p <= (full ? 2 : 1); ++p) {
    const PatchTestResult pt = patch_test(p, p + 1, true, seed);
    const std::string n = "patch test p=" + std::to_string(p);
    r.checks.push_back(make("solvers", n + " stress", pt.stress_error, 1e-10));
    r.checks.push_back(make("solvers", n + " displacement", pt.displacement_error, 1e-10));
    r.checks.push_back(make("solvers", n + " potential", pt.potential_error, 1e-10));
  }
  if (full) {
    const DenseEquivalence de = dense_equivalence(5, seed);
    CheckResult c = make("solvers", "iteration vs dense reduction", de.max_rel_diff, 1e-8,
                         std::to_string(de.dofs) + " dofs");
    c.pass = c.pass && de.converged && de.dofs <= 500;
    r.checks.push_back(c);
    CheckResult cb = make("solvers", "reduced compliance definite", de.cbar_min > 0.0 ? 0.0 : 1.0, 0.0);
    r.checks.push_back(cb);

    const ContinuityResult cr = continuity_check(false);
    for (const auto& [name, rep] : {std::pair{"u tangential", cr.u}, std::pair{"sigma normal-normal", cr.sigma},
                                    std::pair{"phi", cr.phi}})
      r.checks.push_back(make("mesh", std::string("continuity ") + name, rep.max_residual, 1e-10,
                              "face " + std::to_string(rep.face)));
    const ContinuityResult bad = continuity_check(true);
    const bool located = bad.sigma.face == bad.faulted_face && bad.sigma.max_residual > 1e-3;
    r.checks.push_back(make("mesh", "fault injection located", located ? 0.0 : 1.0, 0.0,
                            "face " + std::to_string(bad.sigma.face)));
  }
  return r;
}

}  // namespace tdnns
