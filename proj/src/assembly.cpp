#include "tdnns/assembly.hpp"

#include "tdnns/quadrature.hpp"
#include "tdnns/transform.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <atomic>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

namespace tdnns {

int default_quadrature(int p, int p_phi, int g) { return std::max(p, p_phi) + g + 2; }

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct FacePoint {
  Vec3 xh;
  double w;  // reference face weight including the parametrisation area
};

std::vector<FacePoint> face_rule(const ReferenceCell& rc, int f, int n) {
  const auto& fv = rc.faces[f];
  const Vec3 o = rc.vertices[fv[0]];
  const Vec3 a = rc.vertices[fv[1]] - o;
  const Vec3 b = (fv.size() == 3 ? rc.vertices[fv[2]] : rc.vertices[fv[3]]) - o;
  const double area = a.cross(b).norm();
  const QuadRule q = fv.size() == 3 ? gauss_triangle(n) : gauss_quadrilateral(n);
  std::vector<FacePoint> out;
  for (std::size_t i = 0; i < q.size(); ++i)
    out.push_back({o + q.points[i].x() * a + q.points[i].y() * b, q.weights[i] * area});
  return out;
}

// Physical unit normal and surface measure factor at a face point.
struct FaceGeometry {
  PointGeometry pg;
  Vec3 n;
  double dA;
};

FaceGeometry face_geometry(const ElementMap& map, const Vec3& nh, const FacePoint& fp) {
  FaceGeometry fg{point_geometry(map.eval(fp.xh)), Vec3::Zero(), 0.0};
  const Vec3 nv = fg.pg.G.transpose() * nh;
  const double len = nv.norm();
  fg.n = nv / len;
  fg.dA = fp.w * fg.pg.mp.J * len;
  return fg;
}

// sigma_nn = nn_weights(n) . voigt(sigma)
Vec6 nn_weights(const Vec3& n) {
  Vec6 w;
  w << n[0] * n[0], n[1] * n[1], n[2] * n[2], 2 * n[1] * n[2], 2 * n[0] * n[2], 2 * n[0] * n[1];
  return w;
}

// sigma n = traction_matrix(n) * voigt(sigma)
Mat36 traction_matrix(const Vec3& n) {
  Mat36 t = Mat36::Zero();
  t(0, 0) = n[0]; t(0, 4) = n[2]; t(0, 5) = n[1];
  t(1, 1) = n[1]; t(1, 3) = n[2]; t(1, 5) = n[0];
  t(2, 2) = n[2]; t(2, 3) = n[1]; t(2, 4) = n[0];
  return t;
}

void stress_values(const ShapeCatalog& cat, const PointGeometry& pg, const std::vector<Dual3>& v,
                   Eigen::Ref<MatrixXd> voigt, MatrixXd* div = nullptr, int row = 0) {
  for (int i = 0; i < cat.size(); ++i) {
    const Dual3* c = &v[i * 6];
    const Mat3 nh = tensor_value(c);
    voigt.col(i) = stress_voigt(push_stress(pg, nh));
    if (div) div->block<3, 1>(row, i) = physical_divergence(pg, nh, tensor_divergence(c));
  }
}

void displacement_values(const ShapeCatalog& cat, const PointGeometry& pg, const std::vector<Dual3>& v,
                         Eigen::Ref<MatrixXd> val, MatrixXd* strain = nullptr, int row = 0) {
  for (int i = 0; i < cat.size(); ++i) {
    const Dual3* c = &v[i * 3];
    const Vec3 nh = vector_value(c);
    val.col(i) = push_displacement(pg, nh);
    if (strain) strain->block<6, 1>(row, i) = strain_voigt(physical_strain(pg, nh, vector_gradient(c)));
  }
}

void potential_values(const ShapeCatalog& cat, const PointGeometry& pg, const std::vector<Dual3>& v,
                      Eigen::Ref<Eigen::RowVectorXd> val, MatrixXd* grad = nullptr, int row = 0) {
  for (int i = 0; i < cat.size(); ++i) {
    val[i] = v[i].v;
    if (grad) grad->block<3, 1>(row, i) = push_gradient(pg, scalar_gradient(&v[i]));
  }
}

MaterialLawCompliance material_at(const Mesh& mesh, int e, const MaterialLawCompliance& mat, const Vec3& x) {
  const Frame& fr = mesh.frames.at(mesh.elements[e].frame);
  if (fr.kind == Frame::Kind::global) return mat;
  return rotate_material(mat, fr.rotation(x));
}

}  // namespace

ElementMatrices element_matrices(const Mesh& mesh, int e, const MaterialLawCompliance& mat, int p, int p_phi,
                                 bool electric, int quad) {
  const Element& el = mesh.elements[e];
  const ElementMap& map = mesh.map(e);
  const ReferenceCell& rc = reference_cell(el.kind);
  const int n = quad > 0 ? quad : default_quadrature(p, electric ? p_phi : p, map.order());
  const ShapeCatalog& cs = catalog(FieldKind::tensor, el.kind, p);
  const ShapeCatalog& cu = catalog(FieldKind::vector, el.kind, p);
  const ShapeCatalog* cp = electric ? &catalog(FieldKind::scalar, el.kind, p_phi) : nullptr;
  const int ns = cs.size(), nu = cu.size(), np = cp ? cp->size() : 0;

  const QuadRule rule = gauss_rule(el.kind, n);
  const int nq = static_cast<int>(rule.size());
  MatrixXd SV(6 * nq, ns), SVw(6 * nq, ns), EVw(6 * nq, nu), UV(3 * nq, nu), UVw(3 * nq, nu);
  MatrixXd GP(3 * nq, np), GPw(3 * nq, np), DS(3 * nq, ns);
  MatrixXd uval(3, nu), sval(6, ns);
  Eigen::RowVectorXd pval(np);
  std::vector<Dual3> v;
  for (int q = 0; q < nq; ++q) {
    const PointGeometry pg = point_geometry(map.eval(rule.points[q]));
    const double w = rule.weights[q] * pg.mp.J;
    const MaterialLawCompliance m = material_at(mesh, e, mat, pg.mp.x);
    cs.evaluate(rule.points[q], v);
    stress_values(cs, pg, v, sval);
    SV.middleRows(6 * q, 6) = sval;
    SVw.middleRows(6 * q, 6) = w * m.S * sval;
    cu.evaluate(rule.points[q], v);
    displacement_values(cu, pg, v, uval, &EVw, 6 * q);
    EVw.middleRows(6 * q, 6) *= w;
    UV.middleRows(3 * q, 3) = uval;
    UVw.middleRows(3 * q, 3) = (w * m.rho) * uval;
    if (cp) {
      cp->evaluate(rule.points[q], v);
      potential_values(*cp, pg, v, pval, &GP, 3 * q);
      GPw.middleRows(3 * q, 3) = w * m.eps_sigma * GP.middleRows(3 * q, 3);
      DS.middleRows(3 * q, 3) = w * m.d * sval;
    }
  }
  ElementMatrices em;
  em.B = SV.transpose() * EVw;
  em.C = SV.transpose() * SVw;
  em.M = UV.transpose() * UVw;
  if (cp) {
    em.E = GP.transpose() * GPw;
    em.D = GP.transpose() * DS;
  } else {
    em.E.resize(0, 0);
    em.D.resize(0, ns);
  }
  em.C = 0.5 * (em.C + em.C.transpose()).eval();
  em.M = 0.5 * (em.M + em.M.transpose()).eval();
  if (cp) em.E = 0.5 * (em.E + em.E.transpose()).eval();

  // boundary part of the duality pairing
  for (int f = 0; f < rc.num_faces(); ++f) {
    const auto pts = face_rule(rc, f, n);
    MatrixXd SN(pts.size(), ns), UN(pts.size(), nu);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const FaceGeometry fg = face_geometry(map, rc.face_normals[f], pts[k]);
      cs.evaluate(pts[k].xh, v);
      stress_values(cs, fg.pg, v, sval);
      SN.row(k) = nn_weights(fg.n).transpose() * sval;
      cu.evaluate(pts[k].xh, v);
      displacement_values(cu, fg.pg, v, uval);
      UN.row(k) = fg.dA * (fg.n.transpose() * uval);
    }
    em.B.noalias() -= SN.transpose() * UN;
  }
  return em;
}

DualityForms duality_forms(const Mesh& mesh, int e, int p, int quad) {
  const Element& el = mesh.elements[e];
  const ElementMap& map = mesh.map(e);
  const ReferenceCell& rc = reference_cell(el.kind);
  const int n = quad > 0 ? quad : default_quadrature(p, p, map.order());
  const ShapeCatalog& cs = catalog(FieldKind::tensor, el.kind, p);
  const ShapeCatalog& cu = catalog(FieldKind::vector, el.kind, p);
  const int ns = cs.size(), nu = cu.size();
  const QuadRule rule = gauss_rule(el.kind, n);
  const int nq = static_cast<int>(rule.size());
  MatrixXd SV(6 * nq, ns), EV(6 * nq, nu), DV(3 * nq, ns), UVw(3 * nq, nu);
  MatrixXd uval(3, nu), sval(6, ns);
  std::vector<Dual3> v;
  for (int q = 0; q < nq; ++q) {
    const PointGeometry pg = point_geometry(map.eval(rule.points[q]));
    const double w = rule.weights[q] * pg.mp.J;
    cs.evaluate(rule.points[q], v);
    stress_values(cs, pg, v, sval, &DV, 3 * q);
    SV.middleRows(6 * q, 6) = w * sval;
    cu.evaluate(rule.points[q], v);
    displacement_values(cu, pg, v, uval, &EV, 6 * q);
    UVw.middleRows(3 * q, 3) = w * uval;
  }
  DualityForms out;
  out.volume = SV.transpose() * EV;
  out.divergence = -DV.transpose() * UVw;
  for (int f = 0; f < rc.num_faces(); ++f) {
    const auto pts = face_rule(rc, f, n);
    const int nf = static_cast<int>(pts.size());
    MatrixXd SN(nf, ns), UN(nf, nu), ST(3 * nf, ns), UT(3 * nf, nu);
    for (int k = 0; k < nf; ++k) {
      const FaceGeometry fg = face_geometry(map, rc.face_normals[f], pts[k]);
      cs.evaluate(pts[k].xh, v);
      stress_values(cs, fg.pg, v, sval);
      const Eigen::RowVectorXd snn = nn_weights(fg.n).transpose() * sval;
      SN.row(k) = snn;
      // sigma_nt = sigma n - sigma_nn n
      ST.middleRows(3 * k, 3) = traction_matrix(fg.n) * sval - fg.n * snn;
      cu.evaluate(pts[k].xh, v);
      displacement_values(cu, fg.pg, v, uval);
      const Eigen::RowVectorXd un = fg.n.transpose() * uval;
      UN.row(k) = fg.dA * un;
      UT.middleRows(3 * k, 3) = fg.dA * (uval - fg.n * un);
    }
    out.volume.noalias() -= SN.transpose() * UN;
    out.divergence.noalias() += ST.transpose() * UT;
  }
  return out;
}

ElementGather element_gather(const FieldDofs& fd, int e, int n_local) {
  ElementGather g;
  const auto& ed = fd.elem.at(e);
  int ncol = 0;
  for (const auto& b : ed.blocks)
    if (b.global_start >= 0) ncol += static_cast<int>(b.local.size());
  g.G = MatrixXd::Zero(n_local, ncol);
  g.global.reserve(ncol);
  int col = 0;
  for (const auto& b : ed.blocks) {
    if (b.global_start < 0) continue;
    const int nb = static_cast<int>(b.local.size());
    for (int j = 0; j < nb; ++j) g.global.push_back(fd.offset + b.global_start + j);
    for (int k = 0; k < nb; ++k)
      for (int j = 0; j < nb; ++j) g.G(b.local[k], col + j) = b.identity ? (k == j ? 1.0 : 0.0) : b.B(k, j);
    col += nb;
  }
  return g;
}

// ------------------------------------------------------------------ boundary handling

namespace {

struct FaceRef {
  int element;
  int face;
};

// Electric element owning an electric boundary face tagged on (e, f), or -1.
int electric_side(const Mesh& mesh, const std::vector<bool>& electric, int e, int f) {
  if (electric[e]) return e;
  const auto& topo = mesh.topology();
  for (const auto& [k, lf] : topo.face_elements[topo.element_faces[e][f]])
    if (k != e && electric[k]) return k;
  return -1;
}

int local_face_of(const Mesh& mesh, int e, int global_face) {
  const auto& ef = mesh.topology().element_faces[e];
  return static_cast<int>(std::find(ef.begin(), ef.end(), global_face) - ef.begin());
}

bool is_electric_boundary(const Mesh& mesh, const std::vector<bool>& electric, int e, int f) {
  const auto& topo = mesh.topology();
  for (const auto& [k, lf] : topo.face_elements[topo.element_faces[e][f]])
    if (k != e && electric[k]) return false;
  return true;
}

struct Classified {
  std::vector<FaceRef> clamped, free, electrode, charge_free;
  std::vector<double> electrode_value;  // per electrode face (constant mode)
};

Classified classify(const Mesh& mesh, const std::vector<bool>& electric, const BoundaryData& bc) {
  Classified c;
  std::set<std::pair<int, int>> elec_done;
  for (const FacetTag& t : mesh.facets) {
    if (t.mech == MechTag::clamped) c.clamped.push_back({t.element, t.local_face});
    if (t.mech == MechTag::free) c.free.push_back({t.element, t.local_face});
    if (t.elec == ElecTag::none) continue;
    const int k = electric_side(mesh, electric, t.element, t.local_face);
    if (k < 0) continue;
    const int f = k == t.element ? t.local_face
                                 : local_face_of(mesh, k, mesh.topology().element_faces[t.element][t.local_face]);
    if (!elec_done.insert({k, f}).second) continue;
    const bool fixed = t.elec == ElecTag::electrode &&
                       (bc.potential || bc.electrode_potential.count(t.electrode) > 0);
    if (fixed) {
      c.electrode.push_back({k, f});
      c.electrode_value.push_back(bc.potential ? 0.0 : bc.electrode_potential.at(t.electrode));
    } else {
      c.charge_free.push_back({k, f});
    }
  }
  // untagged boundaries of the electric subdomain are charge free
  for (int e = 0; e < mesh.num_elements(); ++e) {
    if (!electric[e]) continue;
    for (int f = 0; f < reference_cell(mesh.elements[e].kind).num_faces(); ++f)
      if (is_electric_boundary(mesh, electric, e, f) && !elec_done.count({e, f})) {
        elec_done.insert({e, f});
        c.charge_free.push_back({e, f});
      }
  }
  return c;
}

// Global dofs of a face and, when `closure`, its edges and vertices.
void face_dofs(const Mesh& mesh, const FieldDofs& fd, int e, int f, bool closure, std::vector<int>& out) {
  const auto& topo = mesh.topology();
  const auto& rc = reference_cell(mesh.elements[e].kind);
  auto add = [&](EntityType t, int id) {
    const auto& [start, cnt] = fd.entity_dofs(t, id);
    for (int k = 0; k < cnt; ++k) out.push_back(fd.offset + start + k);
  };
  add(EntityType::face, topo.element_faces[e][f]);
  if (!closure) return;
  const auto& fv = rc.faces[f];
  auto in_face = [&](int v) { return std::find(fv.begin(), fv.end(), v) != fv.end(); };
  for (int g = 0; g < rc.num_edges(); ++g)
    if (in_face(rc.edges[g][0]) && in_face(rc.edges[g][1])) add(EntityType::edge, topo.element_edges[e][g]);
  for (int v : fv) add(EntityType::vertex, mesh.elements[e].vertices[v]);
}

// L2 projection of a boundary trace onto the essential dofs of the given faces.
// trace(e, xh, fg, G) returns rows of trace values of the global functions and
// the target values.
using TraceFn = std::function<void(int face, int e, const Vec3& xh, const FaceGeometry& fg, const ElementGather& g,
                                   MatrixXd& T, VectorXd& target)>;

void project_boundary(const Mesh& mesh, const FieldDofs& fd, const std::vector<FaceRef>& faces,
                      const std::vector<char>& essential, int quad, const TraceFn& trace, VectorXd& lifting) {
  std::vector<int> ids;
  std::vector<int> compact(lifting.size(), -1);
  for (int i = 0; i < lifting.size(); ++i)
    if (essential[i] && i >= fd.offset && i < fd.offset + fd.count) {
      compact[i] = static_cast<int>(ids.size());
      ids.push_back(i);
    }
  if (ids.empty()) return;
  std::vector<Eigen::Triplet<double>> trip;
  VectorXd rhs = VectorXd::Zero(ids.size());
  std::vector<double> used(ids.size(), 0.0);
  for (std::size_t fi = 0; fi < faces.size(); ++fi) {
    const FaceRef& fr = faces[fi];
    const auto& el = mesh.elements[fr.element];
    const auto& rc = reference_cell(el.kind);
    const ElementGather g = element_gather(fd, fr.element, catalog(fd.field, el.kind, fd.order).size());
    std::vector<int> cols;
    for (std::size_t j = 0; j < g.global.size(); ++j)
      if (compact[g.global[j]] >= 0) cols.push_back(static_cast<int>(j));
    for (const auto& fp : face_rule(rc, fr.face, quad)) {
      const FaceGeometry fgeo = face_geometry(mesh.map(fr.element), rc.face_normals[fr.face], fp);
      MatrixXd T;
      VectorXd target;
      trace(static_cast<int>(fi), fr.element, fp.xh, fgeo, g, T, target);
      for (int a : cols) {
        const int ia = compact[g.global[a]];
        used[ia] = 1.0;
        rhs[ia] += fgeo.dA * T.col(a).dot(target);
        for (int b : cols) trip.emplace_back(ia, compact[g.global[b]], fgeo.dA * T.col(a).dot(T.col(b)));
      }
    }
  }
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (used[i] == 0.0) trip.emplace_back(i, i, 1.0);
  SpMat N(ids.size(), ids.size());
  N.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<SpMat> ldlt(N);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("boundary projection failed");
  const VectorXd sol = ldlt.solve(rhs);
  for (std::size_t i = 0; i < ids.size(); ++i) lifting[ids[i]] = sol[i];
}

struct ElementResult {
  std::vector<int> global;   // columns of P
  MatrixXd P;                // condensed system matrix in global numbering
  VectorXd f;                // load
  std::vector<int> u_global;
  MatrixXd M;
  MatrixXd recovery;
  std::vector<int> interior;
};

template <class Fn>
void parallel_for(int n, int threads, Fn fn) {
  int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nt = std::max(1, std::min(nt, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (nt == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace

BlockSystem assemble(const Mesh& mesh, const std::vector<MaterialLawCompliance>& materials, int p, int p_phi,
                     const BoundaryData& bc, const AssemblyOptions& opt) {
  const int ne = mesh.num_elements();
  std::vector<bool> electric(ne);
  for (int e = 0; e < ne; ++e) {
    const int m = mesh.elements[e].material;
    if (m < 0 || m >= static_cast<int>(materials.size()))
      throw std::invalid_argument("element " + std::to_string(e) + " uses undefined material " + std::to_string(m));
    electric[e] = materials[m].electric;
  }
  BlockSystem sys;
  sys.mesh = &mesh;
  sys.materials = materials;
  sys.bc = bc;
  sys.options = opt;
  sys.dofs = build_dof_map(mesh, p, p_phi, electric, opt.condense);
  const DofMap& dm = sys.dofs;
  const int N = dm.size();

  // essential dofs
  const Classified cl = classify(mesh, electric, bc);
  std::vector<char> essential(N, 0);
  std::vector<int> tmp;
  for (const auto& fr : cl.clamped) face_dofs(mesh, dm.u, fr.element, fr.face, true, tmp);
  for (const auto& fr : cl.free) face_dofs(mesh, dm.s, fr.element, fr.face, false, tmp);
  for (const auto& fr : cl.electrode) face_dofs(mesh, dm.phi, fr.element, fr.face, true, tmp);
  for (int i : tmp) essential[i] = 1;

  // lifting of nonzero essential values
  sys.lifting = VectorXd::Zero(N);
  const int qb = std::max(opt.quad, default_quadrature(p, p_phi, mesh.geometry_order));
  if (bc.displacement && !cl.clamped.empty()) {
    project_boundary(mesh, dm.u, cl.clamped, essential, qb,
                     [&](int, int e, const Vec3& xh, const FaceGeometry& fg, const ElementGather& g, MatrixXd& T, VectorXd& t) {
                       const auto& cat = catalog(FieldKind::vector, mesh.elements[e].kind, p);
                       std::vector<Dual3> w;
                       cat.evaluate(xh, w);
                       MatrixXd val(3, cat.size());
                       displacement_values(cat, fg.pg, w, val);
                       const Mat3 P = Mat3::Identity() - fg.n * fg.n.transpose();
                       T = P * val * g.G;
                       t = P * bc.displacement(fg.pg.mp.x);
                     },
                     sys.lifting);
  }
  if (bc.normal_stress && !cl.free.empty()) {
    project_boundary(mesh, dm.s, cl.free, essential, qb,
                     [&](int, int e, const Vec3& xh, const FaceGeometry& fg, const ElementGather& g, MatrixXd& T, VectorXd& t) {
                       const auto& cat = catalog(FieldKind::tensor, mesh.elements[e].kind, p);
                       std::vector<Dual3> w;
                       cat.evaluate(xh, w);
                       MatrixXd val(6, cat.size());
                       stress_values(cat, fg.pg, w, val);
                       T = nn_weights(fg.n).transpose() * val * g.G;
                       t = VectorXd::Constant(1, bc.normal_stress(fg.pg.mp.x, fg.n));
                     },
                     sys.lifting);
  }
  bool phi_nonzero = static_cast<bool>(bc.potential);
  for (double val : cl.electrode_value) phi_nonzero = phi_nonzero || val != 0.0;
  if (phi_nonzero && !cl.electrode.empty()) {
    project_boundary(mesh, dm.phi, cl.electrode, essential, qb,
                     [&](int fi, int e, const Vec3& xh, const FaceGeometry& fg, const ElementGather& g, MatrixXd& T,
                         VectorXd& t) {
                       const auto& cat = catalog(FieldKind::scalar, mesh.elements[e].kind, p_phi);
                       std::vector<Dual3> w;
                       cat.evaluate(xh, w);
                       Eigen::RowVectorXd val(cat.size());
                       potential_values(cat, fg.pg, w, val);
                       T = val * g.G;
                       t = VectorXd::Constant(1, bc.potential ? bc.potential(fg.pg.mp.x) : cl.electrode_value[fi]);
                     },
                     sys.lifting);
  }

  // element contributions
  std::vector<ElementResult> res(ne);
  std::map<std::pair<int, int>, int> clamped_set, free_set, charge_set;
  for (const auto& fr : cl.clamped) clamped_set[{fr.element, fr.face}] = 1;
  for (const auto& fr : cl.free) free_set[{fr.element, fr.face}] = 1;
  for (const auto& fr : cl.charge_free) charge_set[{fr.element, fr.face}] = 1;

  parallel_for(ne, opt.threads, [&](int e) {
    const Element& el = mesh.elements[e];
    const ReferenceCell& rc = reference_cell(el.kind);
    const MaterialLawCompliance& mat = materials[el.material];
    const bool elec = electric[e];
    const ElementMatrices em = element_matrices(mesh, e, mat, p, p_phi, elec, opt.quad);
    const int nu = static_cast<int>(em.M.rows()), ns = static_cast<int>(em.C.rows()),
              np = elec ? static_cast<int>(em.E.rows()) : 0;
    const int nl = nu + ns + np;
    MatrixXd K = MatrixXd::Zero(nl, nl);
    K.block(0, nu, nu, ns) = em.B.transpose();
    K.block(nu, 0, ns, nu) = em.B;
    K.block(nu, nu, ns, ns) = -em.C;
    if (np) {
      K.block(nu, nu + ns, ns, np) = em.D.transpose();
      K.block(nu + ns, nu, np, ns) = em.D;
      K.block(nu + ns, nu + ns, np, np) = -em.E;
    }

    // loads
    VectorXd f = VectorXd::Zero(nl);
    const ElementMap& map = mesh.map(e);
    const int nquad = opt.quad > 0 ? opt.quad : default_quadrature(p, elec ? p_phi : p, map.order());
    std::vector<Dual3> w;
    const auto& cu = catalog(FieldKind::vector, el.kind, p);
    const auto& cs = catalog(FieldKind::tensor, el.kind, p);
    MatrixXd uval(3, nu), sval(6, ns);
    if (bc.body_force) {
      const QuadRule rule = gauss_rule(el.kind, nquad);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const PointGeometry pg = point_geometry(map.eval(rule.points[q]));
        cu.evaluate(rule.points[q], w);
        displacement_values(cu, pg, w, uval);
        f.head(nu) += (rule.weights[q] * pg.mp.J) * (uval.transpose() * bc.body_force(pg.mp.x));
      }
    }
    for (int fc = 0; fc < rc.num_faces(); ++fc) {
      const bool clamped = bc.normal_displacement && clamped_set.count({e, fc});
      const bool free = bc.traction && free_set.count({e, fc});
      const bool charge = bc.surface_charge && np && charge_set.count({e, fc});
      if (!clamped && !free && !charge) continue;
      for (const auto& fp : face_rule(rc, fc, nquad)) {
        const FaceGeometry fg = face_geometry(map, rc.face_normals[fc], fp);
        const Vec3& x = fg.pg.mp.x;
        if (clamped) {
          cs.evaluate(fp.xh, w);
          stress_values(cs, fg.pg, w, sval);
          f.segment(nu, ns) -= (fg.dA * bc.normal_displacement(x, fg.n)) * (sval.transpose() * nn_weights(fg.n));
        }
        if (free) {
          cu.evaluate(fp.xh, w);
          displacement_values(cu, fg.pg, w, uval);
          Vec3 t = bc.traction(x, fg.n);
          t -= t.dot(fg.n) * fg.n;
          f.head(nu) += fg.dA * (uval.transpose() * t);
        }
        if (charge) {
          const auto& cp = catalog(FieldKind::scalar, el.kind, p_phi);
          cp.evaluate(fp.xh, w);
          Eigen::RowVectorXd pv(np);
          potential_values(cp, fg.pg, w, pv);
          f.tail(np) += (fg.dA * bc.surface_charge(x, fg.n)) * pv.transpose();
        }
      }
    }

    // condensation of element-interior stresses
    ElementResult& r = res[e];
    std::vector<int> bl, il;
    const auto& sg = dm.s.elem[e].gdof;
    for (int i = 0; i < nu; ++i) bl.push_back(i);
    for (int i = 0; i < ns; ++i) (sg[i] < 0 ? il : bl).push_back(nu + i);
    for (int i = 0; i < np; ++i) bl.push_back(nu + ns + i);
    const int nb = static_cast<int>(bl.size()), ni = static_cast<int>(il.size());
    MatrixXd Kc = K(bl, bl);
    VectorXd fb = f(bl);
    if (ni > 0) {
      const MatrixXd Cii = -K(il, il);
      Eigen::LLT<MatrixXd> llt(Cii);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("singular interior stress block in element " + std::to_string(e));
      const MatrixXd Kib = K(il, bl);
      r.recovery = llt.solve(Kib);
      Kc.noalias() += Kib.transpose() * r.recovery;
      for (int i : il) r.interior.push_back(i - nu);
    }

    // local -> global
    const ElementGather gu = element_gather(dm.u, e, nu);
    const ElementGather gs = element_gather(dm.s, e, ns);
    ElementGather gp;
    if (np) gp = element_gather(dm.phi, e, np);
    const int cu_n = static_cast<int>(gu.global.size()), cs_n = static_cast<int>(gs.global.size()),
              cp_n = np ? static_cast<int>(gp.global.size()) : 0;
    SpMat G(nb, cu_n + cs_n + cp_n);
    std::vector<Eigen::Triplet<double>> gt;
    auto put = [&](const MatrixXd& src, int row0, int col0, const std::vector<int>& rows) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < src.cols(); ++j)
          if (src(rows[i], j) != 0.0) gt.emplace_back(row0 + static_cast<int>(i), col0 + j, src(rows[i], j));
    };
    std::vector<int> urows(nu), srows, prows(np);
    for (int i = 0; i < nu; ++i) urows[i] = i;
    for (int i = 0; i < ns; ++i)
      if (sg[i] >= 0) srows.push_back(i);
    for (int i = 0; i < np; ++i) prows[i] = i;
    put(gu.G, 0, 0, urows);
    put(gs.G, nu, cu_n, srows);
    if (np) put(gp.G, nu + static_cast<int>(srows.size()), cu_n + cs_n, prows);
    G.setFromTriplets(gt.begin(), gt.end());
    r.global = gu.global;
    r.global.insert(r.global.end(), gs.global.begin(), gs.global.end());
    if (np) r.global.insert(r.global.end(), gp.global.begin(), gp.global.end());
    const MatrixXd KG = Kc * G;
    r.P = G.transpose() * KG;
    r.P = 0.5 * (r.P + r.P.transpose()).eval();
    r.f = G.transpose() * fb;
    r.u_global = gu.global;
    const MatrixXd MG = em.M * gu.G;
    r.M = gu.G.transpose() * MG;
    r.M = 0.5 * (r.M + r.M.transpose()).eval();
  });

  // free numbering
  sys.global_to_free.assign(N, -1);
  for (int i = 0; i < N; ++i)
    if (!essential[i]) {
      sys.global_to_free[i] = static_cast<int>(sys.free_to_global.size());
      sys.free_to_global.push_back(i);
      const int field = i < dm.u.count ? 0 : (i < dm.u.count + dm.s.count ? 1 : 2);
      ++sys.n_free[field];
    }
  const int nf = sys.size();
  sys.b = VectorXd::Zero(nf);
  std::vector<Eigen::Triplet<double>> ta, tm;
  sys.recovery.resize(ne);
  sys.interior.resize(ne);
  for (int e = 0; e < ne; ++e) {
    ElementResult& r = res[e];
    const int n = static_cast<int>(r.global.size());
    for (int a = 0; a < n; ++a) {
      const int fa = sys.global_to_free[r.global[a]];
      if (fa < 0) continue;
      sys.b[fa] += r.f[a];
      for (int c = 0; c < n; ++c) {
        const int fc = sys.global_to_free[r.global[c]];
        if (fc >= 0) {
          if (r.P(a, c) != 0.0) ta.emplace_back(fa, fc, r.P(a, c));
        } else {
          sys.b[fa] -= r.P(a, c) * sys.lifting[r.global[c]];
        }
      }
    }
    const int m = static_cast<int>(r.u_global.size());
    for (int a = 0; a < m; ++a) {
      const int fa = sys.global_to_free[r.u_global[a]];
      if (fa < 0) continue;
      for (int c = 0; c < m; ++c) {
        const int fc = sys.global_to_free[r.u_global[c]];
        if (fc >= 0 && r.M(a, c) != 0.0) tm.emplace_back(fa, fc, r.M(a, c));
      }
    }
    sys.recovery[e] = std::move(r.recovery);
    sys.interior[e] = std::move(r.interior);
    r = ElementResult{};
  }
  sys.A.resize(nf, nf);
  sys.A.setFromTriplets(ta.begin(), ta.end());
  sys.M.resize(nf, nf);
  sys.M.setFromTriplets(tm.begin(), tm.end());
  return sys;
}

Solution expand_solution(const BlockSystem& sys, const VectorXd& x_free) {
  if (x_free.size() != sys.size()) throw std::invalid_argument("solution vector has the wrong size");
  Solution s;
  s.system = &sys;
  s.x = sys.lifting;
  for (int i = 0; i < sys.size(); ++i) s.x[sys.free_to_global[i]] = x_free[i];
  const Mesh& mesh = *sys.mesh;
  const DofMap& dm = sys.dofs;
  s.sigma_interior.resize(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    if (sys.interior[e].empty()) continue;
    const CellKind kind = mesh.elements[e].kind;
    const int nu = catalog(FieldKind::vector, kind, dm.p).size();
    const int ns = catalog(FieldKind::tensor, kind, dm.p).size();
    const bool elec = !dm.phi.elem[e].gdof.empty();
    const int np = elec ? catalog(FieldKind::scalar, kind, dm.p_phi).size() : 0;
    auto local = [&](const FieldDofs& fd, int n) {
      const ElementGather g = element_gather(fd, e, n);
      VectorXd xg(g.global.size());
      for (std::size_t j = 0; j < g.global.size(); ++j) xg[j] = s.x[g.global[j]];
      return VectorXd(g.G * xg);
    };
    const VectorXd au = local(dm.u, nu);
    const VectorXd as = local(dm.s, ns);
    VectorXd ab(sys.recovery[e].cols());
    int k = 0;
    for (int i = 0; i < nu; ++i) ab[k++] = au[i];
    for (int i = 0; i < ns; ++i)
      if (dm.s.elem[e].gdof[i] >= 0) ab[k++] = as[i];
    if (np) {
      const VectorXd ap = local(dm.phi, np);
      for (int i = 0; i < np; ++i) ab[k++] = ap[i];
    }
    s.sigma_interior[e] = sys.recovery[e] * ab;
  }
  return s;
}

VectorXd local_coefficients(const Solution& s, FieldKind f, int e) {
  const BlockSystem& sys = *s.system;
  const FieldDofs& fd = sys.dofs.field(f);
  if (fd.elem[e].gdof.empty()) return VectorXd();
  const int n = catalog(f, sys.mesh->elements[e].kind, fd.order).size();
  const ElementGather g = element_gather(fd, e, n);
  VectorXd xg(g.global.size());
  for (std::size_t j = 0; j < g.global.size(); ++j) xg[j] = s.x[g.global[j]];
  VectorXd a = g.G * xg;
  if (f == FieldKind::tensor && !sys.interior[e].empty()) {
    const auto& il = sys.interior[e];
    for (std::size_t k = 0; k < il.size(); ++k) a[il[k]] = s.sigma_interior[e][k];
  }
  return a;
}

void write_triplets(std::ostream& os, const SpMat& A) {
  os << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n' << std::setprecision(17);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace tdnns
