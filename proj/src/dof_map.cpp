#include "tdnns/dof_map.hpp"

#include "tdnns/transform.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>

namespace tdnns {

const std::pair<int, int>& FieldDofs::entity_dofs(EntityType t, int id) const {
  switch (t) {
    case EntityType::vertex: return vertex_dofs.at(id);
    case EntityType::edge: return edge_dofs.at(id);
    case EntityType::face: return face_dofs.at(id);
    case EntityType::cell: return cell_dofs.at(id);
  }
  throw std::logic_error("bad entity type");
}

EntityParam entity_param(const Mesh& mesh, int e, EntityRef le) {
  const auto& el = mesh.elements[e];
  const auto& rc = reference_cell(el.kind);
  const auto gid = [&](int lv) { return el.vertices[lv]; };
  EntityParam par{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  switch (le.type) {
    case EntityType::vertex: par.origin = rc.vertices[le.index]; break;
    case EntityType::edge: {
      int a = rc.edges[le.index][0], b = rc.edges[le.index][1];
      if (gid(a) > gid(b)) std::swap(a, b);
      par.origin = rc.vertices[a];
      par.ts = rc.vertices[b] - rc.vertices[a];
      break;
    }
    case EntityType::face: {
      std::vector<int> f = rc.faces[le.index];
      if (f.size() == 3) {
        std::sort(f.begin(), f.end(), [&](int a, int b) { return gid(a) < gid(b); });
        par.origin = rc.vertices[f[0]];
        par.ts = rc.vertices[f[1]] - par.origin;
        par.tt = rc.vertices[f[2]] - par.origin;
      } else {
        int i0 = 0;
        for (int i = 1; i < 4; ++i)
          if (gid(f[i]) < gid(f[i0])) i0 = i;
        int a = f[(i0 + 1) % 4], b = f[(i0 + 3) % 4];
        if (gid(a) > gid(b)) std::swap(a, b);
        par.origin = rc.vertices[f[i0]];
        par.ts = rc.vertices[a] - par.origin;
        par.tt = rc.vertices[b] - par.origin;
      }
      break;
    }
    case EntityType::cell: par.ts = Vec3::UnitX(); par.tt = Vec3::UnitY(); break;
  }
  return par;
}

std::vector<Eigen::Vector2d> entity_sample_points(EntityType type, bool triangle, int order) {
  const int n = order + 3;
  std::vector<Eigen::Vector2d> pts;
  QuadRule q;
  switch (type) {
    case EntityType::vertex: pts.emplace_back(0.0, 0.0); return pts;
    case EntityType::edge: q = gauss_segment(n); break;
    case EntityType::face: q = triangle ? gauss_triangle(n) : gauss_quadrilateral(n); break;
    case EntityType::cell: throw std::logic_error("cells have no trace");
  }
  for (const auto& x : q.points) pts.emplace_back(x.x(), x.y());
  return pts;
}

Eigen::MatrixXd trace_matrix(const ShapeCatalog& cat, EntityType type, const EntityParam& par,
                             const std::vector<Eigen::Vector2d>& pts, const std::vector<int>& fns) {
  const int nc = cat.components();
  const int per_point = cat.field() == FieldKind::vector ? (type == EntityType::edge ? 1 : 2) : 1;
  Eigen::MatrixXd T(pts.size() * per_point, fns.size());
  const Vec3 m = par.ts.cross(par.tt);
  std::vector<Dual3> v;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    const Vec3 xh = par.origin + pts[a].x() * par.ts + pts[a].y() * par.tt;
    cat.evaluate(xh, v);
    for (std::size_t j = 0; j < fns.size(); ++j) {
      const Dual3* c = &v[fns[j] * nc];
      switch (cat.field()) {
        case FieldKind::scalar: T(a, j) = c[0].v; break;
        case FieldKind::vector: {
          const Vec3 w = vector_value(c);
          T(a * per_point, j) = w.dot(par.ts);
          if (per_point == 2) T(a * per_point + 1, j) = w.dot(par.tt);
          break;
        }
        case FieldKind::tensor: T(a, j) = m.dot(tensor_value(c) * m); break;
      }
    }
  }
  return T;
}

namespace {

struct EntityUse {
  int element;
  EntityRef local;
};

void build_field(const Mesh& mesh, FieldDofs& fd, const std::vector<bool>& active, bool condense_cells) {
  const auto& topo = mesh.topology();
  const int ne = mesh.num_elements();
  std::vector<std::vector<int>> ekey(ne);
  for (int e = 0; e < ne; ++e) {
    ekey[e] = mesh.elements[e].vertices;
    std::sort(ekey[e].begin(), ekey[e].end());
  }
  auto cat_of = [&](int e) -> const ShapeCatalog& { return catalog(fd.field, mesh.elements[e].kind, fd.order); };

  // uses of every global entity
  const int nv = static_cast<int>(mesh.vertices.size());
  std::vector<std::vector<EntityUse>> uses[4];
  uses[0].resize(nv);
  uses[1].resize(topo.edges.size());
  uses[2].resize(topo.faces.size());
  uses[3].resize(ne);
  for (int e = 0; e < ne; ++e) {
    if (!active[e]) continue;
    const auto& rc = reference_cell(mesh.elements[e].kind);
    for (int i = 0; i < rc.num_vertices(); ++i) uses[0][mesh.elements[e].vertices[i]].push_back({e, {EntityType::vertex, i}});
    for (int i = 0; i < rc.num_edges(); ++i) uses[1][topo.element_edges[e][i]].push_back({e, {EntityType::edge, i}});
    for (int i = 0; i < rc.num_faces(); ++i) uses[2][topo.element_faces[e][i]].push_back({e, {EntityType::face, i}});
    uses[3][e].push_back({e, {EntityType::cell, 0}});
  }

  // canonical entity order
  auto key_of = [&](int t, int id) -> std::vector<int> {
    switch (t) {
      case 0: return {id};
      case 1: return {topo.edges[id][0], topo.edges[id][1]};
      case 2: return topo.faces[id];
      default: return ekey[id];
    }
  };
  std::vector<std::pair<int, int>>* ranges[4] = {&fd.vertex_dofs, &fd.edge_dofs, &fd.face_dofs, &fd.cell_dofs};
  fd.elem.assign(ne, {});
  fd.count = 0;
  fd.local_only = 0;
  for (int t = 0; t < 4; ++t) {
    const int n = static_cast<int>(uses[t].size());
    ranges[t]->assign(n, {-1, 0});
    std::vector<int> order;
    for (int id = 0; id < n; ++id)
      if (!uses[t][id].empty()) order.push_back(id);
    std::vector<std::vector<int>> keys(n);
    for (int id : order) keys[id] = key_of(t, id);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return keys[a] < keys[b]; });
    for (int id : order) {
      auto& us = uses[t][id];
      std::sort(us.begin(), us.end(), [&](const EntityUse& a, const EntityUse& b) { return ekey[a.element] < ekey[b.element]; });
      const EntityUse owner = us.front();
      const auto& ocat = cat_of(owner.element);
      const auto& ofns = ocat.functions_on(owner.local);
      const int cnt = static_cast<int>(ofns.size());
      if (cnt == 0) continue;
      int start = -1;
      if (t == 3 && condense_cells) {
        fd.local_only += cnt;
      } else {
        start = fd.count;
        fd.count += cnt;
        (*ranges[t])[id] = {start, cnt};
      }
      Eigen::MatrixXd T_owner;
      std::vector<Eigen::Vector2d> pts;
      if (us.size() > 1) {
        const bool tri = t == 2 && keys[id].size() == 3;
        pts = entity_sample_points(static_cast<EntityType>(t), tri, fd.order);
        T_owner = trace_matrix(ocat, static_cast<EntityType>(t), entity_param(mesh, owner.element, owner.local), pts, ofns);
      }
      for (std::size_t k = 0; k < us.size(); ++k) {
        const auto& use = us[k];
        const auto& cat = cat_of(use.element);
        DofBlock blk;
        blk.entity = use.local;
        blk.global_entity = id;
        blk.local = cat.functions_on(use.local);
        blk.global_start = start;
        if (static_cast<int>(blk.local.size()) != cnt)
          throw std::runtime_error("elements disagree on the number of " + to_string(fd.field) +
                                   " functions of a shared entity");
        if (k == 0) {
          blk.identity = true;
        } else {
          const Eigen::MatrixXd T = trace_matrix(cat, static_cast<EntityType>(t), entity_param(mesh, use.element, use.local), pts, blk.local);
          Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(T);
          blk.B = qr.solve(T_owner);
          const double res = (T * blk.B - T_owner).norm();
          if (qr.rank() < cnt || !(res <= 1e-9 * std::max(1.0, T_owner.norm())))
            throw std::runtime_error("non-conforming " + to_string(fd.field) + " traces between elements " +
                                     std::to_string(owner.element) + " and " + std::to_string(use.element));
          // snap to exact identity when trace matching reproduces it
          blk.identity = (blk.B - Eigen::MatrixXd::Identity(cnt, cnt)).cwiseAbs().maxCoeff() < 1e-13;
          if (blk.identity) blk.B.resize(0, 0);
        }
        fd.elem[use.element].blocks.push_back(std::move(blk));
      }
    }
  }
  for (int e = 0; e < ne; ++e) {
    if (!active[e]) continue;
    auto& ed = fd.elem[e];
    ed.gdof.assign(cat_of(e).size(), -1);
    for (const auto& b : ed.blocks)
      if (b.global_start >= 0)
        for (std::size_t k = 0; k < b.local.size(); ++k) ed.gdof[b.local[k]] = fd.offset + b.global_start + static_cast<int>(k);
  }
}

}  // namespace

DofMap build_dof_map(const Mesh& mesh, int p, int p_phi, const std::vector<bool>& electric, bool condense) {
  if (p < 1 || p_phi < 1) throw std::invalid_argument("orders must be at least 1");
  if (static_cast<int>(electric.size()) != mesh.num_elements())
    throw std::invalid_argument("electric flags must be given per element");
  DofMap dm;
  dm.mesh = &mesh;
  dm.p = p;
  dm.p_phi = p_phi;
  dm.condensed = condense;
  dm.electric = electric;
  const std::vector<bool> all(mesh.num_elements(), true);
  dm.u.field = FieldKind::vector;
  dm.u.order = p;
  dm.u.offset = 0;
  build_field(mesh, dm.u, all, false);
  dm.s.field = FieldKind::tensor;
  dm.s.order = p;
  dm.s.offset = dm.u.count;
  build_field(mesh, dm.s, all, condense);
  dm.phi.field = FieldKind::scalar;
  dm.phi.order = p_phi;
  dm.phi.offset = dm.u.count + dm.s.count;
  build_field(mesh, dm.phi, electric, false);
  return dm;
}

// ------------------------------------------------------------------ conformity check

namespace {

Eigen::VectorXd local_coeffs(const ElementFieldDofs& ed, int nloc, const Eigen::VectorXd& x) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(nloc);
  for (const auto& b : ed.blocks) {
    if (b.global_start < 0) continue;
    const int n = static_cast<int>(b.local.size());
    const Eigen::VectorXd g = x.segment(ed.gdof[b.local[0]], n);
    const Eigen::VectorXd l = b.identity ? g : Eigen::VectorXd(b.B * g);
    for (int k = 0; k < n; ++k) a[b.local[k]] = l[k];
  }
  return a;
}

}  // namespace

ConformityReport check_conformity(const DofMap& dm, FieldKind field) {
  const Mesh& mesh = *dm.mesh;
  const FieldDofs& fd = dm.field(field);
  ConformityReport rep;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd x(dm.size());
  for (int i = 0; i < x.size(); ++i) x[i] = unif(rng);
  const auto& topo = mesh.topology();
  std::vector<Dual3> v;
  for (std::size_t f = 0; f < topo.faces.size(); ++f) {
    const auto& fe = topo.face_elements[f];
    if (fe.size() != 2) continue;
    if (fd.elem[fe[0].first].gdof.empty() || fd.elem[fe[1].first].gdof.empty()) continue;
    const bool tri = topo.faces[f].size() == 3;
    const auto pts = entity_sample_points(EntityType::face, tri, fd.order);
    std::vector<std::vector<double>> traces(2);
    std::vector<Vec3> xs[2];
    double scale = 0.0;
    for (int side = 0; side < 2; ++side) {
      const int e = fe[side].first;
      const auto& cat = catalog(field, mesh.elements[e].kind, fd.order);
      const Eigen::VectorXd a = local_coeffs(fd.elem[e], cat.size(), x);
      const EntityParam par = entity_param(mesh, e, {EntityType::face, fe[side].second});
      const Vec3 nh = reference_cell(mesh.elements[e].kind).face_normals[fe[side].second];
      for (const auto& s : pts) {
        const Vec3 xh = par.origin + s.x() * par.ts + s.y() * par.tt;
        const PointGeometry pg = point_geometry(mesh.map(e).eval(xh));
        xs[side].push_back(pg.mp.x);
        Vec3 n = pg.G.transpose() * nh;
        n.normalize();
        cat.evaluate(xh, v);
        const int nc = cat.components();
        if (field == FieldKind::scalar) {
          double val = 0.0;
          for (int i = 0; i < cat.size(); ++i) val += a[i] * v[i * nc].v;
          traces[side].push_back(val);
        } else if (field == FieldKind::vector) {
          Vec3 uh = Vec3::Zero();
          for (int i = 0; i < cat.size(); ++i) uh += a[i] * vector_value(&v[i * nc]);
          const Vec3 u = push_displacement(pg, uh);
          const Vec3 ut = u - u.dot(n) * n;
          for (int k = 0; k < 3; ++k) traces[side].push_back(ut[k]);
        } else {
          Mat3 sh = Mat3::Zero();
          for (int i = 0; i < cat.size(); ++i) sh += a[i] * tensor_value(&v[i * nc]);
          traces[side].push_back(n.dot(push_stress(pg, sh) * n));
        }
      }
    }
    for (double t : traces[0]) scale = std::max(scale, std::abs(t));
    double geo = 0.0, diam = 0.0;
    for (std::size_t k = 0; k < xs[0].size(); ++k) {
      geo = std::max(geo, (xs[0][k] - xs[1][k]).norm());
      diam = std::max(diam, (xs[0][k] - xs[0][0]).norm());
    }
    double res = geo / std::max(diam, 1e-300);
    for (std::size_t k = 0; k < traces[0].size(); ++k)
      res = std::max(res, std::abs(traces[0][k] - traces[1][k]) / std::max(scale, 1e-300));
    if (res > rep.max_residual) {
      rep.max_residual = res;
      rep.face = static_cast<int>(f);
      rep.element_a = fe[0].first;
      rep.element_b = fe[1].first;
    }
  }
  return rep;
}

}  // namespace tdnns
