#include "tdnns/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tdnns {

namespace {

using Map2D = std::function<Eigen::Vector2d(double, double)>;

struct Cell2D {
  std::vector<int> verts;  // 3 (triangle) or 4 (quad, CCW)
  Map2D map;               // reference (x, y) -> physical (x, y)
  bool patch = false;      // covered by the piezo layer
};

struct Layout2D {
  std::vector<Eigen::Vector2d> verts;
  std::vector<Cell2D> cells;
};

// Builds elements and their curved control points.
class Builder {
 public:
  explicit Builder(int g) { mesh_.geometry_order = g; }

  int vertex(const Vec3& x) {
    mesh_.vertices.push_back(x);
    return static_cast<int>(mesh_.vertices.size()) - 1;
  }

  int element(CellKind kind, std::vector<int> verts, int material, int frame,
              const std::function<Vec3(const Vec3&)>& fn) {
    Element e{kind, std::move(verts), material, frame};
    mesh_.elements.push_back(e);
    if (mesh_.geometry_order > 1) {
      std::vector<Vec3> cp;
      for (const auto& xh : lagrange_nodes(kind, mesh_.geometry_order)) cp.push_back(fn(xh));
      mesh_.control_points.push_back(cp);
    } else {
      mesh_.control_points.emplace_back();
    }
    return static_cast<int>(mesh_.elements.size()) - 1;
  }

  Mesh& mesh() { return mesh_; }

 private:
  Mesh mesh_;
};

// Faces of all elements keyed by sorted vertex ids.
std::map<std::vector<int>, std::vector<std::pair<int, int>>> face_table(const Mesh& m) {
  std::map<std::vector<int>, std::vector<std::pair<int, int>>> t;
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto& rc = reference_cell(m.elements[e].kind);
    for (int f = 0; f < rc.num_faces(); ++f) {
      std::vector<int> key;
      for (int v : rc.faces[f]) key.push_back(m.elements[e].vertices[v]);
      std::sort(key.begin(), key.end());
      t[key].emplace_back(e, f);
    }
  }
  return t;
}

Vec3 face_centroid(const Mesh& m, int e, int f) {
  const auto& rc = reference_cell(m.elements[e].kind);
  Vec3 c = Vec3::Zero();
  for (int v : rc.faces[f]) c += m.vertices[m.elements[e].vertices[v]];
  return c / static_cast<double>(rc.faces[f].size());
}

// Triangle map with an optional curved edge 0 (between vertices 1 and 2):
// linear interpolation plus s^2 D(w), s = x + y, w = y / s, where D is the
// deviation of the curve from the chord.
Map2D curved_triangle(Eigen::Vector2d p0, Eigen::Vector2d p1, Eigen::Vector2d p2,
                      std::function<Eigen::Vector2d(double)> edge12) {
  return [=](double x, double y) -> Eigen::Vector2d {
    Eigen::Vector2d lin = p0 + x * (p1 - p0) + y * (p2 - p0);
    const double s = x + y;
    if (s <= 0.0) return lin;
    const double w = y / s;
    const Eigen::Vector2d dev = edge12(w) - ((1 - w) * p1 + w * p2);
    return lin + s * s * dev;
  };
}

// Triangle in a parameter plane mapped through a smooth chart.
Map2D charted_triangle(Eigen::Vector2d a, Eigen::Vector2d b, Eigen::Vector2d c,
                       std::function<Eigen::Vector2d(const Eigen::Vector2d&)> chart) {
  return [=](double x, double y) -> Eigen::Vector2d { return chart(a + x * (b - a) + y * (c - a)); };
}

Map2D charted_quad(Eigen::Vector2d a, Eigen::Vector2d b, Eigen::Vector2d c, Eigen::Vector2d d,
                   std::function<Eigen::Vector2d(const Eigen::Vector2d&)> chart) {
  return [=](double x, double y) -> Eigen::Vector2d {
    return chart((1 - x) * (1 - y) * a + x * (1 - y) * b + x * y * c + (1 - x) * y * d);
  };
}

// Extrudes a 2-D layout. levels: z coordinates of the plate and (optional) patch layers.
void extrude(Builder& bld, const Layout2D& lay, double z0, double z1, bool patch_only, int material,
             std::map<std::pair<int, int>, int>& vmap, int level_lo, int level_hi) {
  auto vid = [&](int v2, int level, double z) {
    auto [it, ins] = vmap.emplace(std::make_pair(v2, level), -1);
    if (ins) it->second = bld.vertex(Vec3(lay.verts[v2].x(), lay.verts[v2].y(), z));
    return it->second;
  };
  for (const auto& c : lay.cells) {
    if (patch_only && !c.patch) continue;
    std::vector<int> vs;
    for (int v : c.verts) vs.push_back(vid(v, level_lo, z0));
    for (int v : c.verts) vs.push_back(vid(v, level_hi, z1));
    const CellKind kind = c.verts.size() == 3 ? CellKind::prism : CellKind::hexahedron;
    const Map2D map = c.map;
    bld.element(kind, vs, material, 0, [map, z0, z1](const Vec3& xh) {
      const Eigen::Vector2d p = map(xh.x(), xh.y());
      return Vec3(p.x(), p.y(), z0 + xh.z() * (z1 - z0));
    });
  }
}

}  // namespace

// ------------------------------------------------------------------ semicylinder

Mesh gen_semicylinder(const SemicylinderParams& p) {
  if (!(p.t > 0.0 && p.t < p.r && p.L > 0.0) || p.n_circ < 2 || p.n_len < 1 || p.geom_order < 1)
    throw std::invalid_argument("invalid semicylinder dimensions");
  const double rin = p.r - p.t;
  Builder bld(p.geom_order);
  auto vid = [&](int i, int j, int l) { return (l * (p.n_len + 1) + j) * (p.n_circ + 1) + i; };
  for (int l = 0; l < 2; ++l)
    for (int j = 0; j <= p.n_len; ++j)
      for (int i = 0; i <= p.n_circ; ++i) {
        const double th = std::numbers::pi * i / p.n_circ, z = p.L * j / p.n_len, rho = l ? p.r : rin;
        bld.vertex(Vec3(rho * std::cos(th), rho * std::sin(th), z));
      }
  for (int j = 0; j < p.n_len; ++j)
    for (int i = 0; i < p.n_circ; ++i) {
      const int tris[2][3][2] = {{{i, j}, {i + 1, j}, {i + 1, j + 1}}, {{i, j}, {i + 1, j + 1}, {i, j + 1}}};
      for (const auto& t : tris) {
        std::vector<int> vs;
        Eigen::Vector2d par[3];
        for (int a = 0; a < 3; ++a) {
          vs.push_back(vid(t[a][0], t[a][1], 0));
          par[a] = Eigen::Vector2d(std::numbers::pi * t[a][0] / p.n_circ, p.L * t[a][1] / p.n_len);
        }
        for (int a = 0; a < 3; ++a) vs.push_back(vid(t[a][0], t[a][1], 1));
        bld.element(CellKind::prism, vs, 0, 1, [&, par](const Vec3& xh) {
          const Eigen::Vector2d q = par[0] + xh.x() * (par[1] - par[0]) + xh.y() * (par[2] - par[0]);
          const double rho = rin + xh.z() * p.t;
          return Vec3(rho * std::cos(q.x()), rho * std::sin(q.x()), q.y());
        });
      }
    }
  Mesh& m = bld.mesh();
  m.frames = {Frame{}, Frame{Frame::Kind::cylindrical_radial, 0.0, 0.0}};
  const double tol = 1e-9 * p.r;
  for (const auto& [key, owners] : face_table(m)) {
    if (owners.size() != 1) continue;
    const auto [e, f] = owners[0];
    FacetTag t{e, f, MechTag::free, ElecTag::charge_free, -1};
    const auto& rc = reference_cell(CellKind::prism);
    bool all_in = true, all_out = true, all_clamp = true;
    for (int v : rc.faces[f]) {
      const Vec3& x = m.vertices[m.elements[e].vertices[v]];
      const double rho = std::hypot(x.x(), x.y());
      all_in = all_in && std::abs(rho - rin) < tol;
      all_out = all_out && std::abs(rho - p.r) < tol;
      all_clamp = all_clamp && std::abs(x.y()) < tol && x.x() < 0;
    }
    if (all_in) {
      t.elec = ElecTag::electrode;
      t.electrode = 0;
    } else if (all_out) {
      t.elec = ElecTag::electrode;
      t.electrode = 1;
    } else if (all_clamp) {
      t.mech = MechTag::clamped;
    }
    m.facets.push_back(t);
  }
  m.probes.push_back({"tip", Vec3(p.r, 0.0, 0.0)});
  m.finalize();
  return std::move(m);
}

// ------------------------------------------------------------------ patch plate

Mesh gen_patch_plate(const PatchPlateParams& p) {
  const double R = 0.5 * p.patch_d;
  const int n_in = (p.n_ring_layers + 1) / 2;
  const double rc = R - n_in * p.ring_w;
  const double ro = R + (p.n_ring_layers - n_in) * p.ring_w;
  if (!(p.patch_d < p.plate_len) || p.n_circ < 4 || p.n_circ % 4 != 0 || p.n_ring_layers < 1 || p.n_rad < 1 ||
      p.n_core < 1 || !(p.grading >= 1.0) || !(rc > 0.0) || !(ro < 0.5 * p.plate_len) || p.geom_order < 1 || !(p.plate_t > 0) ||
      !(p.patch_t > 0))
    throw std::invalid_argument("patch plate layout is geometrically infeasible");
  const Eigen::Vector2d c(0.5 * p.plate_len, 0.5 * p.plate_len);
  const int nc = p.n_circ;
  const double dth = 2 * std::numbers::pi / nc;
  auto theta = [&](int j) { return std::numbers::pi / 4 + dth * j; };
  auto dir = [](double th) { return Eigen::Vector2d(std::cos(th), std::sin(th)); };
  auto polar = [=](const Eigen::Vector2d& q) -> Eigen::Vector2d { return c + q.x() * dir(q.y()); };
  const double half = 0.5 * p.plate_len;
  auto ogrid = [=](const Eigen::Vector2d& q) -> Eigen::Vector2d {
    // q = (s, theta): blend from the circle of radius ro (s = 0) to the square (s = 1)
    const Eigen::Vector2d e = dir(q.y());
    const double k = std::max(std::abs(e.x()), std::abs(e.y()));
    return (1 - q.x()) * (c + ro * e) + q.x() * (c + (half / k) * e);
  };

  Layout2D lay;
  auto add = [&](const Eigen::Vector2d& x) {
    lay.verts.push_back(x);
    return static_cast<int>(lay.verts.size()) - 1;
  };
  // radial stations: core rings, hexahedral rings, outer blend
  std::vector<double> core_r;
  for (int k = 1; k <= p.n_core; ++k)
    core_r.push_back(rc * (1.0 - std::pow(1.0 - static_cast<double>(k) / p.n_core, p.grading)));
  std::vector<double> ring_r;
  for (int k = 0; k <= p.n_ring_layers; ++k) ring_r.push_back(rc + k * p.ring_w);

  const int center = add(c);
  // circle vertex ids per radius station
  std::vector<std::vector<int>> circ;
  std::vector<double> circ_r;
  for (double r : core_r) {
    circ_r.push_back(r);
    circ.emplace_back();
    for (int j = 0; j < nc; ++j) circ.back().push_back(add(c + r * dir(theta(j))));
  }
  for (int k = 1; k <= p.n_ring_layers; ++k) {
    circ_r.push_back(ring_r[k]);
    circ.emplace_back();
    for (int j = 0; j < nc; ++j) circ.back().push_back(add(c + ring_r[k] * dir(theta(j))));
  }
  std::vector<std::vector<int>> outer(p.n_rad + 1);
  outer[0] = circ.back();
  for (int k = 1; k <= p.n_rad; ++k)
    for (int j = 0; j < nc; ++j)
      outer[k].push_back(add(ogrid(Eigen::Vector2d(std::pow(static_cast<double>(k) / p.n_rad, p.grading), theta(j)))));

  // core fan
  for (int j = 0; j < nc; ++j) {
    const int j1 = (j + 1) % nc;
    const double r1 = core_r[0], t0 = theta(j);
    Cell2D cell;
    cell.verts = {center, circ[0][j], circ[0][j1]};
    cell.map = curved_triangle(c, c + r1 * dir(t0), c + r1 * dir(t0 + dth),
                               [=](double w) { return Eigen::Vector2d(c + r1 * dir(t0 + w * dth)); });
    cell.patch = true;
    lay.cells.push_back(cell);
  }
  // core rings (polar chart), split into triangles
  for (int k = 1; k < p.n_core; ++k)
    for (int j = 0; j < nc; ++j) {
      const int j1 = (j + 1) % nc;
      const Eigen::Vector2d a(core_r[k - 1], theta(j)), b(core_r[k], theta(j)), cc(core_r[k], theta(j) + dth),
          d(core_r[k - 1], theta(j) + dth);
      const int va = circ[k - 1][j], vb = circ[k][j], vc = circ[k][j1], vd = circ[k - 1][j1];
      lay.cells.push_back({{va, vb, vc}, charted_triangle(a, b, cc, polar), true});
      lay.cells.push_back({{va, vc, vd}, charted_triangle(a, cc, d, polar), true});
    }
  // hexahedral rings
  for (int k = 0; k < p.n_ring_layers; ++k) {
    const int ci = p.n_core - 1 + k;
    for (int j = 0; j < nc; ++j) {
      const int j1 = (j + 1) % nc;
      const Eigen::Vector2d a(ring_r[k], theta(j)), b(ring_r[k + 1], theta(j)), cc(ring_r[k + 1], theta(j) + dth),
          d(ring_r[k], theta(j) + dth);
      lay.cells.push_back({{circ[ci][j], circ[ci + 1][j], circ[ci + 1][j1], circ[ci][j1]},
                           charted_quad(a, b, cc, d, polar), k < n_in});
    }
  }
  // outer blend to the square, split into triangles
  for (int k = 0; k < p.n_rad; ++k)
    for (int j = 0; j < nc; ++j) {
      const int j1 = (j + 1) % nc;
      const double s0 = std::pow(static_cast<double>(k) / p.n_rad, p.grading),
                   s1 = std::pow(static_cast<double>(k + 1) / p.n_rad, p.grading);
      const Eigen::Vector2d a(s0, theta(j)), b(s1, theta(j)), cc(s1, theta(j) + dth), d(s0, theta(j) + dth);
      const int va = outer[k][j], vb = outer[k + 1][j], vc = outer[k + 1][j1], vd = outer[k][j1];
      // alternate the diagonal so that square corners are not cut twice
      if ((j + k) % 2 == 0) {
        lay.cells.push_back({{va, vb, vc}, charted_triangle(a, b, cc, ogrid), false});
        lay.cells.push_back({{va, vc, vd}, charted_triangle(a, cc, d, ogrid), false});
      } else {
        lay.cells.push_back({{va, vb, vd}, charted_triangle(a, b, d, ogrid), false});
        lay.cells.push_back({{vb, vc, vd}, charted_triangle(b, cc, d, ogrid), false});
      }
    }

  Builder bld(p.geom_order);
  std::map<std::pair<int, int>, int> vmap;
  extrude(bld, lay, 0.0, p.plate_t, false, 1, vmap, 0, 1);
  extrude(bld, lay, p.plate_t, p.plate_t + p.patch_t, true, 0, vmap, 1, 2);
  Mesh& m = bld.mesh();

  const double tol = 1e-9 * p.plate_len;
  for (const auto& [key, owners] : face_table(m)) {
    if (owners.size() == 2) {
      // patch bottom electrode: interface between piezo and substrate
      for (const auto& [e, f] : owners)
        if (m.elements[e].material == 0 && m.elements[owners[0].first].material != m.elements[owners[1].first].material)
          m.facets.push_back({e, f, MechTag::interior, ElecTag::electrode, 0});
      continue;
    }
    const auto [e, f] = owners[0];
    const Vec3 x = face_centroid(m, e, f);
    const bool piezo = m.elements[e].material == 0;
    FacetTag t{e, f, MechTag::free, piezo ? ElecTag::charge_free : ElecTag::none, -1};
    if (piezo && std::abs(x.z() - (p.plate_t + p.patch_t)) < tol) {
      t.elec = ElecTag::electrode;
      t.electrode = 1;
    }
    if (!piezo && std::abs(x.x()) < tol) t.mech = MechTag::clamped;
    m.facets.push_back(t);
  }
  m.probes.push_back({"corner", Vec3(p.plate_len, 0.0, 0.0)});
  m.finalize();
  return std::move(m);
}

// ------------------------------------------------------------------ hybrid block

Mesh gen_hybrid_block(const BlockParams& p) {
  if (p.nx < 1 || p.ny < 1 || p.nz < 1) throw std::invalid_argument("invalid block resolution");
  if (!(p.affine.determinant() > 0.0)) throw std::invalid_argument("block affine map must preserve orientation");
  std::mt19937 rng(p.seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  const int cols = 2 * p.nx;
  Layout2D lay;
  auto vid2 = [&](int i, int j) { return j * (cols + 1) + i; };
  for (int j = 0; j <= p.ny; ++j)
    for (int i = 0; i <= cols; ++i) {
      double x = static_cast<double>(i) / p.nx, y = static_cast<double>(j) / p.ny;
      if (i > p.nx && i < cols && j > 0 && j < p.ny) {
        x += p.distortion * unif(rng) / p.nx;
        y += p.distortion * unif(rng) / p.ny;
      }
      lay.verts.emplace_back(x + p.shear * y, y);
    }
  auto lin3 = [&lay](int a, int b, int c) -> Map2D {
    const Eigen::Vector2d pa = lay.verts[a], pb = lay.verts[b], pc = lay.verts[c];
    return [=](double x, double y) -> Eigen::Vector2d { return pa + x * (pb - pa) + y * (pc - pa); };
  };
  for (int j = 0; j < p.ny; ++j)
    for (int i = 0; i < cols; ++i) {
      const int a = vid2(i, j), b = vid2(i + 1, j), c = vid2(i + 1, j + 1), d = vid2(i, j + 1);
      if (i < p.nx) {
        const Eigen::Vector2d pa = lay.verts[a], pb = lay.verts[b], pd = lay.verts[d];
        lay.cells.push_back({{a, b, c, d},
                             [=](double x, double y) -> Eigen::Vector2d { return pa + x * (pb - pa) + y * (pd - pa); },
                             false});
      } else if ((i + j) % 2 == 0) {
        lay.cells.push_back({{a, b, c}, lin3(a, b, c), false});
        lay.cells.push_back({{a, c, d}, lin3(a, c, d), false});
      } else {
        lay.cells.push_back({{a, b, d}, lin3(a, b, d), false});
        lay.cells.push_back({{b, c, d}, lin3(b, c, d), false});
      }
    }
  Builder bld(1);
  std::map<std::pair<int, int>, int> vmap;
  for (int k = 0; k < p.nz; ++k)
    extrude(bld, lay, static_cast<double>(k) / p.nz, static_cast<double>(k + 1) / p.nz, false, 0, vmap, k, k + 1);
  Mesh& m = bld.mesh();
  for (auto& v : m.vertices) v = p.affine * v + p.shift;
  for (const auto& [key, owners] : face_table(m))
    if (owners.size() == 1) m.facets.push_back({owners[0].first, owners[0].second, MechTag::free, ElecTag::charge_free, -1});
  m.finalize();
  return std::move(m);
}

}  // namespace tdnns
