#include "tdnns/basis.hpp"

#include "tdnns/legendre.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace tdnns {

int field_components(FieldKind f) {
  switch (f) {
    case FieldKind::scalar: return 1;
    case FieldKind::vector: return 3;
    case FieldKind::tensor: return 6;
  }
  return 0;
}

std::string to_string(FieldKind f) {
  switch (f) {
    case FieldKind::scalar: return "potential";
    case FieldKind::vector: return "displacement";
    case FieldKind::tensor: return "stress";
  }
  return "?";
}

std::string to_string(CellKind c) {
  switch (c) {
    case CellKind::segment: return "segment";
    case CellKind::triangle: return "triangle";
    case CellKind::quadrilateral: return "quadrilateral";
    case CellKind::prism: return "prism";
    case CellKind::hexahedron: return "hexahedron";
  }
  return "?";
}

namespace {

// Collects functions while an enumeration runs; info is recorded only on request.
struct Emitter {
  std::vector<Dual3>* out = nullptr;
  std::vector<ShapeInfo>* infos = nullptr;

  void add(const ShapeInfo& s, std::initializer_list<Dual3> comps) {
    if (infos) infos->push_back(s);
    if (out) out->insert(out->end(), comps.begin(), comps.end());
  }
};

template <class T>
std::array<T, 3> barycentrics(double x, double y) {
  return {T(1.0) - T::variable(x, 0) - T::variable(y, 1), T::variable(x, 0), T::variable(y, 1)};
}

template <class T>
std::vector<T> sl_edge(int g, int n, const std::array<T, 3>& lam) {
  const auto& e = reference_cell(CellKind::triangle).edges[g];
  return scaled_legendre_all(n, lam[e[0]] - lam[e[1]], lam[e[0]] + lam[e[1]]);
}

// q[i][j] for i + j <= n.
template <class T>
std::vector<std::vector<T>> tri_q(int n, const std::array<T, 3>& lam) {
  std::vector<std::vector<T>> q(n + 1);
  if (n < 0) return q;
  const auto s = sl_edge(2, n, lam);
  const auto l = legendre_all(n, lam[2] - lam[0] - lam[1]);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j) q[i].push_back(s[i] * l[j]);
  return q;
}

// H1-type 1-D functions: vertex 0, vertex 1, then t(1-t) l_m(2t-1) for m < nb.
struct Seg1D {
  std::vector<Dual3> f;
  std::vector<int> side;  // 0 / 1 for vertex functions, -1 for bubbles
  std::vector<int> index;
};

Seg1D h1_segment(double t, int dir, int nb) {
  const Dual3 x = Dual3::variable(t, dir);
  const Dual3 l0 = Dual3(1.0) - x;
  Seg1D s;
  s.f = {l0, x};
  s.side = {0, 1};
  s.index = {0, 0};
  if (nb > 0) {
    const auto l = legendre_all(nb - 1, 2.0 * x - Dual3(1.0));
    const Dual3 b = l0 * x;
    for (int m = 0; m < nb; ++m) {
      s.f.push_back(b * l[m]);
      s.side.push_back(-1);
      s.index.push_back(m);
    }
  }
  return s;
}

std::vector<Dual3> legendre_dir(int n, double t, int dir) {
  return legendre_all(n, 2.0 * Dual3::variable(t, dir) - Dual3(1.0));
}

// Triangle scalar function with its triangle entity.
struct TriScalar {
  Dual3 f;
  EntityRef ent;
  int family;
  std::array<int, 3> idx;
};

// Continuous triangle basis of order q.
std::vector<TriScalar> triangle_h1(int q, double x, double y) {
  const auto lam = barycentrics<Dual3>(x, y);
  const auto& tri = reference_cell(CellKind::triangle);
  std::vector<TriScalar> out;
  for (int a = 0; a < 3; ++a) out.push_back({lam[a], {EntityType::vertex, a}, 0, {0, 0, 0}});
  for (int g = 0; g < 3; ++g) {
    if (q < 2) break;
    const auto s = sl_edge(g, q - 2, lam);
    const Dual3 b = lam[tri.edges[g][0]] * lam[tri.edges[g][1]];
    for (int i = 0; i <= q - 2; ++i) out.push_back({b * s[i], {EntityType::edge, g}, 0, {i, 0, 0}});
  }
  if (q >= 3) {
    const auto qq = tri_q(q - 3, lam);
    const Dual3 bubble = lam[0] * lam[1] * lam[2];
    for (int i = 0; i <= q - 3; ++i)
      for (int j = 0; i + j <= q - 3; ++j) out.push_back({bubble * qq[i][j], {EntityType::cell, 0}, 0, {i, j, 0}});
  }
  return out;
}

struct TriVector {
  Dual3 x, y;
  EntityRef ent;
  int family;
  std::array<int, 3> idx;
};

// Tangential-continuous triangle basis of full order p.
std::vector<TriVector> triangle_hcurl(int p, double x, double y) {
  const auto lam = barycentrics<Dual3>(x, y);
  const auto lamj = barycentrics<Jet2>(x, y);
  const auto& tri = reference_cell(CellKind::triangle);
  const double grad[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
  std::vector<TriVector> out;
  for (int g = 0; g < 3; ++g) {
    const int a = tri.edges[g][0], b = tri.edges[g][1];
    out.push_back({lam[a] * grad[b][0] - lam[b] * grad[a][0], lam[a] * grad[b][1] - lam[b] * grad[a][1],
                   {EntityType::edge, g}, 0, {0, 0, 0}});
    const auto s = sl_edge(g, p - 1, lamj);
    const Jet2 bub = lamj[a] * lamj[b];
    for (int i = 0; i <= p - 1; ++i) {
      const Jet2 f = bub * s[i];
      out.push_back({f.partial(0), f.partial(1), {EntityType::edge, g}, 1, {i, 0, 0}});
    }
  }
  for (int g = 0; g < 3 && p >= 2; ++g) {
    const int a = tri.edges[g][0], b = tri.edges[g][1];
    const auto s = sl_edge(g, p - 2, lam);
    const Dual3 bub = lam[a] * lam[b];
    for (int i = 0; i <= p - 2; ++i) {
      const Dual3 f = bub * s[i];
      out.push_back({f * grad[g][0], f * grad[g][1], {EntityType::cell, 0}, 0, {g, i, 0}});
    }
  }
  if (p >= 3) {
    const auto qq = tri_q(p - 3, lam);
    const Dual3 bubble = lam[0] * lam[1] * lam[2];
    for (int i = 0; i <= p - 3; ++i)
      for (int j = 0; i + j <= p - 3; ++j) {
        const Dual3 f = bubble * qq[i][j];
        out.push_back({f, Dual3(0.0), {EntityType::cell, 0}, 1, {i, j, 0}});
        out.push_back({Dual3(0.0), f, {EntityType::cell, 0}, 2, {i, j, 0}});
      }
  }
  return out;
}

// Prism entity of (triangle entity) x (segment side, -1 = both levels).
EntityRef prism_entity(EntityRef tri_ent, int side) {
  const auto& tri = reference_cell(CellKind::triangle);
  std::vector<int> tv = tri.entity_vertices(tri_ent.type == EntityType::cell ? EntityRef{EntityType::cell, 0} : tri_ent);
  std::vector<int> pv;
  for (int v : tv) {
    if (side != 1) pv.push_back(v);
    if (side != 0) pv.push_back(v + 3);
  }
  return reference_cell(CellKind::prism).entity_of(pv);
}

// Hexahedron entity of the vertices matching the given per-direction sides (-1 = free).
EntityRef hex_entity(const std::array<int, 3>& side) {
  std::vector<int> verts;
  for (int bz = 0; bz < 2; ++bz)
    for (int by = 0; by < 2; ++by)
      for (int bx = 0; bx < 2; ++bx) {
        const int b[3] = {bx, by, bz};
        bool ok = true;
        for (int d = 0; d < 3; ++d) ok = ok && (side[d] < 0 || side[d] == b[d]);
        if (ok) verts.push_back(hex_vertex(bx, by, bz));
      }
  return reference_cell(CellKind::hexahedron).entity_of(verts);
}

// ---------------------------------------------------------------- stress

void enum_stress_prism(int p, const Vec3& xh, Emitter& em) {
  const auto lam = barycentrics<Dual3>(xh.x(), xh.y());
  const Dual3 z = Dual3::variable(xh.z(), 2);
  const Dual3 lz[2] = {Dual3(1.0) - z, z};
  const auto lk = legendre_dir(p + 1, xh.z(), 2);
  const auto q = tri_q(p + 1, lam);
  const Dual3 zero(0.0);

  auto add_planar = [&](const ShapeInfo& s, const Dual3& f, int g) {
    const Eigen::Matrix2d S = unit_edge_tensor(g);
    em.add(s, {f * S(0, 0), f * S(1, 1), zero, zero, zero, f * S(0, 1)});
  };

  for (int g = 0; g < 3; ++g) {
    const auto s = sl_edge(g, p, lam);
    for (int i = 0; i <= p; ++i)
      for (int k = 0; k <= p; ++k) add_planar({{EntityType::face, 2 + g}, 0, {i, k, g}}, s[i] * lk[k], g);
  }
  for (int f = 0; f < 2; ++f)
    for (int i = 0; i <= p; ++i)
      for (int j = 0; i + j <= p; ++j) {
        const Dual3 v = q[i][j] * lz[f];
        em.add({{EntityType::face, f}, 0, {i, j, 0}}, {zero, zero, v, zero, zero, zero});
      }
  for (int g = 0; g < 3; ++g)
    for (int i = 0; i <= p - 1; ++i)
      for (int j = 0; i + j <= p - 1; ++j)
        for (int k = 0; k <= p + 1; ++k)
          add_planar({{EntityType::cell, 0}, g, {i, j, k}}, q[i][j] * lam[g] * lk[k], g);
  const Dual3 zb = lz[0] * lz[1];
  for (int i = 0; i <= p + 1; ++i)
    for (int j = 0; i + j <= p + 1; ++j)
      for (int k = 0; k <= p - 1; ++k) {
        const Dual3 v = q[i][j] * zb * lk[k];
        em.add({{EntityType::cell, 0}, 3, {i, j, k}}, {zero, zero, v, zero, zero, zero});
      }
  for (int xi = 0; xi < 2; ++xi)
    for (int i = 0; i <= p; ++i)
      for (int j = 0; i + j <= p; ++j)
        for (int k = 0; k <= p; ++k) {
          const Dual3 v = 0.5 * (q[i][j] * lk[k]);
          if (xi == 0)
            em.add({{EntityType::cell, 0}, 4, {i, j, k}}, {zero, zero, zero, zero, v, zero});
          else
            em.add({{EntityType::cell, 0}, 5, {i, j, k}}, {zero, zero, zero, v, zero, zero});
        }
}

void enum_stress_hex(int p, const Vec3& xh, Emitter& em) {
  std::array<std::vector<Dual3>, 3> l;
  std::array<std::array<Dual3, 2>, 3> lam;
  for (int d = 0; d < 3; ++d) {
    l[d] = legendre_dir(p + 1, xh[d], d);
    const Dual3 t = Dual3::variable(xh[d], d);
    lam[d] = {Dual3(1.0) - t, t};
  }
  const Dual3 zero(0.0);
  auto emit_slot = [&](const ShapeInfo& s, int slot, const Dual3& v) {
    std::array<Dual3, 6> c{zero, zero, zero, zero, zero, zero};
    c[slot] = v;
    em.add(s, {c[0], c[1], c[2], c[3], c[4], c[5]});
  };
  for (int d = 0; d < 3; ++d) {
    const int e1 = d == 0 ? 1 : 0, e2 = d == 2 ? 1 : 2;
    for (int s = 0; s < 2; ++s)
      for (int i = 0; i <= p; ++i)
        for (int j = 0; j <= p; ++j)
          emit_slot({{EntityType::face, 2 * d + s}, 0, {i, j, 0}}, d, l[e1][i] * l[e2][j] * lam[d][s]);
  }
  for (int d = 0; d < 3; ++d) {
    const int e1 = d == 0 ? 1 : 0, e2 = d == 2 ? 1 : 2;
    const Dual3 b = lam[d][0] * lam[d][1];
    for (int i = 0; i <= p - 1; ++i)
      for (int j = 0; j <= p + 1; ++j)
        for (int k = 0; k <= p + 1; ++k)
          emit_slot({{EntityType::cell, 0}, d, {i, j, k}}, d, b * l[d][i] * l[e1][j] * l[e2][k]);
  }
  const int pairs[3][3] = {{0, 1, 2}, {0, 2, 1}, {1, 2, 0}};
  for (int pr = 0; pr < 3; ++pr) {
    const int a = pairs[pr][0], b = pairs[pr][1], c = pairs[pr][2];
    for (int i = 0; i <= p; ++i)
      for (int j = 0; j <= p; ++j)
        for (int k = 0; k <= p + 1; ++k)
          emit_slot({{EntityType::cell, 0}, 3 + pr, {i, j, k}}, voigt_index(a, b), 0.5 * (l[a][i] * l[b][j] * l[c][k]));
  }
}

// ---------------------------------------------------------------- displacement

void enum_hcurl_hex(int p, const Vec3& xh, Emitter& em) {
  std::array<Seg1D, 3> h;
  std::array<std::vector<Dual3>, 3> l;
  for (int d = 0; d < 3; ++d) {
    h[d] = h1_segment(xh[d], d, p);
    l[d] = legendre_dir(p, xh[d], d);
  }
  const Dual3 zero(0.0);
  for (int c = 0; c < 3; ++c) {
    const int a = c == 0 ? 1 : 0, b = c == 2 ? 1 : 2;
    for (std::size_t ja = 0; ja < h[a].f.size(); ++ja)
      for (std::size_t jb = 0; jb < h[b].f.size(); ++jb)
        for (int i = 0; i <= p; ++i) {
          std::array<int, 3> side{-1, -1, -1};
          side[a] = h[a].side[ja];
          side[b] = h[b].side[jb];
          const Dual3 v = l[c][i] * h[a].f[ja] * h[b].f[jb];
          std::array<Dual3, 3> comp{zero, zero, zero};
          comp[c] = v;
          em.add({hex_entity(side), c, {i, h[a].index[ja], h[b].index[jb]}}, {comp[0], comp[1], comp[2]});
        }
  }
}

void enum_hcurl_prism(int p, const Vec3& xh, Emitter& em) {
  const auto tv = triangle_hcurl(p, xh.x(), xh.y());
  const auto ts = triangle_h1(p + 1, xh.x(), xh.y());
  const Seg1D hz = h1_segment(xh.z(), 2, p);
  const auto lz = legendre_dir(p, xh.z(), 2);
  const Dual3 zero(0.0);
  for (std::size_t k = 0; k < hz.f.size(); ++k)
    for (const auto& w : tv)
      em.add({prism_entity(w.ent, hz.side[k]), w.family, {w.idx[0], w.idx[1], static_cast<int>(k)}},
             {w.x * hz.f[k], w.y * hz.f[k], zero});
  for (int k = 0; k <= p; ++k)
    for (const auto& s : ts)
      em.add({prism_entity(s.ent, -1), 10 + s.family, {s.idx[0], s.idx[1], k}}, {zero, zero, s.f * lz[k]});
}

// ---------------------------------------------------------------- potential

void enum_h1_hex(int p, const Vec3& xh, Emitter& em) {
  std::array<Seg1D, 3> h;
  for (int d = 0; d < 3; ++d) h[d] = h1_segment(xh[d], d, p - 1);
  for (std::size_t a = 0; a < h[0].f.size(); ++a)
    for (std::size_t b = 0; b < h[1].f.size(); ++b)
      for (std::size_t c = 0; c < h[2].f.size(); ++c)
        em.add({hex_entity({h[0].side[a], h[1].side[b], h[2].side[c]}), 0,
                {h[0].index[a], h[1].index[b], h[2].index[c]}},
               {h[0].f[a] * h[1].f[b] * h[2].f[c]});
}

void enum_h1_prism(int p, const Vec3& xh, Emitter& em) {
  const auto ts = triangle_h1(p, xh.x(), xh.y());
  const Seg1D hz = h1_segment(xh.z(), 2, p - 1);
  for (std::size_t k = 0; k < hz.f.size(); ++k)
    for (const auto& s : ts)
      em.add({prism_entity(s.ent, hz.side[k]), 0, {s.idx[0], s.idx[1], static_cast<int>(k)}}, {s.f * hz.f[k]});
}

using Enumerator = void (*)(int, const Vec3&, Emitter&);

ShapeCatalog make_catalog(CellKind cell, FieldKind field, int p, Enumerator fn) {
  return ShapeCatalog(cell, field, p, [p, fn](const Vec3& xh, std::vector<Dual3>& out) {
    out.clear();
    Emitter em{&out, nullptr};
    fn(p, xh, em);
  });
}

Enumerator pick(FieldKind field, CellKind cell) {
  const bool prism = cell == CellKind::prism;
  if (!prism && cell != CellKind::hexahedron)
    throw std::invalid_argument("unsupported cell kind for shape functions: " + to_string(cell));
  switch (field) {
    case FieldKind::tensor: return prism ? enum_stress_prism : enum_stress_hex;
    case FieldKind::vector: return prism ? enum_hcurl_prism : enum_hcurl_hex;
    case FieldKind::scalar: return prism ? enum_h1_prism : enum_h1_hex;
  }
  return nullptr;
}

}  // namespace

ShapeCatalog::ShapeCatalog(CellKind cell, FieldKind field, int order, Evaluator eval)
    : cell_(cell), field_(field), order_(order), eval_(std::move(eval)) {
  Emitter em{nullptr, &info_};
  pick(field, cell)(order, Vec3(0.25, 0.25, 0.5), em);
  const auto& rc = reference_cell(cell);
  by_entity_[0].resize(rc.num_vertices());
  by_entity_[1].resize(rc.num_edges());
  by_entity_[2].resize(rc.num_faces());
  by_entity_[3].resize(1);
  for (int i = 0; i < size(); ++i) {
    const auto& e = info_[i].entity;
    by_entity_[static_cast<int>(e.type)][e.index].push_back(i);
  }
}

const std::vector<int>& ShapeCatalog::functions_on(EntityRef e) const {
  return by_entity_[static_cast<int>(e.type)].at(e.index);
}

int ShapeCatalog::count(EntityType t) const {
  int n = 0;
  for (const auto& v : by_entity_[static_cast<int>(t)]) n += static_cast<int>(v.size());
  return n;
}

ShapeCatalog stress_shapes_prism(int p) {
  if (p < 1) throw std::invalid_argument("stress order must be at least 1");
  return make_catalog(CellKind::prism, FieldKind::tensor, p, enum_stress_prism);
}

ShapeCatalog stress_shapes_hex(int p) {
  if (p < 1) throw std::invalid_argument("stress order must be at least 1");
  return make_catalog(CellKind::hexahedron, FieldKind::tensor, p, enum_stress_hex);
}

ShapeCatalog displacement_shapes(CellKind cell, int p) {
  if (p < 1) throw std::invalid_argument("displacement order must be at least 1");
  return make_catalog(cell, FieldKind::vector, p, pick(FieldKind::vector, cell));
}

ShapeCatalog potential_shapes(CellKind cell, int p) {
  if (p < 1) throw std::invalid_argument("potential order must be at least 1");
  return make_catalog(cell, FieldKind::scalar, p, pick(FieldKind::scalar, cell));
}

const ShapeCatalog& catalog(FieldKind field, CellKind cell, int p) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<ShapeCatalog>> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_tuple(static_cast<int>(field), static_cast<int>(cell), p);
  auto it = cache.find(key);
  if (it == cache.end()) {
    std::unique_ptr<ShapeCatalog> c;
    switch (field) {
      case FieldKind::tensor:
        c = std::make_unique<ShapeCatalog>(cell == CellKind::prism ? stress_shapes_prism(p) : stress_shapes_hex(p));
        break;
      case FieldKind::vector: c = std::make_unique<ShapeCatalog>(displacement_shapes(cell, p)); break;
      case FieldKind::scalar: c = std::make_unique<ShapeCatalog>(potential_shapes(cell, p)); break;
    }
    it = cache.emplace(key, std::move(c)).first;
  }
  return *it->second;
}

std::vector<Dual3> scaled_legendre_edge(int g, int n, double x, double y) {
  return sl_edge(g, n, barycentrics<Dual3>(x, y));
}

std::vector<std::vector<Dual3>> triangle_poly_q(int n, double x, double y) {
  return tri_q(n, barycentrics<Dual3>(x, y));
}

}  // namespace tdnns
