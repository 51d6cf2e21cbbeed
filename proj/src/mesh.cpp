#include "tdnns/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace tdnns {

std::string to_string(MechTag t) {
  switch (t) {
    case MechTag::interior: return "interior";
    case MechTag::clamped: return "clamped";
    case MechTag::free: return "free";
  }
  return "?";
}

std::string to_string(ElecTag t) {
  switch (t) {
    case ElecTag::none: return "none";
    case ElecTag::electrode: return "electrode";
    case ElecTag::charge_free: return "charge_free";
  }
  return "?";
}

Mat3 Frame::rotation(const Vec3& x) const {
  if (kind == Kind::global) return Mat3::Identity();
  const double th = std::atan2(x.y() - cy, x.x() - cx);
  Mat3 R;
  R.col(0) = Vec3(-std::sin(th), std::cos(th), 0.0);
  R.col(1) = Vec3(0.0, 0.0, 1.0);
  R.col(2) = Vec3(std::cos(th), std::sin(th), 0.0);
  return R;
}

namespace {

int expected_vertices(CellKind k) {
  if (k == CellKind::prism) return 6;
  if (k == CellKind::hexahedron) return 8;
  throw std::invalid_argument("mesh elements must be prisms or hexahedra");
}

bool inside_reference(CellKind k, const Vec3& xh, double tol) {
  for (int d = 0; d < 3; ++d)
    if (xh[d] < -tol || xh[d] > 1 + tol) return false;
  if (k == CellKind::prism && xh.x() + xh.y() > 1 + tol) return false;
  return true;
}

}  // namespace

void Mesh::finalize() {
  const int nv = static_cast<int>(vertices.size());
  if (control_points.size() < elements.size()) control_points.resize(elements.size());
  maps_.clear();
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto& el = elements[e];
    if (static_cast<int>(el.vertices.size()) != expected_vertices(el.kind))
      throw std::invalid_argument("element " + std::to_string(e) + " has a wrong vertex count");
    for (int v : el.vertices)
      if (v < 0 || v >= nv) throw std::invalid_argument("element " + std::to_string(e) + " references a missing vertex");
    if (el.frame < 0 || el.frame >= static_cast<int>(frames.size()))
      throw std::invalid_argument("element " + std::to_string(e) + " references a missing frame");
    if (!control_points[e].empty()) {
      maps_.emplace_back(el.kind, geometry_order, control_points[e]);
    } else {
      const auto& rc = reference_cell(el.kind);
      maps_.push_back(ElementMap::interpolate(el.kind, 1, [&](const Vec3& xh) {
        // multilinear blend of the vertices
        for (int i = 0; i < rc.num_vertices(); ++i)
          if ((rc.vertices[i] - xh).norm() < 1e-14) return vertices[el.vertices[i]];
        throw std::logic_error("unexpected node");
        return Vec3();
      }));
    }
  }

  topo_ = Topology{};
  std::map<std::array<int, 2>, int> edge_id;
  std::map<std::vector<int>, int> face_id;
  topo_.vertex_elements.assign(nv, {});
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto& el = elements[e];
    const auto& rc = reference_cell(el.kind);
    std::vector<int> le, lf;
    for (const auto& ed : rc.edges) {
      std::array<int, 2> key{el.vertices[ed[0]], el.vertices[ed[1]]};
      if (key[0] > key[1]) std::swap(key[0], key[1]);
      if (key[0] == key[1]) throw std::invalid_argument("element " + std::to_string(e) + " has a collapsed edge");
      auto [it, inserted] = edge_id.emplace(key, static_cast<int>(topo_.edges.size()));
      if (inserted) {
        topo_.edges.push_back(key);
        topo_.edge_elements.emplace_back();
      }
      topo_.edge_elements[it->second].push_back(static_cast<int>(e));
      le.push_back(it->second);
    }
    for (int f = 0; f < rc.num_faces(); ++f) {
      std::vector<int> key;
      for (int v : rc.faces[f]) key.push_back(el.vertices[v]);
      std::sort(key.begin(), key.end());
      auto [it, inserted] = face_id.emplace(key, static_cast<int>(topo_.faces.size()));
      if (inserted) {
        topo_.faces.push_back(key);
        topo_.face_elements.emplace_back();
      }
      topo_.face_elements[it->second].emplace_back(static_cast<int>(e), f);
      lf.push_back(it->second);
    }
    topo_.element_edges.push_back(le);
    topo_.element_faces.push_back(lf);
    for (int v : el.vertices) topo_.vertex_elements[v].push_back(static_cast<int>(e));
  }
  for (std::size_t f = 0; f < topo_.faces.size(); ++f)
    if (topo_.face_elements[f].size() > 2)
      throw std::invalid_argument("non-manifold face shared by more than two elements");

  facet_index_.clear();
  for (std::size_t i = 0; i < facets.size(); ++i) {
    const auto& t = facets[i];
    if (t.element < 0 || t.element >= num_elements())
      throw std::invalid_argument("facet tag references a missing element");
    if (t.local_face < 0 || t.local_face >= reference_cell(elements[t.element].kind).num_faces())
      throw std::invalid_argument("facet tag references a missing face");
    if (!facet_index_.emplace(std::make_pair(t.element, t.local_face), static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate facet tag");
    if (t.elec == ElecTag::electrode && t.electrode < 0)
      throw std::invalid_argument("electrode facet without electrode id");
  }
  for (const auto& [e, f] : boundary_faces()) {
    const FacetTag* t = facet(e, f);
    if (!t || t->mech == MechTag::interior)
      throw std::invalid_argument("untagged boundary facet (element " + std::to_string(e) + ", face " +
                                  std::to_string(f) + ")");
  }
  for (const auto& t : facets) {
    const int gf = topo_.element_faces[t.element][t.local_face];
    if (t.mech != MechTag::interior && topo_.face_elements[gf].size() != 1)
      throw std::invalid_argument("mechanical boundary tag on an interior face");
  }

  for (std::size_t e = 0; e < elements.size(); ++e) {
    const QuadRule q = gauss_rule(elements[e].kind, 3);
    for (const auto& xh : q.points)
      if (!(maps_[e].eval(xh).J > 0.0))
        throw std::invalid_argument("element " + std::to_string(e) + " has a non-positive Jacobian");
  }
}

const FacetTag* Mesh::facet(int element, int local_face) const {
  const auto it = facet_index_.find({element, local_face});
  return it == facet_index_.end() ? nullptr : &facets[it->second];
}

std::vector<std::pair<int, int>> Mesh::boundary_faces() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& fe : topo_.face_elements)
    if (fe.size() == 1) out.push_back(fe[0]);
  std::sort(out.begin(), out.end());
  return out;
}

const Probe& Mesh::probe(const std::string& name) const {
  for (const auto& p : probes)
    if (p.name == name) return p;
  throw std::invalid_argument("mesh has no probe named '" + name + "'");
}

double Mesh::volume(int quad_points) const {
  double v = 0.0;
  for (int e = 0; e < num_elements(); ++e) {
    const QuadRule q = gauss_rule(elements[e].kind, quad_points);
    for (std::size_t i = 0; i < q.size(); ++i) v += q.weights[i] * maps_[e].eval(q.points[i]).J;
  }
  return v;
}

double Mesh::material_volume(int material, int quad_points) const {
  double v = 0.0;
  for (int e = 0; e < num_elements(); ++e) {
    if (elements[e].material != material) continue;
    const QuadRule q = gauss_rule(elements[e].kind, quad_points);
    for (std::size_t i = 0; i < q.size(); ++i) v += q.weights[i] * maps_[e].eval(q.points[i]).J;
  }
  return v;
}

std::vector<std::pair<int, Vec3>> Mesh::locate_all(const Vec3& x, double tol) const {
  std::vector<std::pair<int, Vec3>> out;
  for (int e = 0; e < num_elements(); ++e) {
    Eigen::AlignedBox3d box;
    for (int v : elements[e].vertices) box.extend(vertices[v]);
    const double pad = 0.5 * box.diagonal().norm();
    if (box.exteriorDistance(x) > pad) continue;
    Vec3 y = elements[e].kind == CellKind::prism ? Vec3(1.0 / 3, 1.0 / 3, 0.5) : Vec3(0.5, 0.5, 0.5);
    for (int it = 0; it < 50; ++it) {
      const MapPoint mp = maps_[e].eval(y);
      const Vec3 dy = mp.F.lu().solve(mp.x - x);
      y -= dy;
      if (dy.norm() < 1e-15) break;
    }
    if (!inside_reference(elements[e].kind, y, 1e-8)) continue;
    for (int d = 0; d < 3; ++d) y[d] = std::clamp(y[d], 0.0, 1.0);
    if (elements[e].kind == CellKind::prism && y[0] + y[1] > 1.0) {
      const double s = y[0] + y[1];
      y[0] /= s;
      y[1] /= s;
    }
    if ((maps_[e].phi(y) - x).norm() <= tol) out.emplace_back(e, y);
  }
  return out;
}

bool Mesh::locate(const Vec3& x, int& element, Vec3& xh, double tol) const {
  double best = 1e300;
  for (const auto& [e, y] : locate_all(x, tol)) {
    const double err = (maps_[e].phi(y) - x).norm();
    if (err < best) {
      best = err;
      element = e;
      xh = y;
    }
  }
  return best <= tol;
}

// ------------------------------------------------------------------ text format

void write_mesh(std::ostream& os, const Mesh& m) {
  os << std::setprecision(17);
  os << "tdnns-mesh 1\n";
  os << "vertices " << m.vertices.size() << "\n";
  for (const auto& v : m.vertices) os << v.x() << ' ' << v.y() << ' ' << v.z() << "\n";
  os << "elements " << m.elements.size() << " geometry_order " << m.geometry_order << "\n";
  for (const auto& e : m.elements) {
    os << (e.kind == CellKind::prism ? "prism" : "hex");
    for (int v : e.vertices) os << ' ' << v;
    os << ' ' << e.material << ' ' << e.frame << "\n";
  }
  os << "frames " << m.frames.size() << "\n";
  for (const auto& f : m.frames) {
    if (f.kind == Frame::Kind::global)
      os << "global\n";
    else
      os << "cylindrical_radial " << f.cx << ' ' << f.cy << "\n";
  }
  std::size_t curved = 0;
  for (const auto& c : m.control_points) curved += c.empty() ? 0 : 1;
  os << "control_points " << curved << "\n";
  for (std::size_t e = 0; e < m.control_points.size(); ++e) {
    if (m.control_points[e].empty()) continue;
    os << e << ' ' << m.control_points[e].size() << "\n";
    for (const auto& p : m.control_points[e]) os << p.x() << ' ' << p.y() << ' ' << p.z() << "\n";
  }
  os << "facets " << m.facets.size() << "\n";
  for (const auto& f : m.facets)
    os << f.element << ' ' << f.local_face << ' ' << to_string(f.mech) << ' ' << to_string(f.elec) << ' '
       << f.electrode << "\n";
  os << "probes " << m.probes.size() << "\n";
  for (const auto& p : m.probes) os << p.name << ' ' << p.x.x() << ' ' << p.x.y() << ' ' << p.x.z() << "\n";
  os << "end\n";
}

namespace {

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  std::string word() {
    std::string w;
    if (!(is_ >> w)) fail("unexpected end of mesh file");
    return w;
  }
  void expect(const std::string& w) {
    const std::string got = word();
    if (got != w) fail("expected '" + w + "' but found '" + got + "'");
  }
  long integer() {
    const std::string w = word();
    try {
      std::size_t pos = 0;
      const long v = std::stol(w, &pos);
      if (pos != w.size()) throw std::invalid_argument(w);
      return v;
    } catch (const std::exception&) {
      fail("expected an integer but found '" + w + "'");
    }
    return 0;
  }
  double real() {
    const std::string w = word();
    try {
      std::size_t pos = 0;
      const double v = std::stod(w, &pos);
      if (pos != w.size()) throw std::invalid_argument(w);
      return v;
    } catch (const std::exception&) {
      fail("expected a number but found '" + w + "'");
    }
    return 0.0;
  }
  Vec3 vec() {
    const double x = real(), y = real(), z = real();
    return Vec3(x, y, z);
  }
  [[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("mesh file: " + msg); }

 private:
  std::istream& is_;
};

MechTag parse_mech(Reader& r, const std::string& w) {
  if (w == "interior") return MechTag::interior;
  if (w == "clamped") return MechTag::clamped;
  if (w == "free") return MechTag::free;
  r.fail("unknown mechanical tag '" + w + "'");
}

ElecTag parse_elec(Reader& r, const std::string& w) {
  if (w == "none") return ElecTag::none;
  if (w == "electrode") return ElecTag::electrode;
  if (w == "charge_free") return ElecTag::charge_free;
  r.fail("unknown electric tag '" + w + "'");
}

}  // namespace

Mesh read_mesh(std::istream& is) {
  Reader r(is);
  Mesh m;
  r.expect("tdnns-mesh");
  if (r.integer() != 1) r.fail("unsupported version");
  r.expect("vertices");
  const long nv = r.integer();
  for (long i = 0; i < nv; ++i) m.vertices.push_back(r.vec());
  r.expect("elements");
  const long ne = r.integer();
  r.expect("geometry_order");
  m.geometry_order = static_cast<int>(r.integer());
  for (long i = 0; i < ne; ++i) {
    Element e;
    const std::string kind = r.word();
    if (kind == "prism")
      e.kind = CellKind::prism;
    else if (kind == "hex")
      e.kind = CellKind::hexahedron;
    else
      r.fail("unknown element kind '" + kind + "'");
    e.vertices.resize(e.kind == CellKind::prism ? 6 : 8);
    for (auto& v : e.vertices) v = static_cast<int>(r.integer());
    e.material = static_cast<int>(r.integer());
    e.frame = static_cast<int>(r.integer());
    m.elements.push_back(e);
  }
  r.expect("frames");
  const long nf = r.integer();
  m.frames.clear();
  for (long i = 0; i < nf; ++i) {
    Frame f;
    const std::string kind = r.word();
    if (kind == "cylindrical_radial") {
      f.kind = Frame::Kind::cylindrical_radial;
      f.cx = r.real();
      f.cy = r.real();
    } else if (kind != "global") {
      r.fail("unknown frame kind '" + kind + "'");
    }
    m.frames.push_back(f);
  }
  r.expect("control_points");
  const long nc = r.integer();
  m.control_points.assign(m.elements.size(), {});
  for (long i = 0; i < nc; ++i) {
    const long e = r.integer();
    const long n = r.integer();
    if (e < 0 || e >= ne) r.fail("control points for a missing element");
    for (long k = 0; k < n; ++k) m.control_points[e].push_back(r.vec());
  }
  r.expect("facets");
  const long nt = r.integer();
  for (long i = 0; i < nt; ++i) {
    FacetTag t;
    t.element = static_cast<int>(r.integer());
    t.local_face = static_cast<int>(r.integer());
    t.mech = parse_mech(r, r.word());
    t.elec = parse_elec(r, r.word());
    t.electrode = static_cast<int>(r.integer());
    m.facets.push_back(t);
  }
  r.expect("probes");
  const long np = r.integer();
  for (long i = 0; i < np; ++i) {
    Probe p;
    p.name = r.word();
    p.x = r.vec();
    m.probes.push_back(p);
  }
  r.expect("end");
  m.finalize();
  return m;
}

void write_mesh_file(const std::string& path, const Mesh& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_mesh(os, m);
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open mesh file '" + path + "'");
  return read_mesh(is);
}

}  // namespace tdnns
