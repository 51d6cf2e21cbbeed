#include "tdnns/vtk.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace tdnns {

namespace {

struct SubCells {
  std::vector<Vec3> points;             // reference points
  std::vector<std::vector<int>> cells;  // VTK connectivity into points
  int vtk_type = 12;
};

SubCells subdivide(CellKind kind, int n) {
  SubCells s;
  if (kind == CellKind::hexahedron) {
    auto id = [n](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };
    for (int k = 0; k <= n; ++k)
      for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) s.points.emplace_back(double(i) / n, double(j) / n, double(k) / n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          s.cells.push_back({id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k), id(i, j, k + 1),
                             id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1), id(i, j + 1, k + 1)});
    s.vtk_type = 12;
    return s;
  }
  // triangle lattice (i, j), i + j <= n, per layer k
  std::vector<std::vector<int>> tri_id(n + 1, std::vector<int>(n + 1, -1));
  int per_layer = 0;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i + j <= n; ++i) tri_id[i][j] = per_layer++;
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i + j <= n; ++i) s.points.emplace_back(double(i) / n, double(j) / n, double(k) / n);
  auto wedge = [&](int k, int a, int b, int c) {
    const int lo = k * per_layer, hi = (k + 1) * per_layer;
    // VTK wedge: (0, 1, 2) and (3, 4, 5) with the reference prism orientation reversed
    s.cells.push_back({lo + a, lo + c, lo + b, hi + a, hi + c, hi + b});
  };
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i + j < n; ++i) {
        wedge(k, tri_id[i][j], tri_id[i + 1][j], tri_id[i][j + 1]);
        if (i + j + 1 < n) wedge(k, tri_id[i + 1][j], tri_id[i + 1][j + 1], tri_id[i][j + 1]);
      }
  s.vtk_type = 13;
  return s;
}

}  // namespace

void write_vtk(std::ostream& os, const Solution& s, int subdivision, const std::string& title) {
  if (subdivision < 1) throw std::invalid_argument("subdivision must be at least 1");
  const Mesh& mesh = *s.system->mesh;
  std::vector<FieldValues> values;
  std::vector<std::vector<int>> cells;
  std::vector<int> types;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const SubCells sc = subdivide(mesh.elements[e].kind, subdivision);
    const int base = static_cast<int>(values.size());
    for (const Vec3& xh : sc.points) values.push_back(eval_field(s, e, xh));
    for (auto c : sc.cells) {
      for (int& v : c) v += base;
      cells.push_back(std::move(c));
      types.push_back(sc.vtk_type);
    }
  }
  std::size_t conn = 0;
  for (const auto& c : cells) conn += c.size() + 1;

  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << std::setprecision(9);
  os << "POINTS " << values.size() << " double\n";
  for (const auto& v : values) os << v.x[0] << " " << v.x[1] << " " << v.x[2] << "\n";
  os << "CELLS " << cells.size() << " " << conn << "\n";
  for (const auto& c : cells) {
    os << c.size();
    for (int v : c) os << " " << v;
    os << "\n";
  }
  os << "CELL_TYPES " << cells.size() << "\n";
  for (int t : types) os << t << "\n";
  os << "POINT_DATA " << values.size() << "\n";
  os << "VECTORS u double\n";
  for (const auto& v : values) os << v.u[0] << " " << v.u[1] << " " << v.u[2] << "\n";
  os << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
  for (const auto& v : values) os << v.phi << "\n";
  os << "VECTORS E double\n";
  for (const auto& v : values) os << v.E[0] << " " << v.E[1] << " " << v.E[2] << "\n";
  os << "TENSORS sigma double\n";
  for (const auto& v : values)
    for (int i = 0; i < 3; ++i) os << v.sigma(i, 0) << " " << v.sigma(i, 1) << " " << v.sigma(i, 2) << "\n";
  os << "SCALARS S11 double 1\nLOOKUP_TABLE default\n";
  for (const auto& v : values) os << v.sigma(0, 0) << "\n";
}

void write_vtk_file(const std::string& path, const Solution& s, int subdivision) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_vtk(out, s, subdivision);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace tdnns
