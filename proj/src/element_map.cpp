#include "tdnns/element_map.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace tdnns {

namespace {

struct MonomialSet {
  std::vector<std::array<int, 3>> exps;
  Eigen::MatrixXd vinv;  // inverse Vandermonde at the Lagrange nodes
};

std::vector<std::array<int, 3>> monomials(CellKind kind, int g) {
  std::vector<std::array<int, 3>> e;
  for (int c = 0; c <= g; ++c)
    for (int b = 0; b <= g; ++b)
      for (int a = 0; a <= g; ++a) {
        if (kind == CellKind::prism && a + b > g) continue;
        e.push_back({a, b, c});
      }
  return e;
}

const MonomialSet& monomial_set(CellKind kind, int g) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, MonomialSet> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_pair(static_cast<int>(kind), g);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  MonomialSet s;
  s.exps = monomials(kind, g);
  const auto nodes = lagrange_nodes(kind, g);
  const int n = static_cast<int>(nodes.size());
  Eigen::MatrixXd V(n, n);
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < n; ++m) {
      const auto& e = s.exps[m];
      V(i, m) = std::pow(nodes[i].x(), e[0]) * std::pow(nodes[i].y(), e[1]) * std::pow(nodes[i].z(), e[2]);
    }
  s.vinv = V.fullPivLu().inverse();
  return cache.emplace(key, std::move(s)).first->second;
}

// x^a with first and second derivatives.
void power_jet(double x, int a, double& v, double& d, double& dd) {
  v = a >= 0 ? std::pow(x, a) : 0.0;
  d = a >= 1 ? a * std::pow(x, a - 1) : 0.0;
  dd = a >= 2 ? a * (a - 1) * std::pow(x, a - 2) : 0.0;
}

}  // namespace

std::vector<Vec3> lagrange_nodes(CellKind kind, int g) {
  if (g < 1) throw std::invalid_argument("geometry order must be at least 1");
  std::vector<Vec3> n;
  const double h = 1.0 / g;
  if (kind == CellKind::hexahedron) {
    for (int k = 0; k <= g; ++k)
      for (int j = 0; j <= g; ++j)
        for (int i = 0; i <= g; ++i) n.emplace_back(i * h, j * h, k * h);
  } else if (kind == CellKind::prism) {
    for (int k = 0; k <= g; ++k)
      for (int j = 0; j <= g; ++j)
        for (int i = 0; i + j <= g; ++i) n.emplace_back(i * h, j * h, k * h);
  } else {
    throw std::invalid_argument("element maps exist for prisms and hexahedra only");
  }
  return n;
}

ElementMap::ElementMap(CellKind kind, int g, const std::vector<Vec3>& nodes)
    : kind_(kind), order_(g), nodes_(nodes) {
  const auto& s = monomial_set(kind, g);
  if (nodes.size() != s.exps.size()) throw std::invalid_argument("wrong number of geometry control points");
  Eigen::Matrix<double, Eigen::Dynamic, 3> X(nodes.size(), 3);
  for (std::size_t i = 0; i < nodes.size(); ++i) X.row(i) = nodes[i].transpose();
  coeff_ = s.vinv * X;
}

MapPoint ElementMap::eval(const Vec3& xh) const {
  const auto& s = monomial_set(kind_, order_);
  MapPoint mp;
  mp.x.setZero();
  mp.F.setZero();
  for (auto& h : mp.H) h.setZero();
  for (std::size_t m = 0; m < s.exps.size(); ++m) {
    double v[3], d[3], dd[3];
    for (int k = 0; k < 3; ++k) power_jet(xh[k], s.exps[m][k], v[k], d[k], dd[k]);
    const double val = v[0] * v[1] * v[2];
    const double g[3] = {d[0] * v[1] * v[2], v[0] * d[1] * v[2], v[0] * v[1] * d[2]};
    double hh[3][3];
    hh[0][0] = dd[0] * v[1] * v[2];
    hh[1][1] = v[0] * dd[1] * v[2];
    hh[2][2] = v[0] * v[1] * dd[2];
    hh[0][1] = hh[1][0] = d[0] * d[1] * v[2];
    hh[0][2] = hh[2][0] = d[0] * v[1] * d[2];
    hh[1][2] = hh[2][1] = v[0] * d[1] * d[2];
    for (int i = 0; i < 3; ++i) {
      const double c = coeff_(m, i);
      if (c == 0.0) continue;
      mp.x[i] += c * val;
      for (int j = 0; j < 3; ++j) {
        mp.F(i, j) += c * g[j];
        for (int k = 0; k < 3; ++k) mp.H[i](j, k) += c * hh[j][k];
      }
    }
  }
  mp.J = mp.F.determinant();
  return mp;
}

Vec3 ElementMap::phi(const Vec3& xh) const { return eval(xh).x; }

}  // namespace tdnns
