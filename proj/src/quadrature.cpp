#include "tdnns/quadrature.hpp"

#include "tdnns/legendre.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace tdnns {

namespace {

struct Gauss1D {
  std::vector<double> x, w;  // on [0, 1]
};

Gauss1D compute_gauss(int n) {
  Gauss1D g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const double dt = legendre(n, t) / legendre_derivative(n, t);
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    const double dp = legendre_derivative(n, t);
    g.x[n - 1 - i] = 0.5 * (t + 1.0);
    g.w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);  // 2/((1-t^2)P'^2) halved
  }
  return g;
}

const Gauss1D& gauss1d(int n) {
  static std::mutex mu;
  static std::map<int, Gauss1D> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss(n)).first;
  return it->second;
}

}  // namespace

QuadRule gauss_segment(int n) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one point");
  const auto& g = gauss1d(n);
  QuadRule q;
  for (int i = 0; i < n; ++i) {
    q.points.emplace_back(g.x[i], 0.0, 0.0);
    q.weights.push_back(g.w[i]);
  }
  return q;
}

QuadRule gauss_triangle(int n) {
  const auto& g = gauss1d(n);
  QuadRule q;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // (u, v) in the unit square -> (u, v (1 - u))
      const double u = g.x[i], v = g.x[j];
      q.points.emplace_back(u, v * (1.0 - u), 0.0);
      q.weights.push_back(g.w[i] * g.w[j] * (1.0 - u));
    }
  return q;
}

QuadRule gauss_quadrilateral(int n) {
  const auto& g = gauss1d(n);
  QuadRule q;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      q.points.emplace_back(g.x[i], g.x[j], 0.0);
      q.weights.push_back(g.w[i] * g.w[j]);
    }
  return q;
}

QuadRule gauss_prism(int n) {
  const QuadRule tri = gauss_triangle(n);
  const auto& g = gauss1d(n);
  QuadRule q;
  for (std::size_t a = 0; a < tri.size(); ++a)
    for (int k = 0; k < n; ++k) {
      q.points.emplace_back(tri.points[a].x(), tri.points[a].y(), g.x[k]);
      q.weights.push_back(tri.weights[a] * g.w[k]);
    }
  return q;
}

QuadRule gauss_hexahedron(int n) {
  const auto& g = gauss1d(n);
  QuadRule q;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        q.points.emplace_back(g.x[i], g.x[j], g.x[k]);
        q.weights.push_back(g.w[i] * g.w[j] * g.w[k]);
      }
  return q;
}

QuadRule gauss_rule(CellKind kind, int n) {
  switch (kind) {
    case CellKind::segment: return gauss_segment(n);
    case CellKind::triangle: return gauss_triangle(n);
    case CellKind::quadrilateral: return gauss_quadrilateral(n);
    case CellKind::prism: return gauss_prism(n);
    case CellKind::hexahedron: return gauss_hexahedron(n);
  }
  throw std::invalid_argument("unknown cell kind");
}

}  // namespace tdnns
