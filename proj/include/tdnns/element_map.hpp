#pragma once

// Polynomial element maps of geometry order g on the reference prism or
// hexahedron, interpolating control points at equispaced Lagrange nodes.
//
// Node order:
//   hexahedron  (i, j, k) / g with i fastest
//   prism       for k, for j, for i <= g - j: (i / g, j / g, k / g)

#include "tdnns/quadrature.hpp"
#include "tdnns/tensor.hpp"

#include <array>
#include <vector>

namespace tdnns {

/// Geometry at one reference point.
struct MapPoint {
  Vec3 x;                  // Phi(xh)
  Mat3 F;                  // F(i, j) = d Phi_i / d xh_j
  std::array<Mat3, 3> H;   // H[i](j, k) = d^2 Phi_i / d xh_j d xh_k
  double J = 0.0;          // det F
};

std::vector<Vec3> lagrange_nodes(CellKind kind, int g);

class ElementMap {
 public:
  ElementMap() = default;
  /// nodes: physical positions of lagrange_nodes(kind, g), one per row.
  ElementMap(CellKind kind, int g, const std::vector<Vec3>& nodes);

  /// Map defined by a callable xh -> x sampled at the Lagrange nodes.
  template <class Fn>
  static ElementMap interpolate(CellKind kind, int g, Fn&& fn) {
    std::vector<Vec3> pts;
    for (const auto& xh : lagrange_nodes(kind, g)) pts.push_back(fn(xh));
    return ElementMap(kind, g, pts);
  }

  CellKind kind() const { return kind_; }
  int order() const { return order_; }
  const std::vector<Vec3>& nodes() const { return nodes_; }

  MapPoint eval(const Vec3& xh) const;
  Vec3 phi(const Vec3& xh) const;

 private:
  CellKind kind_ = CellKind::hexahedron;
  int order_ = 1;
  std::vector<Vec3> nodes_;
  Eigen::Matrix<double, Eigen::Dynamic, 3> coeff_;  // monomial coefficients
};

}  // namespace tdnns
