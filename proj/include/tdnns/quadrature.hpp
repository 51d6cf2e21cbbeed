#pragma once

#include <Eigen/Dense>

#include <vector>

namespace tdnns {

enum class CellKind { segment, triangle, quadrilateral, prism, hexahedron };

struct QuadRule {
  std::vector<Eigen::Vector3d> points;  // reference coordinates, unused slots are 0
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
};

/// n-point Gauss-Legendre rule on [0, 1]; exact for degree 2n - 1.
QuadRule gauss_segment(int n);
/// Collapsed (Duffy) Gauss rule on the unit triangle, n points per direction.
QuadRule gauss_triangle(int n);
QuadRule gauss_quadrilateral(int n);
QuadRule gauss_prism(int n);
QuadRule gauss_hexahedron(int n);
QuadRule gauss_rule(CellKind kind, int n);

}  // namespace tdnns
