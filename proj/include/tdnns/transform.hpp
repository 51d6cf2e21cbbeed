#pragma once

// Push-forwards of reference shape functions through an element map:
//   displacement  N = F^{-T} Nh                       (covariant)
//   stress        N = F Nh F^T / J^2                  (weighted Piola)
// with the exact chain rules for the strain of a covariant field and the
// divergence of a weighted-Piola field on curved maps.

#include "tdnns/element_map.hpp"

#include <cmath>
#include <stdexcept>

namespace tdnns {

/// Geometry quantities reused by all transforms at one point.
struct PointGeometry {
  MapPoint mp;
  Mat3 G;                       // F^{-1}
  std::array<Mat3, 3> dG;       // d G / d xh_l
  std::array<Mat3, 3> dFt;      // d (F / J) / d xh_l
};

inline PointGeometry point_geometry(const MapPoint& mp) {
  if (!(mp.J > 0.0) || !std::isfinite(mp.J)) throw std::domain_error("degenerate element");
  PointGeometry pg;
  pg.mp = mp;
  pg.G = mp.F.inverse();
  for (int l = 0; l < 3; ++l) {
    Mat3 dF;
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n) dF(m, n) = mp.H[m](n, l);
    pg.dG[l] = -pg.G * dF * pg.G;
    const double dJ = mp.J * (pg.G * dF).trace();
    pg.dFt[l] = dF / mp.J - mp.F * (dJ / (mp.J * mp.J));
  }
  return pg;
}

inline Vec3 push_displacement(const PointGeometry& pg, const Vec3& nh) { return pg.G.transpose() * nh; }

inline Mat3 push_stress(const PointGeometry& pg, const Mat3& nh) {
  return pg.mp.F * nh * pg.mp.F.transpose() / (pg.mp.J * pg.mp.J);
}

/// Physical gradient (i, j) = d u_i / d x_j of the covariant push-forward.
/// grad_h(k, l) = d Nh_k / d xh_l.
inline Mat3 physical_gradient(const PointGeometry& pg, const Vec3& nh, const Mat3& grad_h) {
  Mat3 ref;  // ref(i, l) = d u_i / d xh_l
  ref = pg.G.transpose() * grad_h;
  for (int l = 0; l < 3; ++l) ref.col(l) += pg.dG[l].transpose() * nh;
  return ref * pg.G;
}

inline Mat3 physical_strain(const PointGeometry& pg, const Vec3& nh, const Mat3& grad_h) {
  const Mat3 g = physical_gradient(pg, nh, grad_h);
  return 0.5 * (g + g.transpose());
}

inline Vec3 physical_divergence(const PointGeometry& pg, const Mat3& nh, const Vec3& div_h) {
  const double J = pg.mp.J;
  Vec3 out = pg.mp.F * div_h / (J * J);
  for (int j = 0; j < 3; ++j) out += pg.dFt[j] * nh.col(j) / J;
  return out;
}

/// Physical gradient of a scalar.
inline Vec3 push_gradient(const PointGeometry& pg, const Vec3& grad_h) { return pg.G.transpose() * grad_h; }

}  // namespace tdnns
