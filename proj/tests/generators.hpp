#pragma once

// Hand-rolled random generators for the property tests.

#include "tdnns/tensor.hpp"

#include <random>

namespace tdnns::testgen {

inline std::mt19937_64& rng() {
  static std::mt19937_64 r(20240611);
  return r;
}

inline double uniform(double a = -1.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(rng()); }

inline Vec3 vec3(double s = 1.0) { return s * Vec3(uniform(), uniform(), uniform()); }

inline Mat3 sym3() {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = uniform();
  return 0.5 * (m + m.transpose());
}

inline Mat3 rotation() {
  std::normal_distribution<double> n01;
  Eigen::Quaterniond q(n01(rng()), n01(rng()), n01(rng()), n01(rng()));
  q.normalize();
  return q.toRotationMatrix();
}

}  // namespace tdnns::testgen
