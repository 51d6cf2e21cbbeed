#pragma once

// Small dense tensor algebra for 3-D continuum quantities.
//
// Voigt convention (fixed for the whole library):
//   component order   11, 22, 33, 23, 13, 12
//   stress-like       (s11, s22, s33, s23, s13, s12)
//   strain-like       (e11, e22, e33, 2 e23, 2 e13, 2 e12)   engineering shears
// With this choice  sigma : eps == stress_voigt(sigma) . strain_voigt(eps).

#include <Eigen/Dense>

#include <array>

namespace tdnns {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;

/// Index pairs (i, j) of the six Voigt slots.
inline constexpr std::array<std::array<int, 2>, 6> kVoigtPairs{{{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};

/// Voigt slot of the tensor component (i, j).
constexpr int voigt_index(int i, int j) {
  if (i == j) return i;
  const int s = i + j;  // 1 -> 12, 2 -> 13, 3 -> 23
  return s == 1 ? 5 : (s == 2 ? 4 : 3);
}

/// Symmetric 3x3 tensor with six stored components in Voigt slot order.
class SymTensor3 {
 public:
  SymTensor3() { c_.fill(0.0); }
  explicit SymTensor3(const std::array<double, 6>& c) : c_(c) {}

  static SymTensor3 identity() { return SymTensor3({1, 1, 1, 0, 0, 0}); }

  /// Symmetric part of a full matrix.
  static SymTensor3 from_matrix(const Mat3& m) {
    SymTensor3 t;
    for (int a = 0; a < 6; ++a) {
      const auto [i, j] = kVoigtPairs[a];
      t.c_[a] = 0.5 * (m(i, j) + m(j, i));
    }
    return t;
  }

  Mat3 to_matrix() const {
    Mat3 m;
    for (int a = 0; a < 6; ++a) {
      const auto [i, j] = kVoigtPairs[a];
      m(i, j) = c_[a];
      m(j, i) = c_[a];
    }
    return m;
  }

  double operator()(int i, int j) const { return c_[voigt_index(i, j)]; }
  double& operator[](int slot) { return c_[slot]; }
  double operator[](int slot) const { return c_[slot]; }
  const std::array<double, 6>& components() const { return c_; }

 private:
  std::array<double, 6> c_;
};

inline Vec6 stress_voigt(const SymTensor3& t) {
  Vec6 v;
  for (int a = 0; a < 6; ++a) v[a] = t[a];
  return v;
}

inline Vec6 strain_voigt(const SymTensor3& t) {
  Vec6 v = stress_voigt(t);
  v.tail<3>() *= 2.0;
  return v;
}

inline SymTensor3 from_stress_voigt(const Vec6& v) {
  return SymTensor3({v[0], v[1], v[2], v[3], v[4], v[5]});
}

inline SymTensor3 from_strain_voigt(const Vec6& v) {
  return SymTensor3({v[0], v[1], v[2], 0.5 * v[3], 0.5 * v[4], 0.5 * v[5]});
}

/// Stress Voigt vector of a (symmetrised) full matrix.
inline Vec6 stress_voigt(const Mat3& m) { return stress_voigt(SymTensor3::from_matrix(m)); }
inline Vec6 strain_voigt(const Mat3& m) { return strain_voigt(SymTensor3::from_matrix(m)); }

inline Mat3 to_matrix_from_stress_voigt(const Vec6& v) { return from_stress_voigt(v).to_matrix(); }

/// a : b = a_ij b_ij
inline double double_contract(const Mat3& a, const Mat3& b) { return (a.array() * b.array()).sum(); }

/// Rotation of stress-like Voigt vectors: voigt(R s R^T) = T * voigt(s).
Mat6 stress_rotation(const Mat3& R);
/// Rotation of strain-like Voigt vectors (engineering shears).
Mat6 strain_rotation(const Mat3& R);

/// Throws std::invalid_argument unless R R^T = I and det R = 1 within tol.
void check_rotation(const Mat3& R, double tol = 1e-12);

}  // namespace tdnns
