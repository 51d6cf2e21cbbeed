#include "tdnns/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace tdnns {

Mat6 stress_rotation(const Mat3& R) {
  Mat6 T;
  for (int b = 0; b < 6; ++b) {
    Vec6 unit = Vec6::Zero();
    unit[b] = 1.0;
    const Mat3 s = to_matrix_from_stress_voigt(unit);
    T.col(b) = stress_voigt(Mat3(R * s * R.transpose()));
  }
  return T;
}

Mat6 strain_rotation(const Mat3& R) {
  Mat6 T;
  for (int b = 0; b < 6; ++b) {
    Vec6 unit = Vec6::Zero();
    unit[b] = 1.0;
    const Mat3 s = from_strain_voigt(unit).to_matrix();
    T.col(b) = strain_voigt(Mat3(R * s * R.transpose()));
  }
  return T;
}

void check_rotation(const Mat3& R, double tol) {
  const double orth = (R * R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(orth <= tol) || !(std::abs(R.determinant() - 1.0) <= tol))
    throw std::invalid_argument("frame is not a proper rotation");
}

}  // namespace tdnns
