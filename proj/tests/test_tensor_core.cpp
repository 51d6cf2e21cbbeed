#include "doctest.h"
#include "generators.hpp"

#include "tdnns/material.hpp"

#include <numbers>

using namespace tdnns;
namespace tg = tdnns::testgen;

namespace {

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
}

Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

}  // namespace

TEST_CASE("voigt identity and round trip") {
  const SymTensor3 id = SymTensor3::identity();
  const Vec6 v = stress_voigt(id);
  CHECK(v == (Vec6() << 1, 1, 1, 0, 0, 0).finished());
  for (int t = 0; t < 50; ++t) {
    const Mat3 m = tg::sym3();
    CHECK(SymTensor3::from_matrix(m).to_matrix() == m);
    CHECK(from_strain_voigt(strain_voigt(m)).to_matrix().isApprox(m, 1e-15));
  }
}

TEST_CASE("voigt energy equals the full contraction") {
  for (int t = 0; t < 50; ++t) {
    const Mat3 s = tg::sym3(), e = tg::sym3();
    CHECK(stress_voigt(s).dot(strain_voigt(e)) == doctest::Approx(double_contract(s, e)).epsilon(1e-14));
  }
}

TEST_CASE("voigt rotation matrices agree with tensor rotation") {
  for (int t = 0; t < 20; ++t) {
    const Mat3 R = tg::rotation(), s = tg::sym3();
    CHECK(rel(stress_rotation(R) * stress_voigt(s), stress_voigt(Mat3(R * s * R.transpose()))) < 1e-14);
    CHECK(rel(strain_rotation(R) * strain_voigt(s), strain_voigt(Mat3(R * s * R.transpose()))) < 1e-14);
  }
  CHECK_THROWS_WITH(check_rotation(2.0 * Mat3::Identity()), "frame is not a proper rotation");
  CHECK_THROWS(check_rotation(-Mat3::Identity()));
}

TEST_CASE("isotropic law without coupling") {
  const double E = 70e9, nu = 0.3;
  MaterialLawStiffness st = isotropic_elastic(E, nu, 2700.0);
  st.electric = true;
  st.eps = 3e-9 * Mat3::Identity();
  const MaterialLawCompliance co = invert_material(st);
  Mat6 S = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) S(i, j) = i == j ? 1.0 / E : -nu / E;
    S(3 + i, 3 + i) = 2.0 * (1.0 + nu) / E;
  }
  CHECK(rel(co.S, S) < 1e-14);
  CHECK(co.d.isZero(0.0));
  CHECK(co.eps_sigma == st.eps);
}

TEST_CASE("pzt5h compliance law frozen against a dense inversion") {
  // 40-digit inversion of the stiffness law, rounded to 17 digits
  const MaterialLawCompliance co = invert_material(pzt5h());
  CHECK(co.S(0, 0) == doctest::Approx(1.6499842479598201e-11).epsilon(1e-12));
  CHECK(co.S(0, 1) == doctest::Approx(-4.7799225917954106e-12).epsilon(1e-12));
  CHECK(co.S(0, 2) == doctest::Approx(-8.4499269125333141e-12).epsilon(1e-12));
  CHECK(co.S(2, 2) == doctest::Approx(2.0699875875952786e-11).epsilon(1e-12));
  CHECK(co.S(3, 3) == doctest::Approx(4.3500957021054463e-11).epsilon(1e-12));
  CHECK(co.S(5, 5) == doctest::Approx(4.2600323762460595e-11).epsilon(1e-12));
  CHECK(co.d(2, 0) == doctest::Approx(-2.7396217110452869e-10).epsilon(1e-12));
  CHECK(co.d(2, 2) == doctest::Approx(5.9294214767908383e-10).epsilon(1e-12));
  CHECK(co.d(0, 4) == doctest::Approx(7.4082129806855751e-10).epsilon(1e-12));
  CHECK(co.d(1, 3) == doctest::Approx(7.4082129806855751e-10).epsilon(1e-12));
  CHECK(co.eps_sigma(0, 0) == doctest::Approx(1.9236186706107534e-8).epsilon(1e-12));
  CHECK(co.eps_sigma(2, 2) == doctest::Approx(2.4027234657485868e-8).epsilon(1e-12));
}

TEST_CASE("pzt5h round trip") {
  const MaterialLawStiffness st = pzt5h();
  const MaterialLawCompliance co = invert_material(st);
  CHECK(rel(st.C * co.S, Mat6::Identity()) < 1e-12);
  const MaterialLawStiffness back = to_stiffness(co);
  CHECK(rel(back.C, st.C) < 1e-12);
  CHECK(rel(back.e, st.e) < 1e-12);
  CHECK(rel(co.eps_sigma - co.d * st.e.transpose(), st.eps) < 1e-12);
}

TEST_CASE("pzt5h preset values and units") {
  const MaterialLawStiffness st = pzt5h();
  CHECK(st.C(0, 0) == doctest::Approx(127.205e9));
  CHECK(st.e(2, 0) == doctest::Approx(-6.62));
  CHECK(st.e(2, 2) == doctest::Approx(23.24));
  CHECK(st.eps(0, 0) == doctest::Approx(6.62e-9));
  CHECK(st.rho == doctest::Approx(7500.0));
  CHECK_NOTHROW(validate(st));
  CHECK(stiffness_to_si(1.0, "GPa") == 1e9);
  CHECK(coupling_to_si(1.0, "C/mm^2") == doctest::Approx(1e6));
  CHECK(density_to_si(1.0, "g/cm^3") == doctest::Approx(1000.0));
  CHECK(length_to_si(2.0, "mm") == doctest::Approx(2e-3));
  CHECK_THROWS_AS(length_to_si(1.0, "furlong"), std::invalid_argument);
}

TEST_CASE("invalid laws are rejected") {
  MaterialLawStiffness st = pzt5h();
  st.C.setZero();
  CHECK_THROWS_WITH(invert_material(st), "material stiffness not invertible");
  st = pzt5h();
  st.eps(0, 0) = -6.62e-9;  // the literal tabulated sign
  CHECK_THROWS_WITH(validate(st), "dielectric tensor not positive definite");
  st = pzt5h();
  st.C(0, 1) += 1e9;
  CHECK_THROWS_WITH(validate(st), "elasticity tensor not symmetric");
}

TEST_CASE("rotation of material laws") {
  const MaterialLawCompliance co = invert_material(pzt5h());
  const MaterialLawCompliance same = rotate_material(co, Mat3::Identity());
  CHECK(rel(same.S, co.S) < 1e-15);
  CHECK(rel(same.d, co.d) < 1e-15);
  const MaterialLawCompliance twice = rotate_material(rotate_material(co, rot_z(std::numbers::pi)), rot_z(std::numbers::pi));
  CHECK(rel(twice.S, co.S) < 1e-12);
  CHECK(rel(twice.d, co.d) < 1e-12);
  CHECK(rel(twice.eps_sigma, co.eps_sigma) < 1e-12);

  const MaterialLawCompliance iso = invert_material(isotropic_elastic(65e9, 0.3, 2700.0));
  for (int t = 0; t < 30; ++t) {
    const Mat3 R = tg::rotation();
    CHECK(rel(rotate_material(iso, R).S, iso.S) < 1e-12);
    const MaterialLawCompliance r = rotate_material(co, R);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat6>(r.S).eigenvalues().minCoeff() > 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat3>(r.eps_sigma).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("rotation about the polarisation axis leaves pzt5h nearly invariant") {
  // transversely isotropic up to the tabulated c66 != (c11 - c12) / 2
  const MaterialLawCompliance co = invert_material(pzt5h());
  const MaterialLawCompliance r = rotate_material(co, rot_z(0.7));
  CHECK(rel(r.d, co.d) < 1e-12);
  CHECK(rel(r.eps_sigma, co.eps_sigma) < 1e-12);
  CHECK(rel(r.S, co.S) < 1e-2);
}
