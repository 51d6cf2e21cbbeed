#include "tdnns/material.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace tdnns {

namespace {

bool symmetric(const Eigen::MatrixXd& m, double rel) {
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel * scale;
}

bool positive_definite(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (m + m.transpose()));
  return llt.info() == Eigen::Success;
}

double lookup(const std::unordered_map<std::string, double>& table, const std::string& unit,
              const char* what) {
  const auto it = table.find(unit);
  if (it == table.end()) throw std::invalid_argument(std::string("unknown ") + what + " unit '" + unit + "'");
  return it->second;
}

}  // namespace

MaterialLawCompliance invert_material(const MaterialLawStiffness& m) {
  Eigen::FullPivLU<Mat6> lu(m.C);
  const double scale = m.C.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !lu.isInvertible() || std::abs(lu.determinant()) < 1e-14 * std::pow(scale, 6))
    throw std::invalid_argument("material stiffness not invertible");
  MaterialLawCompliance out;
  out.S = lu.inverse();
  out.S = 0.5 * (out.S + out.S.transpose());
  out.d = m.e * out.S;
  out.eps_sigma = m.eps + out.d * m.e.transpose();
  out.eps_sigma = 0.5 * (out.eps_sigma + out.eps_sigma.transpose());
  out.rho = m.rho;
  out.electric = m.electric;
  return out;
}

MaterialLawStiffness to_stiffness(const MaterialLawCompliance& m) {
  Eigen::FullPivLU<Mat6> lu(m.S);
  if (!lu.isInvertible()) throw std::invalid_argument("material compliance not invertible");
  MaterialLawStiffness out;
  out.C = lu.inverse();
  out.C = 0.5 * (out.C + out.C.transpose());
  out.e = m.d * out.C;
  out.eps = m.eps_sigma - m.d * out.e.transpose();
  out.rho = m.rho;
  out.electric = m.electric;
  return out;
}

MaterialLawCompliance rotate_material(const MaterialLawCompliance& m, const Mat3& R) {
  check_rotation(R, 1e-10);
  const Mat6 Te = strain_rotation(R);
  MaterialLawCompliance out = m;
  out.S = Te * m.S * Te.transpose();
  out.d = R * m.d * Te.transpose();
  out.eps_sigma = R * m.eps_sigma * R.transpose();
  return out;
}

void validate(const MaterialLawStiffness& m) {
  if (!m.C.allFinite() || !m.e.allFinite() || !m.eps.allFinite() || !std::isfinite(m.rho))
    throw std::invalid_argument("material contains non-finite entries");
  if (!symmetric(m.C, 1e-10)) throw std::invalid_argument("elasticity tensor not symmetric");
  if (!positive_definite(m.C)) throw std::invalid_argument("elasticity tensor not positive definite");
  if (m.electric) {
    if (!symmetric(m.eps, 1e-10)) throw std::invalid_argument("dielectric tensor not symmetric");
    if (!positive_definite(m.eps)) throw std::invalid_argument("dielectric tensor not positive definite");
  }
  if (!(m.rho >= 0.0)) throw std::invalid_argument("density must be non-negative");
}

MaterialLawStiffness isotropic_elastic(double young, double poisson, double rho) {
  if (!(young > 0.0) || !(poisson > -1.0 && poisson < 0.5))
    throw std::invalid_argument("invalid isotropic elastic parameters");
  const double lam = young * poisson / ((1 + poisson) * (1 - 2 * poisson));
  const double mu = young / (2 * (1 + poisson));
  MaterialLawStiffness m;
  m.C.topLeftCorner<3, 3>().setConstant(lam);
  for (int i = 0; i < 3; ++i) m.C(i, i) = lam + 2 * mu;
  for (int i = 3; i < 6; ++i) m.C(i, i) = mu;
  m.rho = rho;
  m.electric = false;
  return m;
}

MaterialLawStiffness pzt5h() {
  MaterialLawStiffness m;
  const double c11 = stiffness_to_si(127.205, "GPa"), c12 = stiffness_to_si(80.212, "GPa"),
               c13 = stiffness_to_si(84.670, "GPa"), c33 = stiffness_to_si(117.436, "GPa"),
               c44 = stiffness_to_si(22.988, "GPa"), c66 = stiffness_to_si(23.474, "GPa");
  m.C << c11, c12, c13, 0, 0, 0,
         c12, c11, c13, 0, 0, 0,
         c13, c13, c33, 0, 0, 0,
         0, 0, 0, c44, 0, 0,
         0, 0, 0, 0, c44, 0,
         0, 0, 0, 0, 0, c66;
  const double e31 = coupling_to_si(-6.62e-3, "mC/mm^2"), e33 = coupling_to_si(23.24e-3, "mC/mm^2"),
               e15 = coupling_to_si(17.03e-3, "mC/mm^2");
  m.e(2, 0) = e31;
  m.e(2, 1) = e31;
  m.e(2, 2) = e33;
  m.e(0, 4) = e15;
  m.e(1, 3) = e15;
  const double eps = permittivity_to_si(6.62e-9, "F/m");
  m.eps = eps * Mat3::Identity();
  m.rho = density_to_si(7.5e-9, "t/mm^3");
  m.electric = true;
  return m;
}

MaterialLawStiffness aluminium() {
  return isotropic_elastic(stiffness_to_si(65.0, "GPa"), 0.3, density_to_si(2.7e-9, "t/mm^3"));
}

double stiffness_to_si(double value, const std::string& unit) {
  static const std::unordered_map<std::string, double> t{
      {"Pa", 1.0}, {"kPa", 1e3}, {"MPa", 1e6}, {"N/mm^2", 1e6}, {"GPa", 1e9}};
  return value * lookup(t, unit, "stiffness");
}

double coupling_to_si(double value, const std::string& unit) {
  static const std::unordered_map<std::string, double> t{
      {"C/m^2", 1.0}, {"C/mm^2", 1e6}, {"mC/mm^2", 1e3}, {"uC/mm^2", 1.0}};
  return value * lookup(t, unit, "coupling");
}

double permittivity_to_si(double value, const std::string& unit) {
  static const std::unordered_map<std::string, double> t{
      {"F/m", 1.0}, {"C/(V*m)", 1.0}, {"nF/m", 1e-9}, {"F/mm", 1e3}};
  return value * lookup(t, unit, "permittivity");
}

double density_to_si(double value, const std::string& unit) {
  static const std::unordered_map<std::string, double> t{
      {"kg/m^3", 1.0}, {"g/cm^3", 1e3}, {"kg/mm^3", 1e9}, {"t/mm^3", 1e12}};
  return value * lookup(t, unit, "density");
}

double length_to_si(double value, const std::string& unit) {
  static const std::unordered_map<std::string, double> t{{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}};
  return value * lookup(t, unit, "length");
}

}  // namespace tdnns
