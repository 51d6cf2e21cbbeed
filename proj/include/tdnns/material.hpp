#pragma once

// Linear piezoelectric material laws in stiffness form (C^E, e, eps^eps)
// and compliance form (S^E, d, eps^sigma). All quantities in SI units:
// Pa, C/m^2, C/N, F/m = C/(V m), kg/m^3.

#include "tdnns/tensor.hpp"

#include <functional>
#include <string>

namespace tdnns {

struct MaterialLawStiffness {
  Mat6 C = Mat6::Zero();      // elasticity at constant electric field
  Mat36 e = Mat36::Zero();    // D = e eps + ...
  Mat3 eps = Mat3::Zero();    // dielectric tensor at constant strain
  double rho = 0.0;
  bool electric = true;       // false: purely elastic body, no potential field
};

struct MaterialLawCompliance {
  Mat6 S = Mat6::Zero();
  Mat36 d = Mat36::Zero();
  Mat3 eps_sigma = Mat3::Zero();  // dielectric tensor at constant stress
  double rho = 0.0;
  bool electric = true;
};

/// S = C^-1, d = e S, eps_sigma = eps + d e^T.
/// Throws std::invalid_argument("material stiffness not invertible").
MaterialLawCompliance invert_material(const MaterialLawStiffness& m);

/// Inverse conversion: C = S^-1, e = d C, eps = eps_sigma - d e^T.
MaterialLawStiffness to_stiffness(const MaterialLawCompliance& m);

/// Law expressed in a frame whose axes are the columns of R (local -> global).
MaterialLawCompliance rotate_material(const MaterialLawCompliance& m, const Mat3& R);

/// Validates symmetry and positive definiteness; throws std::invalid_argument.
void validate(const MaterialLawStiffness& m);

MaterialLawStiffness isotropic_elastic(double young, double poisson, double rho);

/// PZT-5H, polarised along local axis 3. The dielectric entries use
/// +6.62e-9 F/m (the tabulated negative sign is not physical).
MaterialLawStiffness pzt5h();

/// Aluminium plate: E = 65 GPa, nu = 0.3, rho = 2700 kg/m^3. Not electric.
MaterialLawStiffness aluminium();

// Unit conversion to SI. Unknown units throw std::invalid_argument.
double stiffness_to_si(double value, const std::string& unit);     // Pa, kPa, MPa, GPa
double coupling_to_si(double value, const std::string& unit);      // C/m^2, C/mm^2, mC/mm^2
double permittivity_to_si(double value, const std::string& unit);  // F/m, C/(V*m), nF/m
double density_to_si(double value, const std::string& unit);       // kg/m^3, kg/mm^3, t/mm^3, g/cm^3
double length_to_si(double value, const std::string& unit);        // m, mm, um

}  // namespace tdnns
