#include "tdnns/legendre.hpp"

namespace tdnns {

double legendre(int i, double t) {
  if (i == 0) return 1.0;
  double p0 = 1.0, p1 = t;
  for (int k = 1; k < i; ++k) {
    const double p2 = ((2 * k + 1) * t * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double legendre_derivative(int i, double t) {
  // l'_{k+1} = l'_{k-1} + (2k+1) l_k
  if (i == 0) return 0.0;
  double dm1 = 0.0, d0 = 1.0;  // l'_0, l'_1
  for (int k = 1; k < i; ++k) {
    const double d1 = dm1 + (2 * k + 1) * legendre(k, t);
    dm1 = d0;
    d0 = d1;
  }
  return d0;
}

}  // namespace tdnns
