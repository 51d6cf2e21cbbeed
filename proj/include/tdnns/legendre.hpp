#pragma once

#include "tdnns/jet.hpp"

#include <vector>

namespace tdnns {

/// Legendre polynomial l_i(t) on [-1, 1].
double legendre(int i, double t);
/// d/dt l_i(t).
double legendre_derivative(int i, double t);

/// Scaled Legendre family b^i l_i(a / b), i = 0..n, in polynomial form so
/// that b = 0 is harmless. T is double, Dual3 or Jet2.
template <class T>
std::vector<T> scaled_legendre_all(int n, const T& a, const T& b) {
  std::vector<T> out;
  out.reserve(n + 1);
  out.emplace_back(1.0);
  if (n >= 1) out.push_back(a);
  const T b2 = b * b;
  for (int k = 1; k < n; ++k) {
    const double s = 1.0 / (k + 1);
    out.push_back(((2 * k + 1) * s) * (a * out[k]) - (k * s) * (b2 * out[k - 1]));
  }
  return out;
}

/// l_0 .. l_n at t.
template <class T>
std::vector<T> legendre_all(int n, const T& t) {
  return scaled_legendre_all(n, t, T(1.0));
}

}  // namespace tdnns
