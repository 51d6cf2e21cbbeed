#pragma once

// Forward-mode value + gradient in the three reference coordinates.

#include <array>

namespace tdnns {

struct Dual3 {
  double v = 0.0;
  std::array<double, 3> d{0.0, 0.0, 0.0};

  Dual3() = default;
  Dual3(double value) : v(value) {}  // NOLINT: implicit constants are convenient in formulas
  Dual3(double value, std::array<double, 3> grad) : v(value), d(grad) {}

  /// Coordinate variable number `dir` with value x.
  static Dual3 variable(double x, int dir) {
    Dual3 r(x);
    r.d[dir] = 1.0;
    return r;
  }

  Dual3& operator+=(const Dual3& o) {
    v += o.v;
    for (int i = 0; i < 3; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual3& operator-=(const Dual3& o) {
    v -= o.v;
    for (int i = 0; i < 3; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual3& operator*=(const Dual3& o) {
    for (int i = 0; i < 3; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual3& operator*=(double s) {
    v *= s;
    for (auto& x : d) x *= s;
    return *this;
  }
};

inline Dual3 operator+(Dual3 a, const Dual3& b) { return a += b; }
inline Dual3 operator-(Dual3 a, const Dual3& b) { return a -= b; }
inline Dual3 operator*(Dual3 a, const Dual3& b) { return a *= b; }
inline Dual3 operator*(Dual3 a, double s) { return a *= s; }
inline Dual3 operator*(double s, Dual3 a) { return a *= s; }
inline Dual3 operator-(Dual3 a) { return a *= -1.0; }

/// Value, gradient and Hessian in the three reference coordinates.
struct Jet2 {
  double v = 0.0;
  std::array<double, 3> d{0.0, 0.0, 0.0};
  std::array<std::array<double, 3>, 3> h{};

  Jet2() = default;
  Jet2(double value) : v(value) {}  // NOLINT

  static Jet2 variable(double x, int dir) {
    Jet2 r(x);
    r.d[dir] = 1.0;
    return r;
  }

  Dual3 dual() const { return Dual3(v, d); }
  /// Partial derivative along dir as a first-order jet.
  Dual3 partial(int dir) const { return Dual3(d[dir], h[dir]); }

  Jet2& operator+=(const Jet2& o) {
    v += o.v;
    for (int i = 0; i < 3; ++i) {
      d[i] += o.d[i];
      for (int j = 0; j < 3; ++j) h[i][j] += o.h[i][j];
    }
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    v -= o.v;
    for (int i = 0; i < 3; ++i) {
      d[i] -= o.d[i];
      for (int j = 0; j < 3; ++j) h[i][j] -= o.h[i][j];
    }
    return *this;
  }
  Jet2& operator*=(const Jet2& o) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) h[i][j] = h[i][j] * o.v + d[i] * o.d[j] + o.d[i] * d[j] + v * o.h[i][j];
    for (int i = 0; i < 3; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Jet2& operator*=(double s) {
    v *= s;
    for (int i = 0; i < 3; ++i) {
      d[i] *= s;
      for (int j = 0; j < 3; ++j) h[i][j] *= s;
    }
    return *this;
  }
};

inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator*(Jet2 a, const Jet2& b) { return a *= b; }
inline Jet2 operator*(Jet2 a, double s) { return a *= s; }
inline Jet2 operator*(double s, Jet2 a) { return a *= s; }
inline Jet2 operator-(Jet2 a) { return a *= -1.0; }

}  // namespace tdnns
