#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace lamorbit {

/// Full phase-space point (u, v, w, z) of the Euler-Lagrange system.
struct State4 {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
  double z = 0.0;

  double& operator[](std::size_t i) {
    switch (i) {
      case 0: return u;
      case 1: return v;
      case 2: return w;
      case 3: return z;
    }
    throw std::out_of_range("State4 index");
  }
  double operator[](std::size_t i) const {
    switch (i) {
      case 0: return u;
      case 1: return v;
      case 2: return w;
      case 3: return z;
    }
    throw std::out_of_range("State4 index");
  }

  std::array<double, 4> to_array() const { return {u, v, w, z}; }
  static State4 from_array(const double* p) { return {p[0], p[1], p[2], p[3]}; }
};

inline State4 operator+(const State4& a, const State4& b) {
  return {a.u + b.u, a.v + b.v, a.w + b.w, a.z + b.z};
}
inline State4 operator-(const State4& a, const State4& b) {
  return {a.u - b.u, a.v - b.v, a.w - b.w, a.z - b.z};
}
inline State4 operator*(double s, const State4& a) {
  return {s * a.u, s * a.v, s * a.w, s * a.z};
}

inline double norm_inf(const State4& a) {
  return std::max(std::max(std::abs(a.u), std::abs(a.v)),
                  std::max(std::abs(a.w), std::abs(a.z)));
}

/// Model parameters: energy level mu and singular perturbation epsilon.
struct Params {
  double mu = 0.0;
  double epsilon = 1e-3;
};

/// Admissible ranges used across the toolchain.
inline constexpr double kMuMin = -0.125;        // -1/8, excluded
inline constexpr double kMuMax = 1.0 / 24.0;    // 1/24, excluded
inline constexpr double kEpsMin = 1e-7;
inline constexpr double kEpsMax = 1e-1;

}  // namespace lamorbit
