// Deterministic sampling. All randomness in the library and the experiment
// harness flows through Rng, which layers fixed, implementation-independent
// transforms over std::mt19937_64 so that a seed pins byte-identical output on
// every platform (the standard distributions make no such promise).

#pragma once

#include <cstdint>
#include <random>

#include "trifocal/types.hpp"

namespace trifocal {

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 42) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }

  // standard normal via Box-Muller
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  Vec3d normal_vec3() { return {normal(), normal(), normal()}; }

  cplx normal_cplx() { return {normal(), normal()}; }

  CVec3 normal_cvec3() { return {normal_cplx(), normal_cplx(), normal_cplx()}; }

  Mat3d normal_mat3() {
    Mat3d m;
    for (auto& x : m.m) x = normal();
    return m;
  }

  CMat3 normal_cmat3() {
    CMat3 m;
    for (auto& x : m.m) x = normal_cplx();
    return m;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Uniform rotation by the quaternion method.
inline Rotation3d random_rotation(Rng& rng) {
  double q[4];
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& x : q) {
      x = rng.normal();
      n2 += x * x;
    }
  } while (n2 < 1e-12);
  const double inv = 1.0 / std::sqrt(n2);
  const double w = q[0] * inv, x = q[1] * inv, y = q[2] * inv, z = q[3] * inv;
  Mat3d r;
  r(0, 0) = 1 - 2 * (y * y + z * z);
  r(0, 1) = 2 * (x * y - w * z);
  r(0, 2) = 2 * (x * z + w * y);
  r(1, 0) = 2 * (x * y + w * z);
  r(1, 1) = 1 - 2 * (x * x + z * z);
  r(1, 2) = 2 * (y * z - w * x);
  r(2, 0) = 2 * (x * z - w * y);
  r(2, 1) = 2 * (y * z + w * x);
  r(2, 2) = 1 - 2 * (x * x + y * y);
  return Rotation3d::trusted(r);
}

// Complex rotation about a coordinate axis by a complex angle.
inline CMat3 rotation_axis_complex(int axis, cplx theta) {
  const cplx c = std::cos(theta), s = std::sin(theta);
  CMat3 r = CMat3::identity();
  const int i = (axis + 1) % 3, j = (axis + 2) % 3;
  r(i, i) = c;
  r(i, j) = -s;
  r(j, i) = s;
  r(j, j) = c;
  return r;
}

// Element of SO(3,C): product of three axis rotations with complex angles.
// Imaginary parts are kept moderate so entries stay well scaled.
inline CRotation3 random_complex_rotation(Rng& rng, double imag_scale = 0.5) {
  CMat3 m = CMat3::identity();
  for (int axis = 0; axis < 3; ++axis) {
    const cplx theta(rng.uniform(0.0, 2.0 * M_PI), imag_scale * rng.normal());
    m = m * rotation_axis_complex(axis, theta);
  }
  return CRotation3::trusted(m);
}

// Nonzero isotropic vector: random orthonormal real pair x, y and a random
// complex scale on x + i y.
inline CVec3 random_isotropic(Rng& rng) {
  Vec3d x = rng.normal_vec3();
  while (norm(x) < 1e-6) x = rng.normal_vec3();
  x = x / norm(x);
  Vec3d y = rng.normal_vec3();
  y -= x * dot(x, y);
  while (norm(y) < 1e-6) {
    y = rng.normal_vec3();
    y -= x * dot(x, y);
  }
  y = y / norm(y);
  cplx scale = rng.normal_cplx();
  while (std::abs(scale) < 1e-6) scale = rng.normal_cplx();
  CVec3 s;
  for (int i = 0; i < 3; ++i) s[i] = scale * cplx(x[i], y[i]);
  return s;
}

}  // namespace trifocal
