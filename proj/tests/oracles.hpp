// Test-only oracles and fixtures. Everything here deliberately recomputes
// results through routes independent of the library implementation: cubic
// roots by Durand-Kerner iteration instead of closed forms, quintic
// coefficient matrices by entry-wise polynomial expansion instead of direct
// matrix arithmetic.

#pragma once

#include <array>
#include <complex>

#include "trifocal/constraints.hpp"
#include "trifocal/tensor.hpp"
#include "trifocal/types.hpp"

namespace oracles {

using trifocal::cplx;
using trifocal::CMat3;
using trifocal::CTrifocalTensor;
using trifocal::CVec3;
using trifocal::Mat3d;
using trifocal::TrifocalTensor;
using trifocal::Vec3d;

// ---------------------------------------------------------------------------
// Durand-Kerner root finder for x^3 + a x^2 + b x + c
// ---------------------------------------------------------------------------

inline std::array<cplx, 3> cubic_roots_dk(cplx a, cplx b, cplx c) {
  auto p = [&](cplx x) { return ((x + a) * x + b) * x + c; };
  std::array<cplx, 3> z{cplx(0.4, 0.9), cplx(0.4, 0.9) * cplx(0.4, 0.9),
                        cplx(0.4, 0.9) * cplx(0.4, 0.9) * cplx(0.4, 0.9)};
  // scale initial guesses to the root magnitude bound
  const double bound = 1.0 + std::max({std::abs(a), std::abs(b), std::abs(c)});
  for (auto& zi : z) zi *= bound;
  for (int it = 0; it < 200; ++it) {
    double step = 0.0;
    for (int i = 0; i < 3; ++i) {
      cplx denom(1.0, 0.0);
      for (int j = 0; j < 3; ++j)
        if (j != i) denom *= z[static_cast<size_t>(i)] - z[static_cast<size_t>(j)];
      const cplx d = p(z[static_cast<size_t>(i)]) / denom;
      z[static_cast<size_t>(i)] -= d;
      step = std::max(step, std::abs(d));
    }
    if (step < 1e-15 * bound) break;
  }
  return z;
}

// Eigenvalues of a (bilinear-)symmetric 3x3 matrix through its characteristic
// polynomial and Durand-Kerner, with the library's ordering convention.
template <class T>
std::array<cplx, 3> eig_sym3_oracle(const trifocal::Mat3<T>& m) {
  const cplx tr = cplx(trace(m));
  const cplx c2 = cplx(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) -
                       m(0, 2) * m(2, 0) + m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1));
  const cplx d = cplx(det(m));
  auto roots = cubic_roots_dk(-tr, c2, -d);
  std::sort(roots.begin(), roots.end(), [](const cplx& x, const cplx& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return roots;
}

// ---------------------------------------------------------------------------
// Entry-wise polynomial expansion of the quintic matrix characterization
// ---------------------------------------------------------------------------

using Poly = trifocal::detail::Poly3<cplx>;
using PolyMat = std::array<Poly, 9>;  // row-major 3x3 of polynomials

inline PolyMat poly_mul(const PolyMat& x, const PolyMat& y) {
  PolyMat r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        r[static_cast<size_t>(3 * i + j)] =
            r[static_cast<size_t>(3 * i + j)] +
            x[static_cast<size_t>(3 * i + k)] * y[static_cast<size_t>(3 * k + j)];
  return r;
}

// coefficient matrices of Phi(alpha T1 + beta T2 + gamma T3) at the four
// monomials a^5, a^4 g, a^3 b g, a^4 b, after gamma^2 reduction
inline std::array<CMat3, 4> quintic_block_oracle(const CTrifocalTensor& t) {
  PolyMat s;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Poly& e = s[static_cast<size_t>(3 * i + j)];
      e.add({1, 0, 0}, t[0](i, j));
      e.add({0, 1, 0}, t[1](i, j));
      e.add({0, 0, 1}, t[2](i, j));
    }

  PolyMat st;  // transpose
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      st[static_cast<size_t>(3 * i + j)] = s[static_cast<size_t>(3 * j + i)];

  const PolyMat g = poly_mul(s, st);
  const Poly tr_g = g[0] + g[4] + g[8];

  PolyMat d;  // tr(G) I - 2 G
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Poly e = g[static_cast<size_t>(3 * i + j)] * cplx(-2.0);
      if (i == j) e = e + tr_g;
      d[static_cast<size_t>(3 * i + j)] = e;
    }

  const PolyMat phi = poly_mul(poly_mul(d, d), s);

  constexpr std::array<std::array<int, 3>, 4> monomials = {
      {{5, 0, 0}, {4, 0, 1}, {3, 1, 1}, {4, 1, 0}}};
  std::array<CMat3, 4> out;
  for (size_t m = 0; m < 4; ++m)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        out[m](i, j) = phi[static_cast<size_t>(3 * i + j)].reduce_gamma().coeff(monomials[m]);
  return out;
}

// ---------------------------------------------------------------------------
// Fixtures with special constraint signatures
// ---------------------------------------------------------------------------

// Rank-2 complex matrix of the form s1 t1^T + t2 s2^T (with s1 = s2 = (1,i,0),
// t1 = t2 = (1,0,0)): passes the scalar characterization and the quintic
// matrix identity, but not the cubic identity of essential matrices.
inline CMat3 sample_trifocal_essential() {
  CMat3 s;
  s(0, 0) = cplx(2, 0);
  s(0, 1) = cplx(0, 1);
  s(1, 0) = cplx(0, 1);
  return s;
}

inline CVec3 sample_factor_s() { return {cplx(1, 0), cplx(0, 1), cplx(0, 0)}; }
inline CVec3 sample_factor_t() { return {cplx(1, 0), cplx(0, 0), cplx(0, 0)}; }

// (2,1) tensor meeting the epipolar and extended rank constraints exactly yet
// representable by no camera pair; its stacked null vectors have rank one.
inline TrifocalTensor viewpoint_degenerate_tensor() {
  TrifocalTensor t;
  t[0](0, 1) = 1;
  t[0](1, 2) = 1;
  t[1](0, 0) = 1;
  t[1](1, 1) = 1;
  t[2](0, 0) = 1;
  t[2](1, 1) = 1;
  return t;
}

// Real trifocal tensor satisfying all nine eigenvalue quartics exactly while
// violating the six-quartic family.
inline TrifocalTensor eigenvalue_only_tensor() {
  TrifocalTensor t;
  t[0](1, 2) = 1;
  t[0](2, 1) = -1;
  t[1](0, 2) = 1;
  t[1](2, 0) = -1;
  t[2](0, 2) = 1;
  t[2](1, 2) = 1;
  t[2](2, 0) = -1;
  t[2](2, 1) = -1;
  return t;
}

// Complex trifocal tensor satisfying all fifteen quartic constraints without
// being calibrated; the real-input type of the calibration decision excludes
// it structurally.
inline CTrifocalTensor quartic_passing_complex_tensor() {
  const cplx i(0, 1);
  CTrifocalTensor t;
  t[0](0, 0) = i;
  t[0](1, 1) = i;
  t[1](0, 2) = i;
  t[1](1, 0) = -i;
  t[1](1, 1) = -1;
  t[1](1, 2) = 1;
  t[2](0, 0) = 1;
  t[2](1, 0) = -i;
  t[2](2, 0) = i;
  t[2](2, 1) = 1;
  return t;
}

// The camera factors behind quartic_passing_complex_tensor (A, a, B, b with
// T_k = A e_k b^T - a e_k^T B^T).
inline trifocal::ProjectiveCamerasT<cplx> quartic_passing_cameras() {
  const cplx i(0, 1);
  trifocal::ProjectiveCamerasT<cplx> p;
  p.a_mat = CMat3::diagonal(cplx(1), cplx(-1), cplx(1));
  p.a = CVec3{i, cplx(1), cplx(0)};
  CMat3 b_t;  // B^T
  b_t(0, 1) = -i;
  b_t(1, 2) = cplx(-1);
  b_t(2, 0) = i;
  p.b_mat = transpose(b_t);
  p.b = CVec3{i, cplx(1), cplx(0)};
  return p;
}

}  // namespace oracles
