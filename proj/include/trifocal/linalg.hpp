// Small dense numerical kernels: cubic characteristic roots, symmetric
// eigenvalues, proper-rotation SVD of 3x3 and 2x3 matrices, Householder
// alignment, complex rotations between isotropic vectors, and a plain cyclic
// Jacobi eigensolver for the handful of small dense symmetric systems that
// appear in estimation and canonicalization.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "trifocal/types.hpp"

namespace trifocal {

// ---------------------------------------------------------------------------
// Cubic roots
// ---------------------------------------------------------------------------

namespace detail {

// Roots of x^3 + a x^2 + b x + c over C by Cardano's formula. The zero
// constant term is deflated exactly: a vanishing determinant is common here
// (every matrix of interest is singular) and deflation keeps double roots of
// the remaining quadratic at full precision instead of O(sqrt(eps)).
inline std::array<cplx, 3> cubic_roots_cardano(cplx a, cplx b, cplx c, double scale3) {
  std::array<cplx, 3> roots;
  if (std::abs(c) <= 1e-30 * std::max(scale3, 1e-300)) {
    roots[0] = cplx(0);
    const cplx disc = std::sqrt(a * a - 4.0 * b);
    // pick the sign that avoids cancellation in -a -+ disc
    const cplx q = (std::abs(-a + disc) >= std::abs(-a - disc)) ? (-a + disc) * 0.5
                                                                : (-a - disc) * 0.5;
    roots[1] = q;
    roots[2] = (std::abs(q) > 0) ? b / q : (-a - q);
    return roots;
  }
  const cplx p = b - a * a / 3.0;
  const cplx q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  if (std::abs(p) == 0.0 && std::abs(q) == 0.0) {
    roots.fill(-a / 3.0);
    return roots;
  }
  const cplx s = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
  cplx u3 = -q / 2.0 + s;
  if (std::abs(-q / 2.0 - s) > std::abs(u3)) u3 = -q / 2.0 - s;
  const cplx u = std::pow(u3, 1.0 / 3.0);
  const cplx omega(-0.5, std::sqrt(3.0) / 2.0);
  for (int k = 0; k < 3; ++k) {
    cplx uk = u;
    if (k == 1) uk = u * omega;
    if (k == 2) uk = u * std::conj(omega);
    const cplx vk = (std::abs(uk) > 0) ? -p / (3.0 * uk) : cplx(0);
    roots[static_cast<size_t>(k)] = uk + vk - a / 3.0;
  }
  return roots;
}

// A perturbed double root splits by O(sqrt(eps) * scale) but its pair mean is
// first-order accurate, so pairs clustered below the rounding floor of the
// coefficients are replaced by their mean. The scale is the coefficient
// magnitude (~ the matrix norm for characteristic polynomials), since the
// split grows with it rather than with the root itself.
inline void merge_clustered_roots(std::array<cplx, 3>& roots, double scale) {
  const double m =
      std::max({std::abs(roots[0]), std::abs(roots[1]), std::abs(roots[2]), scale});
  if (m <= 0.0) return;
  int bi = 0, bj = 1;
  double best = std::abs(roots[0] - roots[1]);
  const std::pair<int, int> pairs[] = {{0, 2}, {1, 2}};
  for (const auto& [i, j] : pairs) {
    const double d = std::abs(roots[static_cast<size_t>(i)] - roots[static_cast<size_t>(j)]);
    if (d < best) { best = d; bi = i; bj = j; }
  }
  if (best <= 1e-6 * m) {
    const cplx mean = (roots[static_cast<size_t>(bi)] + roots[static_cast<size_t>(bj)]) * 0.5;
    roots[static_cast<size_t>(bi)] = mean;
    roots[static_cast<size_t>(bj)] = mean;
  }
}

// Eigenvalues of a real symmetric 3x3 matrix by the trigonometric formula,
// descending. Exact on diagonal input and stable at double/triple roots.
inline std::array<double, 3> sym3_eigenvalues_trig(const Mat3d& m) {
  const double p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
  std::array<double, 3> eig;
  if (p1 == 0.0) {
    eig = {m(0, 0), m(1, 1), m(2, 2)};
    std::sort(eig.begin(), eig.end(), std::greater<double>());
    return eig;
  }
  const double q = trace(m) / 3.0;
  const double p2 = (m(0, 0) - q) * (m(0, 0) - q) + (m(1, 1) - q) * (m(1, 1) - q) +
                    (m(2, 2) - q) * (m(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  Mat3d bmat = (m - Mat3d::diagonal(q, q, q)) * (1.0 / p);
  double r = det(bmat) / 2.0;
  r = std::clamp(r, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  eig[0] = q + 2.0 * p * std::cos(phi);
  eig[2] = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  eig[1] = 3.0 * q - eig[0] - eig[2];
  return eig;
}

inline bool eig_order_before(const cplx& x, const cplx& y) {
  if (x.real() != y.real()) return x.real() > y.real();
  return x.imag() > y.imag();
}

}  // namespace detail

// Eigenvalues of a (bilinear-)symmetric 3x3 matrix, ordered by descending real
// part with ties broken by descending imaginary part. Real symmetric input
// uses the trigonometric closed form; complex input uses Cardano.
template <class T>
std::array<cplx, 3> eig_sym3(const Mat3<T>& m,
                             const Tolerances& tol = default_tolerances()) {
  const double scale = frobenius_norm(m);
  if (frobenius_norm(m - transpose(m)) > tol.symmetry * std::max(scale, 1e-300))
    throw NotSymmetric();
  if constexpr (!is_complex_v<T>) {
    const auto ev = detail::sym3_eigenvalues_trig(m);
    return {cplx(ev[0]), cplx(ev[1]), cplx(ev[2])};
  } else {
    // characteristic polynomial x^3 - tr x^2 + c2 x - det
    const T tr = trace(m);
    const T c2 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) -
                 m(0, 2) * m(2, 0) + m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    const T d = det(m);
    auto roots = detail::cubic_roots_cardano(-cplx(tr), cplx(c2), -cplx(d),
                                             scale * scale * scale);
    detail::merge_clustered_roots(roots, scale);
    std::sort(roots.begin(), roots.end(), detail::eig_order_before);
    return roots;
  }
}

// ---------------------------------------------------------------------------
// Dense symmetric Jacobi eigensolver
// ---------------------------------------------------------------------------

namespace detail {

// Cyclic Jacobi on a dense symmetric matrix stored row-major in a (n x n).
// On return eigenvalues are descending in eval and the columns of evec (also
// row-major n x n) are the matching orthonormal eigenvectors.
inline void jacobi_eigen_sym(std::vector<double> a, int n, std::vector<double>& eval,
                             std::vector<double>& evec) {
  evec.assign(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) evec[static_cast<size_t>(i * n + i)] = 1.0;
  auto at = [&](int i, int j) -> double& { return a[static_cast<size_t>(i * n + j)]; };
  auto vt = [&](int i, int j) -> double& { return evec[static_cast<size_t>(i * n + j)]; };

  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    double diag = 0.0;
    for (int i = 0; i < n; ++i) diag += at(i, i) * at(i, i);
    if (off <= 1e-30 * std::max(diag, 1e-300)) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double app = at(p, p), aqq = at(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                      : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = vt(k, p), vkq = vt(k, q);
          vt(k, p) = c * vkp - s * vkq;
          vt(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  eval.resize(static_cast<size_t>(n));
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return at(i, i) > at(j, j); });
  std::vector<double> v2 = evec;
  for (int j = 0; j < n; ++j) {
    eval[static_cast<size_t>(j)] = at(order[static_cast<size_t>(j)], order[static_cast<size_t>(j)]);
    for (int i = 0; i < n; ++i)
      vt(i, j) = v2[static_cast<size_t>(i * n + order[static_cast<size_t>(j)])];
  }
}

inline Vec3d orthonormal_complement(const Vec3d& u) {
  // unit vector orthogonal to unit u: cross with the least-aligned basis vector
  int k = 0;
  double best = std::abs(u[0]);
  for (int i = 1; i < 3; ++i)
    if (std::abs(u[i]) < best) { best = std::abs(u[i]); k = i; }
  Vec3d w = cross(u, Vec3d::unit(k));
  return w / norm(w);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// svd3: proper-rotation SVD of a real 3x3 matrix
// ---------------------------------------------------------------------------

struct Svd3 {
  Rotation3d u;
  Vec3d sigma;  // sigma[0] >= sigma[1] >= |sigma[2]|
  Rotation3d v;
};

// M = U diag(sigma) V^T with U, V in SO(3). sigma[0], sigma[1] >= 0 always;
// sigma[2] carries the sign of det M, so all three are non-negative exactly
// when det M >= 0 (a reflection cannot be written with two proper rotations
// and a non-negative diagonal).
inline Svd3 svd3(const Mat3d& m) {
  const Mat3d g = transpose(m) * m;
  std::vector<double> a(g.m.begin(), g.m.end()), eval, evec;
  detail::jacobi_eigen_sym(a, 3, eval, evec);

  Mat3d vmat;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) vmat(i, j) = evec[static_cast<size_t>(3 * i + j)];
  if (det(vmat) < 0.0) vmat.set_col(2, -vmat.col(2));

  const double scale = std::sqrt(std::max(eval[0], 0.0));

  Vec3d u0, u1;
  const Vec3d mv0 = m * vmat.col(0);
  const double n0 = norm(mv0);
  u0 = (n0 > 1e-300) ? mv0 / n0 : Vec3d::unit(0);
  Vec3d mv1 = m * vmat.col(1);
  mv1 -= u0 * dot(u0, mv1);
  const double n1 = norm(mv1);
  u1 = (n1 > 1e-14 * std::max(scale, 1e-300)) ? mv1 / n1 : detail::orthonormal_complement(u0);
  Vec3d sigma{dot(u0, m * vmat.col(0)), dot(u1, m * vmat.col(1)), 0.0};
  if (sigma[0] < 0.0) { u0 = -u0; sigma[0] = -sigma[0]; }
  if (sigma[1] < 0.0) { u1 = -u1; sigma[1] = -sigma[1]; }
  const Vec3d u2 = cross(u0, u1);
  sigma[2] = dot(u2, m * vmat.col(2));

  Svd3 out;
  out.u = Rotation3d::trusted(Mat3d::from_cols(u0, u1, u2));
  out.sigma = sigma;
  out.v = Rotation3d::trusted(vmat);
  return out;
}

// Unit right/left null vectors of a real 3x3 matrix (the singular vectors of
// least singular value).
inline Vec3d right_null_vector(const Mat3d& m) { return svd3(m).v.matrix().col(2); }
inline Vec3d left_null_vector(const Mat3d& m) { return svd3(m).u.matrix().col(2); }

// ---------------------------------------------------------------------------
// svd_2x3: B = U [s0 0 0; 0 s1 0] V^T, U in SO(2), V in SO(3), s0 >= s1 >= 0
// ---------------------------------------------------------------------------

struct Svd2x3 {
  double u[2][2];  // proper 2x2 rotation
  double sigma[2];
  Rotation3d v;
};

inline Svd2x3 svd_2x3(const Vec3d& row0, const Vec3d& row1) {
  // eigen-decompose the 2x2 Gram matrix B B^T
  const double a = dot(row0, row0), b = dot(row0, row1), c = dot(row1, row1);
  const double tr2 = 0.5 * (a + c);
  const double gap = std::hypot(0.5 * (a - c), b);
  const double l0 = tr2 + gap, l1 = std::max(tr2 - gap, 0.0);

  double c0, s0;  // first eigenvector (c0, s0)
  if (gap <= 1e-30 * std::max(tr2, 1e-300)) {
    c0 = 1.0; s0 = 0.0;
  } else if (a - l1 >= c - l1) {
    c0 = a - l1; s0 = b;
  } else {
    c0 = b; s0 = c - l1;
  }
  {
    const double n = std::hypot(c0, s0);
    if (n > 0) { c0 /= n; s0 /= n; }
    else { c0 = 1.0; s0 = 0.0; }
  }

  Svd2x3 out;
  out.u[0][0] = c0; out.u[1][0] = s0;   // first left singular vector
  out.u[0][1] = -s0; out.u[1][1] = c0;  // second; det = +1 by construction

  const double scale = std::sqrt(std::max(l0, 0.0));
  Vec3d v0, v1;
  Vec3d bv0 = row0 * c0 + row1 * s0;           // B^T u0
  const double n0 = norm(bv0);
  v0 = (n0 > 1e-300) ? bv0 / n0 : Vec3d::unit(0);
  Vec3d bv1 = row0 * (-s0) + row1 * c0;        // B^T u1
  bv1 -= v0 * dot(v0, bv1);
  const double n1 = norm(bv1);
  v1 = (n1 > 1e-14 * std::max(scale, 1e-300)) ? bv1 / n1 : detail::orthonormal_complement(v0);

  out.sigma[0] = dot(v0, row0 * c0 + row1 * s0);
  out.sigma[1] = dot(v1, row0 * (-s0) + row1 * c0);
  if (out.sigma[0] < 0.0) { v0 = -v0; out.sigma[0] = -out.sigma[0]; }
  if (out.sigma[1] < 0.0) { v1 = -v1; out.sigma[1] = -out.sigma[1]; }
  // pin the remaining pair-flip gauge (U, v0, v1) -> (-U, -v0, -v1), which
  // preserves det U = +1 and the signs of the singular values: dominant
  // component of v0 positive
  int big = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(v0[i]) > std::abs(v0[big])) big = i;
  if (v0[big] < 0.0) {
    v0 = -v0;
    v1 = -v1;
    for (auto& row : out.u)
      for (double& x : row) x = -x;
  }
  out.v = Rotation3d::trusted(Mat3d::from_cols(v0, v1, cross(v0, v1)));
  return out;
}

// ---------------------------------------------------------------------------
// Householder alignment
// ---------------------------------------------------------------------------

// Proper rotation H with H a = (0, 0, |a|)^T. The reflection is composed with
// diag(1,-1,1) to restore det = +1; the reflection vector is computed in a
// cancellation-free form so the gamma = +|a| convention is stable even for a
// nearly aligned with +e3.
inline Rotation3d householder_to_e3(const Vec3d& a, double* gamma_out = nullptr) {
  const double n = norm(a);
  if (n < 1e-300) throw ZeroVector();
  if (gamma_out) *gamma_out = n;

  Vec3d w;
  const double denom = n + a[2];
  if (denom > 1e-15 * n) {
    // w = a - n e3 with the third component rationalized: n - a2 = (a0^2+a1^2)/(n+a2)
    w = {a[0], a[1], -(a[0] * a[0] + a[1] * a[1]) / denom};
  } else {
    w = {a[0], a[1], a[2] - n};  // a near -n e3: no cancellation
  }
  const double ww = dot(w, w);
  if (ww <= 1e-60 * n * n) return Rotation3d();  // already aligned with +e3

  const Mat3d h0 = Mat3d::identity() - outer(w, w) * (2.0 / ww);
  Mat3d h = h0;
  h.set_row(1, -h0.row(1));  // diag(1,-1,1) * h0
  return Rotation3d::trusted(h);
}

// ---------------------------------------------------------------------------
// Isotropic vectors and rotations between them
// ---------------------------------------------------------------------------

inline bool is_isotropic(const CVec3& s, double tol = default_tolerances().isotropy) {
  const double n2 = norm2(s);
  if (n2 <= 0.0) return false;
  return std::abs(dot(s, s)) <= tol * n2;
}

namespace detail {

// Any nonzero isotropic s factors as |x| * R * (e1 + i e2) with R in SO(3):
// the real and imaginary parts are orthogonal with equal norm.
inline void isotropic_frame(const CVec3& s, Mat3d& r, double& nx) {
  const Vec3d x{s[0].real(), s[1].real(), s[2].real()};
  const Vec3d y{s[0].imag(), s[1].imag(), s[2].imag()};
  nx = norm(x);
  if (nx < 1e-300) throw NotIsotropic("isotropic vector has vanishing real part");
  r = Mat3d::from_cols(x / nx, y / nx, cross(x, y) / (nx * nx));
}

// Nearest exactly isotropic vector to a nearly isotropic s: rotate the
// (real, imaginary) pair to orthogonality, then equalize the two norms.
inline CVec3 isotropize(const CVec3& s) {
  const Vec3d x{s[0].real(), s[1].real(), s[2].real()};
  const Vec3d y{s[0].imag(), s[1].imag(), s[2].imag()};
  const double gxx = dot(x, x), gxy = dot(x, y), gyy = dot(y, y);
  const double th = 0.5 * std::atan2(2.0 * gxy, gxx - gyy);
  const double ct = std::cos(th), st = std::sin(th);
  const Vec3d x2 = x * ct + y * st;
  const Vec3d y2 = y * ct - x * st;
  const double nx = norm(x2), ny = norm(y2);
  if (nx < 1e-300 || ny < 1e-300) throw NotIsotropic();
  const double g = std::sqrt(nx * ny);
  const Vec3d x3 = x2 * (g / nx), y3 = y2 * (g / ny);
  const cplx phase = std::exp(cplx(0.0, th));
  CVec3 out;
  for (int i = 0; i < 3; ++i) out[i] = phase * cplx(x3[i], y3[i]);
  return out;
}

}  // namespace detail

// Complex rotation about e3; scales e1 + i e2 by exp(-i theta), which covers
// every nonzero complex factor as theta ranges over C.
inline CMat3 rotation_z_complex(cplx theta) {
  const cplx c = std::cos(theta), s = std::sin(theta);
  CMat3 r = CMat3::identity();
  r(0, 0) = c; r(0, 1) = -s;
  r(1, 0) = s; r(1, 1) = c;
  return r;
}

// R in SO(3,C) with R s1 = s2 for nonzero isotropic s1, s2 (including the
// relative scale, which is absorbed by a purely imaginary rotation angle
// about e3).
inline CRotation3 isotropic_rotation(const CVec3& s1, const CVec3& s2,
                                     const Tolerances& tol = default_tolerances()) {
  if (norm2(s1) <= 0.0 || norm2(s2) <= 0.0) throw NotIsotropic("zero vector");
  if (!is_isotropic(s1, tol.isotropy) || !is_isotropic(s2, tol.isotropy))
    throw NotIsotropic();
  Mat3d r1, r2;
  double n1, n2;
  detail::isotropic_frame(s1, r1, n1);
  detail::isotropic_frame(s2, r2, n2);
  const cplx theta(0.0, std::log(n2 / n1));
  const CMat3 rz = rotation_z_complex(theta);
  return CRotation3::trusted(to_complex(r2) * rz * transpose(to_complex(r1)));
}

// ---------------------------------------------------------------------------
// Complex null vectors and bilinear-orthonormal completion
// ---------------------------------------------------------------------------

// Unit (conjugated norm) right null vector of a singular complex matrix,
// from the cross product of its two most independent rows; falls back to the
// orthogonal plane of the dominant row for rank <= 1.
inline CVec3 right_null_vector(const CMat3& m) {
  const double nm = frobenius_norm(m);
  if (nm < 1e-300) throw NullVectorFailure("zero matrix");
  const CVec3 r[3] = {m.row(0), m.row(1), m.row(2)};
  CVec3 best{};
  double best_norm = -1.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const CVec3 c = cross(r[i], r[j]);
      const double n = norm(c);
      if (n > best_norm) { best_norm = n; best = c; }
    }
  if (best_norm > 1e-13 * nm * nm) return best / cplx(best_norm);

  int k = 0;
  double rn = norm(r[0]);
  for (int i = 1; i < 3; ++i)
    if (norm(r[i]) > rn) { rn = norm(r[i]); k = i; }
  best_norm = -1.0;
  for (int e = 0; e < 3; ++e) {
    const CVec3 c = cross(r[k], CVec3::unit(e));
    const double n = norm(c);
    if (n > best_norm) { best_norm = n; best = c; }
  }
  if (best_norm <= 0.0) throw NullVectorFailure();
  return best / cplx(best_norm);
}

inline CVec3 left_null_vector(const CMat3& m) { return right_null_vector(transpose(m)); }

namespace detail {

// Q in SO(3,C) with Q e3 = a, for a with a^T a = 1 (bilinear). The first
// column is a normalized bilinear-orthogonal complement, the second its cross
// product with a; det comes out +1 automatically.
inline CMat3 complete_triad_e3(const CVec3& a) {
  int best = 0;
  double best_mag = std::abs(cplx(1) - dot(CVec3::unit(0), a) * dot(CVec3::unit(0), a));
  for (int e = 1; e < 3; ++e) {
    const cplx d = dot(CVec3::unit(e), a);
    const double mag = std::abs(cplx(1) - d * d);
    if (mag > best_mag) { best_mag = mag; best = e; }
  }
  const CVec3 eb = CVec3::unit(best);
  const CVec3 u0 = eb - a * dot(eb, a);
  const cplx uu = dot(u0, u0);
  if (std::abs(uu) < 1e-26) throw NullVectorFailure("no bilinear-orthonormal completion");
  const CVec3 u = u0 / std::sqrt(uu);
  return CMat3::from_cols(u, cross(a, u), a);
}

}  // namespace detail

}  // namespace trifocal
