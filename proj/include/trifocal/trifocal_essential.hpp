// The trifocal essential matrix: a complex 3x3 matrix of the form
// s1 t1^T + t2 s2^T with nonzero isotropic s1, s2. This file implements its
// construction by contraction of a tensor with an isotropic direction, both
// characterizations (the scalar pair and the quintic matrix identity), the
// cofactor identity linking them, a constructive rank decomposition back into
// factors, and the pencil-of-lines mapping check.

#pragma once

#include <optional>
#include <utility>

#include "trifocal/linalg.hpp"
#include "trifocal/tensor.hpp"
#include "trifocal/two_view.hpp"
#include "trifocal/types.hpp"

namespace trifocal {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

// Direction (alpha, beta, gamma) with alpha^2 + beta^2 + gamma^2 = 0; the
// direction of a point on the absolute conic. Validated on construction.
class IsotropicDirection {
 public:
  explicit IsotropicDirection(const CVec3& s, double tol = 1e-12) : s_(s) {
    const double n2 = norm2(s);
    if (n2 <= 0.0) throw NotIsotropic("zero direction");
    if (std::abs(dot(s, s)) > tol * n2) throw NotIsotropic();
  }

  const CVec3& vec() const { return s_; }

 private:
  CVec3 s_;
};

struct TrifocalEssentialFactors {
  CVec3 s1, t1, t2, s2;  // S = s1 t1^T + t2 s2^T, s1/s2 nonzero isotropic
};

struct TrifocalEssential {
  CMat3 s;
  std::optional<TrifocalEssentialFactors> factors;
};

inline CMat3 reconstruct(const TrifocalEssentialFactors& f) {
  return outer(f.s1, f.t1) + outer(f.t2, f.s2);
}

// ---------------------------------------------------------------------------
// Contraction
// ---------------------------------------------------------------------------

// S = alpha T1 + beta T2 + gamma T3. Any tensor contracts; only calibrated
// tensors guarantee the trifocal essential property. When the camera triple
// is known the factors (R2 s, t3, -t2, R3 s) come along for free.
inline TrifocalEssential contract(const CTrifocalTensor& t, const IsotropicDirection& dir,
                                  const CalibratedCamerasT<cplx>* cams = nullptr) {
  const CVec3& s = dir.vec();
  TrifocalEssential out;
  out.s = t[0] * s[0] + t[1] * s[1] + t[2] * s[2];
  if (cams) {
    TrifocalEssentialFactors f;
    f.s1 = cams->r2 * s;
    f.t1 = cams->t3;
    f.t2 = -cams->t2;
    f.s2 = cams->r3 * s;
    out.factors = f;
  }
  return out;
}

inline TrifocalEssential contract(const TrifocalTensor& t, const IsotropicDirection& dir,
                                  const CalibratedCameras* cams = nullptr) {
  if (cams) {
    CalibratedCamerasT<cplx> c{CRotation3::trusted(to_complex(cams->r2.matrix())),
                               CRotation3::trusted(to_complex(cams->r3.matrix())),
                               to_complex(cams->t2), to_complex(cams->t3)};
    return contract(to_complex(t), dir, &c);
  }
  return contract(to_complex(t), dir);
}

// ---------------------------------------------------------------------------
// Characterizations
// ---------------------------------------------------------------------------

enum class CharacterizationVerdict { Pass, Indeterminate, Fail };

struct ScalarCharacterization {
  cplx det_value;
  cplx quartic_value;  // tr(SS^T)^2 - 2 tr((SS^T)^2)
  CharacterizationVerdict verdict;
};

// S is a trifocal essential matrix iff det S = 0 and the trace quartic of S
// vanishes. Residuals are judged against tau * |S|^3 and tau * |S|^4 (their
// homogeneity degrees); between tau and hysteresis * tau the verdict is
// Indeterminate rather than a guess.
inline ScalarCharacterization characterize_scalar(const CMat3& s,
                                                  const Tolerances& tol = default_tolerances()) {
  ScalarCharacterization out;
  out.det_value = det(s);
  out.quartic_value = trace_quartic(s);
  const double n = frobenius_norm(s);
  if (n < 1e-300) {
    out.verdict = CharacterizationVerdict::Pass;  // zero matrix: factors with t1 = t2 = 0
    return out;
  }
  const double r3 = std::abs(out.det_value) / (n * n * n);
  const double r4 = std::abs(out.quartic_value) / (n * n * n * n);
  const double worst = std::max(r3, r4);
  if (worst <= tol.classify)
    out.verdict = CharacterizationVerdict::Pass;
  else if (worst >= tol.hysteresis * tol.classify)
    out.verdict = CharacterizationVerdict::Fail;
  else
    out.verdict = CharacterizationVerdict::Indeterminate;
  return out;
}

// Phi(S) = (tr(SS^T) I - 2 SS^T)^2 S; the matrix characterization, zero iff
// the scalar pair vanishes. Quintic in the entries of S.
inline CMat3 characterize_matrix(const CMat3& s) {
  const CMat3 g = s * transpose(s);
  const CMat3 d = CMat3::identity() * trace(g) - g * cplx(2);
  return d * d * s;
}

template <class T>
Mat3<T> characterize_matrix(const Mat3<T>& s) {
  const Mat3<T> g = s * transpose(s);
  const Mat3<T> d = Mat3<T>::identity() * trace(g) - g * T(2);
  return d * d * s;
}

// Residual of the polynomial identity
//   Phi(M) = 4 M* det(M) - M * (tr(MM^T)^2 - 2 tr((MM^T)^2)),
// where M* is the matrix of cofactors. Holds for every 3x3 matrix, so the
// residual is pure rounding error (<= ~1e-10 |M|^5).
template <class T>
Mat3<T> cofactor_identity_residual(const Mat3<T>& m) {
  const Mat3<T> lhs = characterize_matrix(m);
  const Mat3<T> rhs = cofactor_matrix(m) * (T(4) * det(m)) - m * trace_quartic(m);
  return lhs - rhs;
}

// ---------------------------------------------------------------------------
// Constructive decomposition
// ---------------------------------------------------------------------------

namespace detail {

inline const CVec3& canonical_iso12() {
  static const CVec3 s{cplx(1), cplx(0, 1), cplx(0)};
  return s;
}
inline const CVec3& canonical_iso23() {
  static const CVec3 s{cplx(0), cplx(1), cplx(0, 1)};
  return s;
}

}  // namespace detail

// Factor S as s1 t1^T + t2 s2^T following the constructive case analysis of
// the characterization proof. The input must pass the scalar characterization
// within tolerance (rejection at the hysteresis band); the returned factors
// rebuild S to ~1e-9 relative for inputs on the variety. The factorization is
// not unique; one documented representative is produced, with t2 = 0 and an
// arbitrary isotropic s2 in the rank-one branch.
inline TrifocalEssential decompose(const CMat3& s_in,
                                   const Tolerances& tol = default_tolerances()) {
  const double ns = frobenius_norm(s_in);
  TrifocalEssential out;
  out.s = s_in;

  if (ns < 1e-300) {
    out.factors = TrifocalEssentialFactors{detail::canonical_iso12(), CVec3{}, CVec3{},
                                           detail::canonical_iso12()};
    return out;
  }

  const auto verdict = characterize_scalar(s_in, tol).verdict;
  if (verdict == CharacterizationVerdict::Fail)
    throw NotTrifocalEssential();

  const CVec3 a = right_null_vector(s_in);  // unit conjugated norm
  const cplx ata = dot(a, a);

  TrifocalEssentialFactors f;
  if (std::abs(ata) > 1e-6) {
    // Case 1: non-isotropic null direction. Rotate it onto e3 from the right,
    // so the third column vanishes.
    const CVec3 an = a / std::sqrt(ata);
    CMat3 q = detail::complete_triad_e3(an);
    CMat3 sp = s_in * q;
    CVec3 c1 = sp.col(0), c2 = sp.col(1);

    auto rel_iso = [](const CVec3& c) {
      const double n2 = norm2(c);
      return n2 > 0.0 ? std::abs(dot(c, c)) / n2 : 0.0;
    };

    if (rel_iso(c2) <= 1e-8 && rel_iso(c1) > 1e-8) {
      // move the non-isotropic column into the pivot slot
      const CMat3 swap = [] {
        CMat3 g;
        g(0, 1) = cplx(1);
        g(1, 0) = cplx(-1);
        g(2, 2) = cplx(1);
        return g;
      }();
      q = q * swap;
      sp = s_in * q;
      c1 = sp.col(0);
      c2 = sp.col(1);
    }

    if (rel_iso(c2) <= 1e-8) {
      // both columns isotropic (or zero): the matrix is rank one with an
      // isotropic column space
      if (norm(c2) < 1e-12 * ns) {
        // single isotropic column: S' = c1 e1^T
        f.s1 = c1;
        f.t1 = q * CVec3::unit(0);
        f.t2 = CVec3{};
        f.s2 = detail::canonical_iso12();
      } else {
        // rotate c2 onto (1, i, 0); the first column then collapses onto the
        // same isotropic direction and S' = (1,i,0)^T (alpha, 1, 0)
        const CVec3 c2i = detail::isotropize(c2);
        const CRotation3 rot = isotropic_rotation(c2i, detail::canonical_iso12(), tol);
        const CMat3 spp = rot.matrix() * sp;
        const cplx alpha = spp(0, 0);
        f.s1 = transpose(rot.matrix()) * detail::canonical_iso12();
        f.t1 = q * CVec3{alpha, cplx(1), cplx(0)};
        f.t2 = CVec3{};
        f.s2 = detail::canonical_iso12();
      }
    } else {
      // pivot column is non-isotropic; build a bilinear-orthonormal frame
      // (w1, w2, w1 x w2) adapted to the column span
      const cplx mu = std::sqrt(dot(c2, c2));
      const CVec3 w1 = c2 / mu;
      const cplx lambda = dot(w1, c1);
      const CVec3 g = c1 - w1 * lambda;
      const double gn = norm(g);
      const cplx gg = dot(g, g);

      if (gn > 1e-12 * ns && std::abs(gg) > 1e-10 * gn * gn) {
        const CVec3 w2 = g / std::sqrt(gg);
        const cplx nu = dot(w2, c1);
        // in this frame S'' = [[lambda, mu, 0], [nu, 0, 0], [0, 0, 0]] and the
        // quartic constraint forces lambda = i (e1 mu + e2 nu) for signs e1, e2
        double best_err = -1.0;
        int be1 = 1, be2 = 1;
        for (int e1 : {1, -1})
          for (int e2 : {1, -1}) {
            const double err = std::abs(lambda - cplx(0, 1) * (double(e1) * mu + double(e2) * nu));
            if (best_err < 0.0 || err < best_err) {
              best_err = err;
              be1 = e1;
              be2 = e2;
            }
          }
        const CMat3 p_t = CMat3::from_cols(w1, w2, cross(w1, w2));  // P^T (P has rows w1, w2, w1 x w2)
        f.s1 = p_t * CVec3{cplx(0, double(be2)), cplx(1), cplx(0)};
        f.t1 = q * CVec3{nu, cplx(0), cplx(0)};
        f.t2 = p_t * CVec3{mu, cplx(0), cplx(0)};
        f.s2 = q * CVec3{cplx(0, double(be1)), cplx(1), cplx(0)};
      } else if (gn > 1e-12 * ns) {
        // residual column is isotropic: S' = g e1^T + w1 (lambda e1 + mu e2)^T
        // and the quartic constraint makes (lambda, mu, 0) isotropic
        f.s1 = g;
        f.t1 = q * CVec3::unit(0);
        f.t2 = w1;
        f.s2 = q * CVec3{lambda, mu, cplx(0)};
      } else {
        // rank one with non-isotropic column: S' = w1 (lambda e1 + mu e2)^T,
        // the row direction is forced isotropic
        f.s1 = detail::canonical_iso12();
        f.t1 = CVec3{};
        f.t2 = w1;
        f.s2 = q * CVec3{lambda, mu, cplx(0)};
      }
    }
  } else {
    // Case 2: isotropic null direction a. Rotate (0, 1, i) onto it from the
    // right; then column3 = i * column2 and S' = c1 e1^T + c2 (0, 1, i)^T with
    // c1 isotropic by the quartic constraint.
    const CVec3 ai = detail::isotropize(a);
    const CRotation3 rot = isotropic_rotation(detail::canonical_iso23(), ai, tol);
    const CMat3 sp = s_in * rot.matrix();
    const CVec3 c1 = sp.col(0), c2 = sp.col(1);
    if (norm(c1) < 1e-12 * ns) {
      f.s1 = detail::canonical_iso23();
      f.t1 = CVec3{};
    } else {
      f.s1 = c1;
      f.t1 = rot.matrix() * CVec3::unit(0);
    }
    f.t2 = c2;
    f.s2 = rot.matrix() * detail::canonical_iso23();
  }

  out.factors = f;
  return out;
}

// ---------------------------------------------------------------------------
// Geometric mapping check
// ---------------------------------------------------------------------------

// sin of the projective angle between complex vectors: |u x v| / (|u| |v|)
// with the bilinear cross product and conjugated norms. Zero iff u and v are
// parallel in CP^2; invariant under complex rescaling of either argument.
inline double projective_sine(const CVec3& u, const CVec3& v) {
  const double nu = norm(u), nv = norm(v);
  if (nu < 1e-300 || nv < 1e-300) throw DegenerateLine("zero vector in collinearity test");
  return norm(cross(u, v)) / (nu * nv);
}

// The contraction of an uncalibrated tensor with the image of an absolute
// conic point maps any line through q3 (third image) to q2 (second image):
// S_T(q1) [q3]_x p3 ~ q2 with q1 = K1 s, qk = Kk Rk s. Returns the sine of
// the deviation angle.
inline double geometric_mapping_check(const TrifocalTensor& t, const Mat3d& k1,
                                      const Mat3d& k2, const Mat3d& k3,
                                      const CalibratedCameras& cams,
                                      const IsotropicDirection& dir, const Vec3d& p3) {
  const CVec3& s = dir.vec();
  const CMat3 k1c = to_complex(k1), k2c = to_complex(k2), k3c = to_complex(k3);
  const CVec3 q1 = k1c * s;
  const CVec3 q2 = k2c * (to_complex(cams.r2.matrix()) * s);
  const CVec3 q3 = k3c * (to_complex(cams.r3.matrix()) * s);

  const CTrifocalTensor tc = to_complex(t);
  const CMat3 s_t = tc[0] * q1[0] + tc[1] * q1[1] + tc[2] * q1[2];
  const CVec3 line = skew(q3) * to_complex(p3);
  if (norm(line) <= 1e-12 * norm(q3) * norm(p3)) throw DegenerateLine();
  const CVec3 mapped = s_t * line;
  if (norm(mapped) <= 1e-12 * frobenius_norm(s_t) * norm(line)) throw DegenerateLine();
  return projective_sine(mapped, q2);
}

}  // namespace trifocal
