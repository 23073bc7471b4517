// The calibrated / not-calibrated decision for real trifocal tensors and the
// constructive recovery of a calibrated parameterization. A real trifocal
// tensor is calibrated exactly when the 15 quartic constraints vanish; the
// decomposition canonicalizes, resolves the sign branches numerically by
// validating A3 A3^T = theta^2 I, and conjugates the canonical-frame poses
// back through the canonicalizing rotations.

#pragma once

#include <array>
#include <optional>

#include "trifocal/canonical.hpp"
#include "trifocal/constraints.hpp"
#include "trifocal/tensor.hpp"
#include "trifocal/types.hpp"

namespace trifocal {

enum class CalibrationStatus { Calibrated, NotCalibrated, Indeterminate };

struct CalibrationVerdict {
  CalibrationStatus status = CalibrationStatus::Indeterminate;
  std::array<double, 15> quartic_residuals{};  // |p_1| .. |p_15| at unit tensor norm
  double max_residual = 0.0;
  double tolerance = 0.0;
};

struct CalibratedDecomposition {
  Rotation3d r2, r3;
  Vec3d t2, t3;
  double theta = 0.0;        // scale of the third camera block in the canonical frame
  bool degenerate_freedom = false;  // vanishing translation leaves r3 arbitrary; identity returned
  CanonicalizationResult canonicalization;
};

// Calibrated iff max |p_k| <= tau on the unit-norm tensor; NotCalibrated at
// 10 tau; Indeterminate between (never decomposed).
inline CalibrationVerdict is_calibrated(const TrifocalTensor& t, double tau = 1e-8) {
  CalibrationVerdict v;
  v.tolerance = tau;
  const auto p = quartics15(t.normalized());
  for (size_t i = 0; i < 15; ++i) {
    v.quartic_residuals[i] = std::abs(p[i]);
    v.max_residual = std::max(v.max_residual, v.quartic_residuals[i]);
  }
  if (v.max_residual <= tau)
    v.status = CalibrationStatus::Calibrated;
  else if (v.max_residual >= 10.0 * tau)
    v.status = CalibrationStatus::NotCalibrated;
  else
    v.status = CalibrationStatus::Indeterminate;
  return v;
}

namespace detail {

// In the canonical frame the tensor factors as
//   T'_k = A2 e_k (0 0 mu2) - (0 0 -1)^T e_k^T A3^T
// with A2 = diag(1, 1, e2) and A3 carrying the remaining parameters; the sign
// e2 is the one making A3 A3^T a multiple of the identity.
struct CanonicalFactorization {
  Mat3d a2, a3;
  double theta2 = 0.0;
  double deviation = 0.0;  // | A3 A3^T - theta^2 I |
  int eps2 = 1;
};

inline CanonicalFactorization resolve_branch(const CanonicalTensor& c) {
  CanonicalFactorization best;
  bool have = false;
  for (int eps2 : {1, -1}) {
    Mat3d a3;
    a3(0, 0) = c.nu1;
    a3(0, 1) = c.nu2;
    a3(1, 0) = c.rho1;
    a3(1, 1) = c.rho2;
    a3(1, 2) = c.rho3;
    a3(2, 0) = c.sigma1;
    a3(2, 1) = c.sigma2;
    a3(2, 2) = c.sigma3 - eps2 * c.mu2;
    const Mat3d gram = a3 * transpose(a3);
    const double theta2 = trace(gram) / 3.0;
    const double dev = frobenius_norm(gram - Mat3d::identity() * theta2);
    if (!have || dev < best.deviation) {
      have = true;
      best.a3 = a3;
      best.theta2 = theta2;
      best.deviation = dev;
      best.eps2 = eps2;
    }
  }
  best.a2 = Mat3d::diagonal(1.0, 1.0, static_cast<double>(best.eps2));
  return best;
}

}  // namespace detail

// Recover (R2, t2, R3, t3, theta) with trifocal_from_cameras(result)
// proportional to T. Throws NotCalibratedInput unless the verdict is
// Calibrated, CanonicalizationFailure if the canonical form is not reached,
// and CaseResolutionFailure if neither sign branch validates numerically.
inline CalibratedDecomposition decompose_calibrated(const TrifocalTensor& t,
                                                    double tau = 1e-8,
                                                    const Tolerances& tol = default_tolerances()) {
  const TrifocalTensor tn = t.normalized();
  const auto verdict = is_calibrated(tn, tau);
  if (verdict.status != CalibrationStatus::Calibrated)
    throw NotCalibratedInput();

  CalibratedDecomposition out;
  out.canonicalization = canonicalize(tn, tol);
  if (out.canonicalization.zero_pattern_residual > 1e3 * tol.pattern)
    throw CanonicalizationFailure();

  const CanonicalTensor& c = out.canonicalization.canonical;
  // a real calibrated parameterization requires equal leading singular values
  if (std::abs(c.lambda1 * c.lambda1 - c.mu2 * c.mu2) > tol.equal_singular)
    throw CaseResolutionFailure("leading canonical parameters are not equal in magnitude");

  const auto branch = detail::resolve_branch(c);

  Rotation3d r2p, r3p;
  Vec3d t2p, t3p;
  const double det_a2 = static_cast<double>(branch.eps2);

  if (branch.theta2 <= 1e-20) {
    // vanishing second-camera translation: T'_k = A2 e_k (0 0 mu2) alone and
    // the third rotation is pure gauge
    out.degenerate_freedom = true;
    out.theta = 0.0;
    r3p = Rotation3d();
    t2p = Vec3d::zero();
  } else {
    if (branch.deviation > 100.0 * std::max(tau, 1e-12) * std::max(branch.theta2, 1.0))
      throw CaseResolutionFailure();
    out.theta = std::sqrt(branch.theta2);
    Mat3d r3m = branch.a3 * (1.0 / out.theta);
    Vec3d t2v{0.0, 0.0, -out.theta};
    if (det(r3m) < 0.0) {  // push the reflection into the (R3, t2) sign pair
      r3m = -r3m;
      t2v = -t2v;
    }
    r3p = Rotation3d::trusted(r3m);
    t2p = t2v;
  }

  Mat3d r2m = branch.a2;
  Vec3d t3v{0.0, 0.0, c.mu2};
  if (det_a2 < 0.0) {  // same for the (R2, t3) pair
    r2m = -r2m;
    t3v = -t3v;
  }
  r2p = Rotation3d::trusted(r2m);
  t3p = t3v;

  // conjugate the canonical-frame poses back to the input frame
  const Rotation3d& q1 = out.canonicalization.q1;
  const Rotation3d& q2 = out.canonicalization.q2;
  const Rotation3d& q3 = out.canonicalization.q3;
  out.r2 = Rotation3d::trusted(transpose(q2.matrix()) * r2p.matrix() * q1.matrix());
  out.r3 = Rotation3d::trusted(transpose(q3.matrix()) * r3p.matrix() * q1.matrix());
  out.t2 = transpose(q2.matrix()) * t2p;
  out.t3 = transpose(q3.matrix()) * t3p;
  return out;
}

// The twelve radical-membership witnesses evaluated at canonical parameters:
// seven polynomials in the first group, five in the second. Each vanishes on
// every canonical tensor whose fifteen quartics vanish.
struct RadicalWitnesses {
  std::array<double, 7> group1{};
  std::array<double, 5> group2{};

  double max_abs() const {
    double w = 0.0;
    for (double x : group1) w = std::max(w, std::abs(x));
    for (double x : group2) w = std::max(w, std::abs(x));
    return w;
  }
};

inline RadicalWitnesses radical_witness_polys(const CanonicalTensor& c) {
  const double l1 = c.lambda1, m2 = c.mu2;
  const double n1 = c.nu1, n2 = c.nu2;
  const double r1 = c.rho1, r2 = c.rho2, r3 = c.rho3;
  const double s1 = c.sigma1, s2 = c.sigma2, s3 = c.sigma3;

  RadicalWitnesses w;
  const double dl = l1 * l1 - m2 * m2;
  const double rr = r3 * r3 + s3 * s3;
  w.group1[0] = dl * (l1 * l1 + s1 * s1);
  w.group1[1] = dl * (m2 * m2 + s2 * s2);
  w.group1[2] = r3 * (n1 * s1 + n2 * s2);
  w.group1[3] = r3 * (n1 * r1 + n2 * r2);
  w.group1[4] = r3 * rr * (n1 * n1 + n2 * n2 - r1 * r1 - r2 * r2 - r3 * r3);
  w.group1[5] = rr * (r1 * s1 + r2 * s2 + r3 * (s3 + m2)) * (r1 * s1 + r2 * s2 + r3 * (s3 - m2));
  w.group1[6] = r3 * rr *
                (n1 * n1 + n2 * n2 - s1 * s1 - s2 * s2 - (s3 + m2) * (s3 + m2)) *
                (n1 * n1 + n2 * n2 - s1 * s1 - s2 * s2 - (s3 - m2) * (s3 - m2));

  w.group2[0] = (n1 * n1 + r1 * r1 + s1 * s1) * (s1 * s1 + s2 * s2 - r3 * r3 + dl);
  w.group2[1] = (n2 * n2 + r2 * r2 + s2 * s2) * (s1 * s1 + s2 * s2 - r3 * r3 - dl);
  w.group2[2] = n1 * n2 + r1 * r2 + s1 * s2;
  w.group2[3] = n1 * n1 + r1 * r1 + s1 * s1 - n2 * n2 - r2 * r2 - s2 * s2 + dl;
  w.group2[4] = (n1 * n1 + r1 * r1 + s1 * s1 - r3 * r3 - (s3 + m2) * (s3 + m2) + dl) *
                (n1 * n1 + r1 * r1 + s1 * s1 - r3 * r3 - (s3 - m2) * (s3 - m2) - dl);

  return w;
}

}  // namespace trifocal
