// Canonicalization: every real trifocal tensor can be carried by per-view
// rotations to a ten-parameter form whose slices are
//   [0 0 l1; 0 0 0; n1 r1 s1], [0 0 0; 0 0 m2; n2 r2 s2], [0 0 0; 0 0 0; 0 r3 s3].
// The rotations are built constructively: Householder alignment of both
// epipoles onto e3, a proper-rotation SVD of the leading 2x3 camera block and
// one last planar rotation in the third view.

#pragma once

#include <optional>
#include <vector>

#include "trifocal/linalg.hpp"
#include "trifocal/tensor.hpp"
#include "trifocal/types.hpp"

namespace trifocal {

// The ten surviving entries of the canonical form.
struct CanonicalTensor {
  double lambda1 = 0, mu2 = 0;
  double nu1 = 0, nu2 = 0;
  double rho1 = 0, rho2 = 0, rho3 = 0;
  double sigma1 = 0, sigma2 = 0, sigma3 = 0;

  TrifocalTensor assemble() const {
    TrifocalTensor t;
    t[0](0, 2) = lambda1;
    t[0](2, 0) = nu1;
    t[0](2, 1) = rho1;
    t[0](2, 2) = sigma1;
    t[1](1, 2) = mu2;
    t[1](2, 0) = nu2;
    t[1](2, 1) = rho2;
    t[1](2, 2) = sigma2;
    t[2](2, 1) = rho3;
    t[2](2, 2) = sigma3;
    return t;
  }
};

struct CanonicalizationResult {
  CanonicalTensor canonical;
  TrifocalTensor transformed;      // transform(T, q1, q2, q3), zero pattern included
  Rotation3d q1, q2, q3;

  // audit trail of the construction
  Rotation3d h2, h3;               // epipole-aligning Householder rotations
  double gamma2 = 0, gamma3 = 0;   // |a2|, |a3| (unit epipoles give 1)
  Mat3d recovered_a2, recovered_a3;  // camera blocks recovered from the tensor
  double u2x2[2][2] = {{1, 0}, {0, 1}};
  Rotation3d v;
  double w2x2[2][2] = {{1, 0}, {0, 1}};

  double zero_pattern_residual = 0.0;  // max pattern-zero entry / |T|
  double sigma_gap = 0.0;              // lambda1 - mu2 of the 2x3 SVD
};

// True iff the 17 pattern-zero entries are all <= tol * |T|.
inline bool is_canonical_pattern(const TrifocalTensor& t, double tol) {
  const double n = t.frobenius_norm();
  if (n < 1e-300) return true;
  double worst = 0.0;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const bool kept = (i == 2 && !(k == 2 && j == 0)) || (k == 0 && i == 0 && j == 2) ||
                          (k == 1 && i == 1 && j == 2);
        if (!kept) worst = std::max(worst, std::abs(t[k](i, j)));
      }
  return worst <= tol * n;
}

namespace detail {

// Recover camera blocks (A2, A3) for given epipoles from
// T_k = A2 e_k a3^T - a2 e_k^T A3^T. The 27x18 system is rank deficient
// (simultaneously shifting A2 by a2 g^T and A3 by a3 g^T changes nothing), so
// the minimum-norm solution is taken through the eigendecomposition of the
// normal matrix; ridge > 0 regularizes instead of truncating, which the gauge
// invariance test uses as an independent second route.
inline void recover_camera_blocks(const TrifocalTensor& t, const Vec3d& a2, const Vec3d& a3,
                                  Mat3d& a2_mat, Mat3d& a3_mat, double ridge = 0.0) {
  // unknown layout: x[0..8] = A2 row-major, x[9..17] = A3 row-major
  std::vector<double> d(27 * 18, 0.0);
  std::vector<double> rhs(27, 0.0);
  int eq = 0;
  for (int k = 0; k < 3; ++k)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        // T_k(r, c) = A2(r, k) a3[c] - a2[r] A3(c, k)
        d[static_cast<size_t>(eq * 18 + 3 * r + k)] += a3[c];
        d[static_cast<size_t>(eq * 18 + 9 + 3 * c + k)] -= a2[r];
        rhs[static_cast<size_t>(eq)] = t[k](r, c);
        ++eq;
      }

  std::vector<double> gram(18 * 18, 0.0), atb(18, 0.0);
  for (int e = 0; e < 27; ++e) {
    const double* row = d.data() + 18 * e;
    for (int i = 0; i < 18; ++i) {
      atb[static_cast<size_t>(i)] += row[i] * rhs[static_cast<size_t>(e)];
      for (int j = i; j < 18; ++j) gram[static_cast<size_t>(18 * i + j)] += row[i] * row[j];
    }
  }
  for (int i = 0; i < 18; ++i)
    for (int j = 0; j < i; ++j)
      gram[static_cast<size_t>(18 * i + j)] = gram[static_cast<size_t>(18 * j + i)];

  std::vector<double> eval, evec;
  jacobi_eigen_sym(gram, 18, eval, evec);

  std::array<double, 18> x{};
  const double cutoff = 1e-10 * std::max(eval[0], 1e-300);
  for (int m = 0; m < 18; ++m) {
    const double lam = eval[static_cast<size_t>(m)];
    double filter;
    if (ridge > 0.0)
      filter = lam / (lam * lam + ridge * ridge * eval[0] * eval[0]);
    else if (lam > cutoff)
      filter = 1.0 / lam;
    else
      continue;
    double proj = 0.0;
    for (int i = 0; i < 18; ++i) proj += evec[static_cast<size_t>(18 * i + m)] * atb[static_cast<size_t>(i)];
    proj *= filter;
    for (int i = 0; i < 18; ++i) x[static_cast<size_t>(i)] += evec[static_cast<size_t>(18 * i + m)] * proj;
  }

  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      a2_mat(r, c) = x[static_cast<size_t>(3 * r + c)];
      a3_mat(r, c) = x[static_cast<size_t>(9 + 3 * r + c)];
    }
}

// Epipole directions for the canonicalization path. Unlike epipoles() this
// never rejects degenerate inputs: rank-two slices pin the directions through
// their stacked null vectors, and when fewer than two exist (a vanishing
// camera translation makes every slice rank one) the shared dominant
// singular-vector pair of the largest slice is the consistent substitute.
inline void canonical_epipoles(const TrifocalTensor& t, Vec3d& a2, Vec3d& a3,
                               const Tolerances& tol) {
  std::array<Svd3, 3> svds;
  const auto rank = classify_slices(t, svds, tol);
  int usable = 0, largest = -1;
  double largest_sigma = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (rank[static_cast<size_t>(k)] == SliceRank::Two) ++usable;
    if (rank[static_cast<size_t>(k)] != SliceRank::Zero &&
        svds[static_cast<size_t>(k)].sigma[0] > largest_sigma) {
      largest_sigma = svds[static_cast<size_t>(k)].sigma[0];
      largest = k;
    }
  }
  if (largest < 0) throw RankDeficientSlice("zero tensor");

  if (usable >= 2) {
    for (int pass = 0; pass < 2; ++pass) {
      Mat3d stacked = Mat3d::zero();
      for (int k = 0; k < 3; ++k) {
        if (rank[static_cast<size_t>(k)] != SliceRank::Two) continue;
        const Mat3d& basis = pass == 0 ? svds[static_cast<size_t>(k)].u.matrix()
                                       : svds[static_cast<size_t>(k)].v.matrix();
        stacked.set_col(k, basis.col(2));
      }
      (pass == 0 ? a2 : a3) =
          sign_canonical(svd3(transpose(stacked)).v.matrix().col(2));
    }
  } else {
    // all slices share their row (or column) space up to scale; the dominant
    // pair of the largest slice spans it
    a2 = sign_canonical(svds[static_cast<size_t>(largest)].u.matrix().col(0));
    a3 = sign_canonical(svds[static_cast<size_t>(largest)].v.matrix().col(0));
  }
}

}  // namespace detail

// Canonicalize a real trifocal tensor. Works from the tensor alone: epipoles
// come from the slice null spaces and the camera blocks from a minimum-norm
// linear solve (the result is invariant under that solve's gauge freedom).
// Inputs that are not trifocal tensors yield a result whose
// zero_pattern_residual reports the failure instead of an exception; the
// typed errors cover only structural breakdowns.
inline CanonicalizationResult canonicalize(const TrifocalTensor& t,
                                           const Tolerances& tol = default_tolerances(),
                                           double ridge = 0.0) {
  const double tn = t.frobenius_norm();
  if (tn < 1e-300) throw RankDeficientSlice("zero tensor");

  Vec3d a2, a3;
  detail::canonical_epipoles(t, a2, a3, tol);

  CanonicalizationResult res;
  detail::recover_camera_blocks(t, a2, a3, res.recovered_a2, res.recovered_a3, ridge);

  res.h2 = householder_to_e3(a2, &res.gamma2);
  res.h3 = householder_to_e3(a3, &res.gamma3);

  // 2x3 blocks of the aligned cameras; the third rows carry the gauge freedom
  // and are never read.
  const Mat3d ha2 = res.h2.matrix() * res.recovered_a2;
  const Mat3d ha3 = res.h3.matrix() * res.recovered_a3;
  const Svd2x3 usv = svd_2x3(ha2.row(0) * res.gamma3, ha2.row(1) * res.gamma3);
  res.u2x2[0][0] = usv.u[0][0];
  res.u2x2[0][1] = usv.u[0][1];
  res.u2x2[1][0] = usv.u[1][0];
  res.u2x2[1][1] = usv.u[1][1];
  res.v = usv.v;
  res.sigma_gap = usv.sigma[0] - usv.sigma[1];

  // planar rotation zeroing entry (1,3) of W * B3 * V, with (2,3) >= 0
  const Vec3d b3v0 = transpose(usv.v.matrix()) * ha3.row(0);
  const Vec3d b3v1 = transpose(usv.v.matrix()) * ha3.row(1);
  const double x13 = b3v0[2], x23 = b3v1[2];
  const double r = std::hypot(x13, x23);
  double wc = 1.0, ws = 0.0;
  if (r > 1e-300) {
    wc = x23 / r;
    ws = x13 / r;
  }
  res.w2x2[0][0] = wc;
  res.w2x2[0][1] = -ws;
  res.w2x2[1][0] = ws;
  res.w2x2[1][1] = wc;

  auto embed = [](const double u[2][2]) {
    Mat3d m = Mat3d::identity();
    m(0, 0) = u[0][0];
    m(0, 1) = u[0][1];
    m(1, 0) = u[1][0];
    m(1, 1) = u[1][1];
    return m;
  };
  const double ut[2][2] = {{res.u2x2[0][0], res.u2x2[1][0]}, {res.u2x2[0][1], res.u2x2[1][1]}};
  res.q1 = usv.v.inverse();
  res.q2 = Rotation3d::trusted(embed(ut) * res.h2.matrix());
  res.q3 = Rotation3d::trusted(embed(res.w2x2) * res.h3.matrix());

  res.transformed = transform(t, res.q1, res.q2, res.q3);

  CanonicalTensor& c = res.canonical;
  c.lambda1 = res.transformed[0](0, 2);
  c.nu1 = res.transformed[0](2, 0);
  c.rho1 = res.transformed[0](2, 1);
  c.sigma1 = res.transformed[0](2, 2);
  c.mu2 = res.transformed[1](1, 2);
  c.nu2 = res.transformed[1](2, 0);
  c.rho2 = res.transformed[1](2, 1);
  c.sigma2 = res.transformed[1](2, 2);
  c.rho3 = res.transformed[2](2, 1);
  c.sigma3 = res.transformed[2](2, 2);

  const TrifocalTensor diff = res.transformed - c.assemble();
  res.zero_pattern_residual = diff.frobenius_norm() / tn;
  // a vanishing leading block with pattern failure means the singular value
  // decomposition genuinely lost the second camera; otherwise the residual is
  // reported for the caller to judge (the input may simply not be a tensor)
  if (res.zero_pattern_residual > 1e3 * tol.pattern &&
      usv.sigma[0] <= 1e-10 * tn * std::max(res.gamma3, 1e-300))
    throw DegenerateSVD("leading camera block has no singular value");
  return res;
}

}  // namespace trifocal
