// The trifocal tensor: construction from camera triples, per-view rotation
// transforms, the calibration relation, epipole extraction, the epipolar and
// extended rank constraint families, the point incidence relation and the
// linear estimator built on it.

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "trifocal/linalg.hpp"
#include "trifocal/types.hpp"

namespace trifocal {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

// Three correlation slices T1, T2, T3; the slice index is the covariant one.
// Scale is meaningless (the tensor is a homogeneous object); slices are
// stored as given and normalized copies are produced on demand.
template <class T>
struct TrifocalTensorT {
  std::array<Mat3<T>, 3> slice{};

  Mat3<T>& operator[](int k) { return slice[static_cast<size_t>(k)]; }
  const Mat3<T>& operator[](int k) const { return slice[static_cast<size_t>(k)]; }

  double frobenius_norm2() const {
    return trifocal::frobenius_norm2(slice[0]) + trifocal::frobenius_norm2(slice[1]) +
           trifocal::frobenius_norm2(slice[2]);
  }
  double frobenius_norm() const { return std::sqrt(frobenius_norm2()); }

  TrifocalTensorT operator*(T s) const {
    TrifocalTensorT r = *this;
    for (auto& mk : r.slice) mk *= s;
    return r;
  }
  TrifocalTensorT operator-(const TrifocalTensorT& o) const {
    TrifocalTensorT r = *this;
    for (int k = 0; k < 3; ++k) r[k] -= o[k];
    return r;
  }

  TrifocalTensorT normalized() const {
    const double n = frobenius_norm();
    if (n < 1e-300) return *this;
    return *this * T(1.0 / n);
  }

  bool is_finite() const {
    return slice[0].is_finite() && slice[1].is_finite() && slice[2].is_finite();
  }
};

using TrifocalTensor = TrifocalTensorT<double>;
using CTrifocalTensor = TrifocalTensorT<cplx>;

inline CTrifocalTensor to_complex(const TrifocalTensor& t) {
  CTrifocalTensor c;
  for (int k = 0; k < 3; ++k) c[k] = to_complex(t[k]);
  return c;
}

// Calibrated configuration: P1 = [I|0], P2 = [R2|t2], P3 = [R3|t3].
template <class T>
struct CalibratedCamerasT {
  Rotation3<T> r2, r3;
  Vec3<T> t2, t3;
};
using CalibratedCameras = CalibratedCamerasT<double>;

// General (projective) configuration: P2 = [A|a], P3 = [B|b].
template <class T>
struct ProjectiveCamerasT {
  Mat3<T> a_mat, b_mat;
  Vec3<T> a, b;
};
using ProjectiveCameras = ProjectiveCamerasT<double>;

// Camera triple as carried by scenes and serialized files: a calibrated
// configuration plus optional upper-triangular calibration matrices.
struct CameraTriple {
  CalibratedCameras cams;
  std::optional<std::array<Mat3d, 3>> k;  // K1, K2, K3
};

struct EpipolePair {
  Vec3d a2;  // second-image epipole, unit norm, sign-canonical
  Vec3d a3;  // third-image epipole
};

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

// T_k = A e_k b^T - a e_k^T B^T.
template <class T>
TrifocalTensorT<T> trifocal_from_cameras(const ProjectiveCamerasT<T>& p) {
  TrifocalTensorT<T> t;
  for (int k = 0; k < 3; ++k)
    t[k] = outer(p.a_mat.col(k), p.b) - outer(p.a, p.b_mat.col(k));
  return t;
}

template <class T>
TrifocalTensorT<T> trifocal_from_cameras(const CalibratedCamerasT<T>& c) {
  ProjectiveCamerasT<T> p{c.r2.matrix(), c.r3.matrix(), c.t2, c.t3};
  return trifocal_from_cameras(p);
}

// ---------------------------------------------------------------------------
// Per-view rotations
// ---------------------------------------------------------------------------

// T'_j = Q2 * sum_k (Q1)_{jk} T_k * Q3^T. Camera triples map to conjugated
// triples, so validity and every constraint family are preserved.
template <class T>
TrifocalTensorT<T> transform(const TrifocalTensorT<T>& t, const Rotation3<T>& q1,
                             const Rotation3<T>& q2, const Rotation3<T>& q3) {
  TrifocalTensorT<T> out;
  const Mat3<T>& m1 = q1.matrix();
  for (int j = 0; j < 3; ++j) {
    Mat3<T> s = t[0] * m1(j, 0) + t[1] * m1(j, 1) + t[2] * m1(j, 2);
    out[j] = q2.matrix() * s * transpose(q3.matrix());
  }
  return out;
}

// Exact inverse of transform: T_k = Q2^T * sum_j (Q1)_{jk} T'_j * Q3.
template <class T>
TrifocalTensorT<T> inverse_transform(const TrifocalTensorT<T>& t, const Rotation3<T>& q1,
                                     const Rotation3<T>& q2, const Rotation3<T>& q3) {
  TrifocalTensorT<T> out;
  const Mat3<T>& m1 = q1.matrix();
  for (int k = 0; k < 3; ++k) {
    Mat3<T> s = t[0] * m1(0, k) + t[1] * m1(1, k) + t[2] * m1(2, k);
    out[k] = transpose(q2.matrix()) * s * q3.matrix();
  }
  return out;
}

// T_j ~ K2 * sum_k (K1^{-T})_{jk} That_k * K3^T, output at unit Frobenius
// norm (which pins the homogeneous scale).
inline TrifocalTensor uncalibrate(const TrifocalTensor& that, const Mat3d& k1,
                                  const Mat3d& k2, const Mat3d& k3) {
  // inverse-transpose of an upper-triangular matrix via cofactors
  const double d1 = det(k1);
  if (std::abs(d1) < 1e-300 || std::abs(det(k2)) < 1e-300 || std::abs(det(k3)) < 1e-300)
    throw SingularCalibration();
  const Mat3d k1_inv_t = cofactor_matrix(k1) * (1.0 / d1);

  TrifocalTensor out;
  for (int j = 0; j < 3; ++j) {
    Mat3d s = that[0] * k1_inv_t(j, 0) + that[1] * k1_inv_t(j, 1) + that[2] * k1_inv_t(j, 2);
    out[j] = k2 * s * transpose(k3);
  }
  return out.normalized();
}

// Inverse of the relation above: recover the calibrated-frame tensor from an
// uncalibrated one and known calibration matrices (unit norm output).
inline TrifocalTensor calibrated_frame(const TrifocalTensor& t, const Mat3d& k1,
                                       const Mat3d& k2, const Mat3d& k3) {
  const double d2 = det(k2), d3 = det(k3);
  if (std::abs(det(k1)) < 1e-300 || std::abs(d2) < 1e-300 || std::abs(d3) < 1e-300)
    throw SingularCalibration();
  const Mat3d k2_inv = transpose(cofactor_matrix(k2)) * (1.0 / d2);
  const Mat3d k3_inv = transpose(cofactor_matrix(k3)) * (1.0 / d3);
  TrifocalTensor out;
  for (int k = 0; k < 3; ++k) {
    Mat3d s = Mat3d::zero();
    for (int j = 0; j < 3; ++j) s += (k2_inv * t[j] * transpose(k3_inv)) * k1(j, k);
    out[k] = s;
  }
  return out.normalized();
}

// ---------------------------------------------------------------------------
// Epipoles and the epipolar constraints
// ---------------------------------------------------------------------------

namespace detail {

inline Vec3d sign_canonical(Vec3d v) {
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(v[i]) > std::abs(v[k])) k = i;
  if (v[k] < 0.0) v = -v;
  return v;
}

inline CVec3 sign_canonical(CVec3 v) {
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(v[i]) > std::abs(v[k])) k = i;
  const double mag = std::abs(v[k]);
  if (mag > 0.0) {
    const cplx phase = std::conj(v[k]) / mag;  // rotate dominant entry to the positive real axis
    for (int i = 0; i < 3; ++i) v[i] *= phase;
  }
  return v;
}

// Unit left/right null vectors of every slice. Real slices go through the
// proper-rotation SVD; complex slices through bilinear cross products.
template <class T>
void slice_null_vectors(const TrifocalTensorT<T>& t, std::array<Vec3<T>, 3>& left,
                        std::array<Vec3<T>, 3>& right, std::array<double, 3>* rank_ratio) {
  for (int k = 0; k < 3; ++k) {
    if constexpr (is_complex_v<T>) {
      left[k] = sign_canonical(left_null_vector(t[k]));
      right[k] = sign_canonical(right_null_vector(t[k]));
      if (rank_ratio) (*rank_ratio)[k] = 1.0;  // not used on the complex path
    } else {
      const Svd3 usv = svd3(t[k]);
      left[k] = sign_canonical(usv.u.matrix().col(2));
      right[k] = sign_canonical(usv.v.matrix().col(2));
      if (rank_ratio)
        (*rank_ratio)[k] = (usv.sigma[0] > 0.0) ? usv.sigma[1] / usv.sigma[0] : 0.0;
    }
  }
}

}  // namespace detail

namespace detail {

enum class SliceRank { Zero, One, Two };

// numerical rank class of every slice, relative to the tensor scale
inline std::array<SliceRank, 3> classify_slices(const TrifocalTensor& t,
                                                std::array<Svd3, 3>& svds,
                                                const Tolerances& tol) {
  const double tn = t.frobenius_norm();
  std::array<SliceRank, 3> rank{};
  for (int k = 0; k < 3; ++k) {
    svds[static_cast<size_t>(k)] = svd3(t[k]);
    const double s1 = svds[static_cast<size_t>(k)].sigma[0];
    const double s2 = svds[static_cast<size_t>(k)].sigma[1];
    if (s1 <= 1e-12 * std::max(tn, 1e-300))
      rank[static_cast<size_t>(k)] = SliceRank::Zero;
    else if (s2 <= tol.rank_guard * s1)
      rank[static_cast<size_t>(k)] = SliceRank::One;
    else
      rank[static_cast<size_t>(k)] = SliceRank::Two;
  }
  return rank;
}

}  // namespace detail

// Epipoles from the common null directions of the stacked slice null vectors.
// Slices that vanish identically constrain nothing and are skipped; a nonzero
// rank-one slice has a two-dimensional null space whose arbitrary member
// would corrupt the result, so such tensors are rejected. At least two
// rank-two slices must remain and their stacked null vectors must have rank
// exactly two.
inline EpipolePair epipoles(const TrifocalTensor& t,
                            const Tolerances& tol = default_tolerances()) {
  std::array<Svd3, 3> svds;
  const auto rank = detail::classify_slices(t, svds, tol);
  int usable = 0;
  for (int k = 0; k < 3; ++k) {
    if (rank[static_cast<size_t>(k)] == detail::SliceRank::One) throw RankDeficientSlice();
    if (rank[static_cast<size_t>(k)] == detail::SliceRank::Two) ++usable;
  }
  if (usable < 2) throw RankDeficientSlice();

  EpipolePair out;
  for (int pass = 0; pass < 2; ++pass) {
    Mat3d stacked = Mat3d::zero();
    for (int k = 0; k < 3; ++k) {
      if (rank[static_cast<size_t>(k)] != detail::SliceRank::Two) continue;
      const Mat3d& basis =
          pass == 0 ? svds[static_cast<size_t>(k)].u.matrix() : svds[static_cast<size_t>(k)].v.matrix();
      stacked.set_col(k, basis.col(2));
    }
    const Svd3 usv = svd3(transpose(stacked));
    if (usv.sigma[0] <= 0.0 || usv.sigma[1] / usv.sigma[0] <= tol.rank_guard)
      throw AmbiguousEpipole();
    (pass == 0 ? out.a2 : out.a3) = detail::sign_canonical(usv.v.matrix().col(2));
  }
  return out;
}

// The two epipolar residuals det[l1 l2 l3] and det[r1 r2 r3] on unit-scale,
// sign-canonical slice null vectors. Sextic in the tensor entries. Every
// slice must have a well-defined one-dimensional null space (real path).
template <class T>
std::array<T, 2> epipolar_residuals(const TrifocalTensorT<T>& t) {
  std::array<Vec3<T>, 3> left, right;
  std::array<double, 3> ratio{};
  detail::slice_null_vectors(t, left, right, is_complex_v<T> ? nullptr : &ratio);
  if constexpr (!is_complex_v<T>) {
    const double n = std::sqrt(t.frobenius_norm2());
    if (n < 1e-300) throw RankDeficientSlice("zero tensor");
    for (int k = 0; k < 3; ++k) {
      if (frobenius_norm(t[k]) < 1e-14 * n) throw RankDeficientSlice();
      if (ratio[k] <= default_tolerances().rank_guard) throw RankDeficientSlice();
    }
  }
  return {det(Mat3<T>::from_cols(left[0], left[1], left[2])),
          det(Mat3<T>::from_cols(right[0], right[1], right[2]))};
}

// ---------------------------------------------------------------------------
// Extended rank constraint
// ---------------------------------------------------------------------------

// The ten cubic coefficients of det(alpha T1 + beta T2 + gamma T3) in
// lexicographic monomial order
//   a^3, a^2 b, a^2 g, a b^2, a b g, a g^2, b^3, b^2 g, b g^2, g^3,
// computed by exact multilinear expansion of the determinant over rows (the
// determinant is trilinear in the rows, giving 27 elementary determinants).
template <class T>
std::array<T, 10> extended_rank_coeffs(const TrifocalTensorT<T>& t) {
  auto mono_index = [](int i, int j, int k) {
    // (i, j, k) = exponents of (alpha, beta, gamma), i + j + k == 3
    static constexpr int table[4][4] = {// indexed by [i][j]
                                        {9, 8, 7, 6},
                                        {5, 4, 3, -1},
                                        {2, 1, -1, -1},
                                        {0, -1, -1, -1}};
    (void)k;
    return table[i][j];
  };
  std::array<T, 10> c{};
  for (int m0 = 0; m0 < 3; ++m0)
    for (int m1 = 0; m1 < 3; ++m1)
      for (int m2 = 0; m2 < 3; ++m2) {
        const Mat3<T> rows =
            Mat3<T>::from_rows(t[m0].row(0), t[m1].row(1), t[m2].row(2));
        int e[3] = {0, 0, 0};
        ++e[m0];
        ++e[m1];
        ++e[m2];
        c[static_cast<size_t>(mono_index(e[0], e[1], e[2]))] += det(rows);
      }
  return c;
}

// ---------------------------------------------------------------------------
// Incidence
// ---------------------------------------------------------------------------

// [q2]_x (sum_j (q1)_j T_j) [q3]_x; the 3x3 zero matrix on corresponding
// image triples. Linear in the tensor entries.
template <class T>
Mat3<T> incidence_residual(const TrifocalTensorT<T>& t, const Vec3<T>& q1,
                           const Vec3<T>& q2, const Vec3<T>& q3) {
  const Mat3<T> s = t[0] * q1[0] + t[1] * q1[1] + t[2] * q1[2];
  return skew(q2) * s * skew(q3);
}

// ---------------------------------------------------------------------------
// Linear estimation
// ---------------------------------------------------------------------------

struct PointTriple {
  Vec3d q1, q2, q3;
};

namespace detail {

// Isotropic normalizing transform of one view: centroid to the origin, mean
// distance to sqrt(2). Identity when some point is (numerically) at infinity,
// which keeps the estimator defined for arbitrary homogeneous input.
inline Mat3d normalizing_transform(const std::vector<PointTriple>& triples, int view) {
  double cx = 0.0, cy = 0.0;
  std::vector<std::array<double, 2>> pts;
  pts.reserve(triples.size());
  for (const auto& tr : triples) {
    const Vec3d& q = view == 0 ? tr.q1 : (view == 1 ? tr.q2 : tr.q3);
    if (std::abs(q[2]) <= 1e-8 * norm(q)) return Mat3d::identity();
    pts.push_back({q[0] / q[2], q[1] / q[2]});
    cx += pts.back()[0];
    cy += pts.back()[1];
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double dist = 0.0;
  for (const auto& p : pts) dist += std::hypot(p[0] - cx, p[1] - cy);
  dist /= static_cast<double>(pts.size());
  if (dist <= 1e-12) return Mat3d::identity();
  const double s = std::sqrt(2.0) / dist;
  Mat3d h = Mat3d::identity();
  h(0, 0) = s;
  h(1, 1) = s;
  h(0, 2) = -s * cx;
  h(1, 2) = -s * cy;
  return h;
}

// Coefficient of (T_j)_{ab} in entry (r, c) of the incidence residual:
// (q1)_j * [q2]_x(r, a) * [q3]_x(b, c).
inline void incidence_rows(const PointTriple& triple, std::vector<double>& design) {
  const Vec3d q1 = triple.q1 / std::max(norm(triple.q1), 1e-300);
  const Mat3d s2 = skew(triple.q2 / std::max(norm(triple.q2), 1e-300));
  const Mat3d s3 = skew(triple.q3 / std::max(norm(triple.q3), 1e-300));
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double row[27];
      for (int j = 0; j < 3; ++j)
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            row[9 * j + 3 * a + b] = q1[j] * s2(r, a) * s3(b, c);
      design.insert(design.end(), row, row + 27);
    }
}

}  // namespace detail

// Estimate the tensor from image triples: all nine incidence equations per
// triple are stacked over the 27 entries and the least singular direction of
// the design matrix is taken, through the 27x27 normal matrix. Output at unit
// Frobenius norm. Degeneracy is judged on the singular value ladder: the
// design must have numerical rank 26 with a clear gap to sigma_27.
inline TrifocalTensor estimate_linear(const std::vector<PointTriple>& triples,
                                      const Tolerances& tol = default_tolerances()) {
  if (triples.size() < 7) throw InsufficientData("need at least 7 triples");

  // condition the data: per-view isotropic normalization, undone at the end
  const Mat3d h1 = detail::normalizing_transform(triples, 0);
  const Mat3d h2 = detail::normalizing_transform(triples, 1);
  const Mat3d h3 = detail::normalizing_transform(triples, 2);
  std::vector<PointTriple> cond;
  cond.reserve(triples.size());
  for (const auto& tr : triples) cond.push_back({h1 * tr.q1, h2 * tr.q2, h3 * tr.q3});

  std::vector<double> design;
  design.reserve(cond.size() * 9 * 27);
  for (const auto& tr : cond) detail::incidence_rows(tr, design);
  const size_t rows = design.size() / 27;

  std::vector<double> gram(27 * 27, 0.0);
  for (size_t r = 0; r < rows; ++r) {
    const double* row = design.data() + 27 * r;
    for (int i = 0; i < 27; ++i)
      for (int j = i; j < 27; ++j) gram[static_cast<size_t>(27 * i + j)] += row[i] * row[j];
  }
  for (int i = 0; i < 27; ++i)
    for (int j = 0; j < i; ++j)
      gram[static_cast<size_t>(27 * i + j)] = gram[static_cast<size_t>(27 * j + i)];

  std::vector<double> eval, evec;
  detail::jacobi_eigen_sym(gram, 27, eval, evec);

  // singular values of the design are the square roots of the gram eigenvalues
  const double s1 = std::sqrt(std::max(eval[0], 0.0));
  const double s26 = std::sqrt(std::max(eval[25], 0.0));
  const double s27 = std::sqrt(std::max(eval[26], 0.0));
  if (s26 <= 1e-10 * std::max(s1, 1e-300))
    throw DegenerateConfiguration("design matrix rank < 26");
  if (s27 > 0.0 && s26 / s27 < tol.estimator_gap)
    throw DegenerateConfiguration("null space of the design is not one-dimensional");

  TrifocalTensor t;
  for (int j = 0; j < 3; ++j)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        t[j](a, b) = evec[static_cast<size_t>(27 * (9 * j + 3 * a + b) + 26)];

  // back to the original coordinates: the normalized-frame tensor relates to
  // the original exactly like a calibrated one to its uncalibrated form, with
  // the inverse conditioning transforms in the calibration slots
  const double d1 = det(h1), d2 = det(h2), d3 = det(h3);
  const Mat3d h1_inv = transpose(cofactor_matrix(h1)) * (1.0 / d1);
  const Mat3d h2_inv = transpose(cofactor_matrix(h2)) * (1.0 / d2);
  const Mat3d h3_inv = transpose(cofactor_matrix(h3)) * (1.0 / d3);
  return uncalibrate(t, h1_inv, h2_inv, h3_inv);
}

// Relative distance between homogeneous tensors, minimized over scale.
inline double tensor_distance_up_to_scale(const TrifocalTensor& a, const TrifocalTensor& b) {
  double num = 0.0, den = 0.0;
  for (int k = 0; k < 3; ++k)
    for (size_t i = 0; i < 9; ++i) {
      num += a[k].m[i] * b[k].m[i];
      den += a[k].m[i] * a[k].m[i];
    }
  if (den < 1e-300) return b.frobenius_norm();
  const double scale = num / den;
  double err2 = 0.0;
  for (int k = 0; k < 3; ++k)
    for (size_t i = 0; i < 9; ++i) {
      const double d = scale * a[k].m[i] - b[k].m[i];
      err2 += d * d;
    }
  return std::sqrt(err2) / std::max(b.frobenius_norm(), 1e-300);
}

}  // namespace trifocal
