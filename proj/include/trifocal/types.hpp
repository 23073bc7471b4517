// Core value types: 3-vectors and 3x3 matrices over real or complex scalars,
// rotation wrappers, error hierarchy and the tolerance configuration shared by
// all modules.
//
// Convention used throughout the library: "transpose" of a complex matrix is
// the plain (bilinear, unconjugated) transpose, and dot(a, b) likewise sums
// a_i * b_i without conjugation. Norms, in contrast, are genuine norms and do
// conjugate, so tolerance tests cannot be fooled by isotropic inputs.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace trifocal {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define TRIFOCAL_DEFINE_ERROR(name, default_msg)                   \
  struct name : Error {                                            \
    name() : Error(default_msg) {}                                 \
    explicit name(const std::string& msg) : Error(msg) {}          \
  }

TRIFOCAL_DEFINE_ERROR(ZeroVector, "zero vector");
TRIFOCAL_DEFINE_ERROR(NotIsotropic, "vector is not isotropic");
TRIFOCAL_DEFINE_ERROR(NotSymmetric, "matrix is not symmetric");
TRIFOCAL_DEFINE_ERROR(NotRotation, "matrix is not a proper rotation");
TRIFOCAL_DEFINE_ERROR(DegenerateRank, "matrix rank too low");
TRIFOCAL_DEFINE_ERROR(RankDeficientSlice, "tensor slice is rank deficient");
TRIFOCAL_DEFINE_ERROR(AmbiguousEpipole, "stacked null vectors do not determine an epipole");
TRIFOCAL_DEFINE_ERROR(InsufficientData, "not enough correspondences");
TRIFOCAL_DEFINE_ERROR(DegenerateConfiguration, "degenerate point configuration");
TRIFOCAL_DEFINE_ERROR(SingularCalibration, "calibration matrix is singular");
TRIFOCAL_DEFINE_ERROR(NotTrifocalEssential, "matrix fails the trifocal essential characterization");
TRIFOCAL_DEFINE_ERROR(NullVectorFailure, "could not extract a null vector");
TRIFOCAL_DEFINE_ERROR(DegenerateLine, "line through the given point is degenerate");
TRIFOCAL_DEFINE_ERROR(DegenerateSVD, "singular value decomposition is degenerate");
TRIFOCAL_DEFINE_ERROR(NotCalibratedInput, "tensor is not calibrated");
TRIFOCAL_DEFINE_ERROR(CanonicalizationFailure, "canonicalization did not reach the target form");
TRIFOCAL_DEFINE_ERROR(CaseResolutionFailure, "no decomposition branch matched within tolerance");
TRIFOCAL_DEFINE_ERROR(ConfigInvalid, "invalid configuration");

#undef TRIFOCAL_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Tolerances
// ---------------------------------------------------------------------------

// Every threshold in the library is relative to a stated power of the input
// norm. The constants live here so that tests and the CLI agree on defaults.
struct Tolerances {
  double classify = 1e-9;        // pass threshold for scalar characterizations
  double hysteresis = 10.0;      // reject at hysteresis * classify; between is indeterminate
  double calibrated = 1e-8;      // quartic threshold of the calibration verdict
  double isotropy = 1e-10;       // |s^T s| <= isotropy * |s|^2
  double rotation = 1e-12;       // ||R R^T - I|| and |det R - 1|
  double symmetry = 1e-10;       // eig_sym3 input check
  double rank_guard = 2.2e-10;   // ~1e6 * machine eps, slice/stack rank tests
  double pattern = 1e-10;        // canonical zero-pattern residual
  double equal_singular = 1e-6;  // lambda1^2 == mu2^2 acceptance in decomposition
  double estimator_gap = 10.0;   // sigma_26 / sigma_27 guard of the linear solve
};

inline const Tolerances& default_tolerances() {
  static const Tolerances t;
  return t;
}

// ---------------------------------------------------------------------------
// Scalar traits
// ---------------------------------------------------------------------------

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  using real = double;
  static constexpr bool is_complex = false;
  static double conj(double x) { return x; }
  static double abs2(double x) { return x * x; }
  static double real_part(double x) { return x; }
  static double imag_part(double) { return 0.0; }
};

template <>
struct scalar_traits<cplx> {
  using real = double;
  static constexpr bool is_complex = true;
  static cplx conj(cplx x) { return std::conj(x); }
  static double abs2(cplx x) { return std::norm(x); }
  static double real_part(cplx x) { return x.real(); }
  static double imag_part(cplx x) { return x.imag(); }
};

template <class T>
inline constexpr bool is_complex_v = scalar_traits<T>::is_complex;

// ---------------------------------------------------------------------------
// Vec3
// ---------------------------------------------------------------------------

template <class T>
struct Vec3 {
  std::array<T, 3> v{};

  constexpr Vec3() = default;
  constexpr Vec3(T x, T y, T z) : v{x, y, z} {}

  T& operator[](int i) { return v[static_cast<size_t>(i)]; }
  const T& operator[](int i) const { return v[static_cast<size_t>(i)]; }

  Vec3 operator+(const Vec3& o) const { return {v[0] + o.v[0], v[1] + o.v[1], v[2] + o.v[2]}; }
  Vec3 operator-(const Vec3& o) const { return {v[0] - o.v[0], v[1] - o.v[1], v[2] - o.v[2]}; }
  Vec3 operator-() const { return {-v[0], -v[1], -v[2]}; }
  Vec3 operator*(T s) const { return {v[0] * s, v[1] * s, v[2] * s}; }
  Vec3 operator/(T s) const { return {v[0] / s, v[1] / s, v[2] / s}; }
  Vec3& operator+=(const Vec3& o) { *this = *this + o; return *this; }
  Vec3& operator-=(const Vec3& o) { *this = *this - o; return *this; }
  Vec3& operator*=(T s) { *this = *this * s; return *this; }

  static constexpr Vec3 zero() { return {}; }
  static constexpr Vec3 unit(int k) {
    Vec3 e;
    e[k] = T(1);
    return e;
  }

  bool is_finite() const {
    for (const T& x : v)
      if (!std::isfinite(scalar_traits<T>::abs2(x))) return false;
    return true;
  }
};

template <class T>
Vec3<T> operator*(T s, const Vec3<T>& a) { return a * s; }

// Unconjugated (bilinear) dot product, matching s^T s in all identities here.
template <class T>
T dot(const Vec3<T>& a, const Vec3<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class T>
Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[1] * b[2] - a[2] * b[1],
          a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

// Conjugating squared norm; a true norm also for complex vectors.
template <class T>
double norm2(const Vec3<T>& a) {
  return scalar_traits<T>::abs2(a[0]) + scalar_traits<T>::abs2(a[1]) +
         scalar_traits<T>::abs2(a[2]);
}

template <class T>
double norm(const Vec3<T>& a) { return std::sqrt(norm2(a)); }

using Vec3d = Vec3<double>;
using CVec3 = Vec3<cplx>;

// ---------------------------------------------------------------------------
// Mat3
// ---------------------------------------------------------------------------

template <class T>
struct Mat3 {
  // Row-major; (i, j) is row i, column j, both 0-based.
  std::array<T, 9> m{};

  constexpr Mat3() = default;

  T& operator()(int i, int j) { return m[static_cast<size_t>(3 * i + j)]; }
  const T& operator()(int i, int j) const { return m[static_cast<size_t>(3 * i + j)]; }

  static Mat3 from_rows(const Vec3<T>& r0, const Vec3<T>& r1, const Vec3<T>& r2) {
    Mat3 a;
    for (int j = 0; j < 3; ++j) {
      a(0, j) = r0[j];
      a(1, j) = r1[j];
      a(2, j) = r2[j];
    }
    return a;
  }

  static Mat3 from_cols(const Vec3<T>& c0, const Vec3<T>& c1, const Vec3<T>& c2) {
    Mat3 a;
    for (int i = 0; i < 3; ++i) {
      a(i, 0) = c0[i];
      a(i, 1) = c1[i];
      a(i, 2) = c2[i];
    }
    return a;
  }

  static Mat3 identity() {
    Mat3 a;
    a(0, 0) = a(1, 1) = a(2, 2) = T(1);
    return a;
  }

  static Mat3 zero() { return {}; }

  static Mat3 diagonal(T a, T b, T c) {
    Mat3 d;
    d(0, 0) = a;
    d(1, 1) = b;
    d(2, 2) = c;
    return d;
  }

  Vec3<T> row(int i) const { return {(*this)(i, 0), (*this)(i, 1), (*this)(i, 2)}; }
  Vec3<T> col(int j) const { return {(*this)(0, j), (*this)(1, j), (*this)(2, j)}; }

  void set_row(int i, const Vec3<T>& r) {
    for (int j = 0; j < 3; ++j) (*this)(i, j) = r[j];
  }
  void set_col(int j, const Vec3<T>& c) {
    for (int i = 0; i < 3; ++i) (*this)(i, j) = c[i];
  }

  Mat3 operator+(const Mat3& o) const {
    Mat3 r;
    for (size_t k = 0; k < 9; ++k) r.m[k] = m[k] + o.m[k];
    return r;
  }
  Mat3 operator-(const Mat3& o) const {
    Mat3 r;
    for (size_t k = 0; k < 9; ++k) r.m[k] = m[k] - o.m[k];
    return r;
  }
  Mat3 operator-() const {
    Mat3 r;
    for (size_t k = 0; k < 9; ++k) r.m[k] = -m[k];
    return r;
  }
  Mat3 operator*(T s) const {
    Mat3 r;
    for (size_t k = 0; k < 9; ++k) r.m[k] = m[k] * s;
    return r;
  }
  Mat3& operator+=(const Mat3& o) { *this = *this + o; return *this; }
  Mat3& operator-=(const Mat3& o) { *this = *this - o; return *this; }
  Mat3& operator*=(T s) { *this = *this * s; return *this; }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        r(i, j) = (*this)(i, 0) * o(0, j) + (*this)(i, 1) * o(1, j) + (*this)(i, 2) * o(2, j);
    return r;
  }

  Vec3<T> operator*(const Vec3<T>& x) const {
    return {(*this)(0, 0) * x[0] + (*this)(0, 1) * x[1] + (*this)(0, 2) * x[2],
            (*this)(1, 0) * x[0] + (*this)(1, 1) * x[1] + (*this)(1, 2) * x[2],
            (*this)(2, 0) * x[0] + (*this)(2, 1) * x[1] + (*this)(2, 2) * x[2]};
  }

  bool is_finite() const {
    for (const T& x : m)
      if (!std::isfinite(scalar_traits<T>::abs2(x))) return false;
    return true;
  }
};

template <class T>
Mat3<T> operator*(T s, const Mat3<T>& a) { return a * s; }

// Unconjugated transpose (the only transposition used in this library).
template <class T>
Mat3<T> transpose(const Mat3<T>& a) {
  Mat3<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
  return r;
}

template <class T>
T trace(const Mat3<T>& a) { return a(0, 0) + a(1, 1) + a(2, 2); }

template <class T>
T det(const Mat3<T>& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// Matrix of cofactors: entry (i,j) is (-1)^{i+j} times the complementary minor.
// The classical adjugate is its transpose.
template <class T>
Mat3<T> cofactor_matrix(const Mat3<T>& a) {
  Mat3<T> c;
  c(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  c(0, 1) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
  c(0, 2) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
  c(1, 0) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
  c(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
  c(1, 2) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
  c(2, 0) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
  c(2, 1) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
  c(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  return c;
}

template <class T>
Mat3<T> outer(const Vec3<T>& a, const Vec3<T>& b) {
  Mat3<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
  return r;
}

template <class T>
double frobenius_norm2(const Mat3<T>& a) {
  double s = 0;
  for (const T& x : a.m) s += scalar_traits<T>::abs2(x);
  return s;
}

template <class T>
double frobenius_norm(const Mat3<T>& a) { return std::sqrt(frobenius_norm2(a)); }

// [v]_x, the matrix with skew(v) * b == cross(v, b) for every b.
template <class T>
Mat3<T> skew(const Vec3<T>& a) {
  Mat3<T> r;
  r(0, 1) = -a[2];
  r(0, 2) = a[1];
  r(1, 0) = a[2];
  r(1, 2) = -a[0];
  r(2, 0) = -a[1];
  r(2, 1) = a[0];
  return r;
}

using Mat3d = Mat3<double>;
using CMat3 = Mat3<cplx>;

inline CVec3 to_complex(const Vec3d& a) { return {cplx(a[0]), cplx(a[1]), cplx(a[2])}; }

inline CMat3 to_complex(const Mat3d& a) {
  CMat3 r;
  for (size_t k = 0; k < 9; ++k) r.m[k] = cplx(a.m[k]);
  return r;
}

// ---------------------------------------------------------------------------
// Rotation3
// ---------------------------------------------------------------------------

template <class T>
bool is_rotation(const Mat3<T>& r, double tol = default_tolerances().rotation) {
  const double scale = frobenius_norm2(r);
  const Mat3<T> gram = r * transpose(r);
  if (frobenius_norm(gram - Mat3<T>::identity()) > tol * std::max(scale, 1.0)) return false;
  return scalar_traits<T>::abs2(det(r) - T(1)) <= tol * tol * std::max(scale * scale * scale, 1.0);
}

// A proper rotation, real (SO(3)) or complex (SO(3,C) with the bilinear
// transpose). Validated on construction; use trusted() for matrices that are
// rotations by construction.
template <class T>
class Rotation3 {
 public:
  Rotation3() : m_(Mat3<T>::identity()) {}

  explicit Rotation3(const Mat3<T>& m, double tol = default_tolerances().rotation) : m_(m) {
    if (!is_rotation(m, tol)) throw NotRotation();
  }

  static Rotation3 trusted(const Mat3<T>& m) {
    Rotation3 r;
    r.m_ = m;
    return r;
  }

  const Mat3<T>& matrix() const { return m_; }
  Rotation3 inverse() const { return trusted(transpose(m_)); }

  Rotation3 operator*(const Rotation3& o) const { return trusted(m_ * o.m_); }
  Vec3<T> operator*(const Vec3<T>& x) const { return m_ * x; }

 private:
  Mat3<T> m_;
};

using Rotation3d = Rotation3<double>;
using CRotation3 = Rotation3<cplx>;

}  // namespace trifocal
