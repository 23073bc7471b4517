// The polynomial constraint families of a calibrated trifocal tensor: the
// slice pair matrices U_k, V_k, the nine eigenvalue quartics, the six further
// quartics, the 99 quintics, exact monomial coefficient extraction of the
// contracted trace quartic, numerical linear-independence certificates and an
// aggregated constraint report.

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "trifocal/random.hpp"
#include "trifocal/tensor.hpp"
#include "trifocal/two_view.hpp"
#include "trifocal/types.hpp"

namespace trifocal {

// ---------------------------------------------------------------------------
// U_k / V_k
// ---------------------------------------------------------------------------

// U_k = T_k T_k^T and V_k = T_k T_{k+1}^T + T_{k+1} T_k^T with the slice
// index wrapping 3 -> 1. All six are bilinear-symmetric by construction.
template <class T>
struct SymmetricPairMatrices {
  std::array<Mat3<T>, 3> u;
  std::array<Mat3<T>, 3> v;
};

template <class T>
SymmetricPairMatrices<T> build_UV(const TrifocalTensorT<T>& t) {
  SymmetricPairMatrices<T> out;
  for (int k = 0; k < 3; ++k) {
    out.u[static_cast<size_t>(k)] = t[k] * transpose(t[k]);
    const int k1 = (k + 1) % 3;
    out.v[static_cast<size_t>(k)] = t[k] * transpose(t[k1]) + t[k1] * transpose(t[k]);
  }
  return out;
}

namespace detail {

// tr(X Y) with a summation order invariant under swapping the arguments, so
// the symmetry of the trace form holds bit for bit.
template <class T>
T trace_product_sym(const Mat3<T>& x, const Mat3<T>& y) {
  T s = x(0, 0) * y(0, 0) + x(1, 1) * y(1, 1) + x(2, 2) * y(2, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) s += x(i, j) * y(j, i) + x(j, i) * y(i, j);
  return s;
}

}  // namespace detail

// tr(X) tr(Y) - 2 tr(X Y); symmetric bilinear in its matrix arguments.
template <class T>
T trace_form(const Mat3<T>& x, const Mat3<T>& y) {
  return trace(x) * trace(y) - T(2) * detail::trace_product_sym(x, y);
}

// ---------------------------------------------------------------------------
// Quartic families
// ---------------------------------------------------------------------------

// The nine eigenvalue constraints: three base polynomials and their two
// cyclic images under 1 -> 2 -> 3 -> 1, ordered base, cycled-once,
// cycled-twice. Homogeneous of degree four.
template <class T>
std::array<T, 9> eigenvalue_quartics(const TrifocalTensorT<T>& t) {
  const auto uv = build_UV(t);
  std::array<T, 9> out;
  for (int c = 0; c < 3; ++c) {
    auto u = [&](int k) -> const Mat3<T>& { return uv.u[static_cast<size_t>((k + c) % 3)]; };
    auto v = [&](int k) -> const Mat3<T>& { return uv.v[static_cast<size_t>((k + c) % 3)]; };
    const Mat3<T> u31 = u(2) - u(0);
    out[static_cast<size_t>(3 * c + 0)] = trace_form(u31, u31) - trace_form(v(2), v(2));
    out[static_cast<size_t>(3 * c + 1)] = trace_form(u31, v(0)) + trace_form(v(1), v(2));
    out[static_cast<size_t>(3 * c + 2)] = trace_form(u(0) - u(1), v(0));
  }
  return out;
}

// The six further quartics: two base polynomials plus cyclic images, ordered
// the same way.
template <class T>
std::array<T, 6> six_quartics(const TrifocalTensorT<T>& t) {
  const auto uv = build_UV(t);
  std::array<T, 6> out;
  for (int c = 0; c < 3; ++c) {
    auto u = [&](int k) -> const Mat3<T>& { return uv.u[static_cast<size_t>((k + c) % 3)]; };
    auto v = [&](int k) -> const Mat3<T>& { return uv.v[static_cast<size_t>((k + c) % 3)]; };
    const Mat3<T> u31 = u(2) - u(0);
    out[static_cast<size_t>(2 * c + 0)] =
        trace(u(1)) * trace(u(1)) - trace(v(2)) * trace(v(2)) -
        trace(u(1) * u(1) - v(2) * v(2) + u31 * u31);
    out[static_cast<size_t>(2 * c + 1)] =
        trace(v(1)) * trace(u(0) - u(1) * T(2) - u(2)) - trace(v(0)) * trace(v(2)) +
        T(2) * trace(v(1) * u(1));
  }
  return out;
}

// p_1 .. p_15: the eigenvalue family followed by the six-quartic family.
template <class T>
std::array<T, 15> quartics15(const TrifocalTensorT<T>& t) {
  const auto e = eigenvalue_quartics(t);
  const auto s = six_quartics(t);
  std::array<T, 15> out;
  for (int i = 0; i < 9; ++i) out[static_cast<size_t>(i)] = e[static_cast<size_t>(i)];
  for (int i = 0; i < 6; ++i) out[static_cast<size_t>(9 + i)] = s[static_cast<size_t>(i)];
  return out;
}

// ---------------------------------------------------------------------------
// Quintic family
// ---------------------------------------------------------------------------

// The four base matrix equations of the quintic family at a cyclic shift.
// They are the monomial coefficient matrices of the quintic matrix
// characterization of the contracted tensor, expressed through
// Psi(X, Y) = (tr(X) I - 2X)(tr(Y) I - 2Y).
template <class T>
std::array<Mat3<T>, 4> quintic_block(const TrifocalTensorT<T>& t,
                                     const SymmetricPairMatrices<T>& uv, int shift) {
  auto u = [&](int k) -> const Mat3<T>& { return uv.u[static_cast<size_t>((k + shift) % 3)]; };
  auto v = [&](int k) -> const Mat3<T>& { return uv.v[static_cast<size_t>((k + shift) % 3)]; };
  auto tk = [&](int k) -> const Mat3<T>& { return t[(k + shift) % 3]; };

  auto deficit = [](const Mat3<T>& x) { return Mat3<T>::identity() * trace(x) - x * T(2); };
  auto psi = [&](const Mat3<T>& x, const Mat3<T>& y) { return deficit(x) * deficit(y); };
  auto psi2 = [&](const Mat3<T>& x, const Mat3<T>& y) { return psi(x, y) + psi(y, x); };

  const Mat3<T> u13 = u(0) - u(2);
  const Mat3<T> p1 = psi(u13, u13) - psi(v(2), v(2));  // Psi1(U13) - Psi1(V3)
  const Mat3<T> p2 = psi2(u13, v(2));
  const Mat3<T> p3 = psi2(u13, v(1)) + psi2(v(0), v(2));
  const Mat3<T> p4 = psi2(u13, v(0)) - psi2(v(1), v(2));

  return {p1 * tk(0) - p2 * tk(2),
          p2 * tk(0) + p1 * tk(2),
          p3 * tk(0) + p2 * tk(1) + p4 * tk(2),
          p4 * tk(0) + p1 * tk(1) - p3 * tk(2)};
}

// All 12 matrix equations (4 base x 3 cyclic shifts), 108 scalars row-major.
// The three cyclic copies of the third equation sum to zero identically, so
// only 99 of these are independent.
template <class T>
std::array<T, 108> quintics_raw108(const TrifocalTensorT<T>& t) {
  const auto uv = build_UV(t);
  std::array<T, 108> out;
  size_t pos = 0;
  for (int shift = 0; shift < 3; ++shift) {
    const auto block = quintic_block(t, uv, shift);
    for (const auto& m : block)
      for (const T& x : m.m) out[pos++] = x;
  }
  return out;
}

// The 99 quintic constraints: the raw family with the dependent block (the
// third cyclic copy of the third equation) removed. Order: shift 0 equations
// 1-4, shift 1 equations 1-4, shift 2 equations 1, 2, 4; each equation
// contributes its 9 entries row-major.
template <class T>
std::array<T, 99> quintics99(const TrifocalTensorT<T>& t) {
  const auto uv = build_UV(t);
  std::array<T, 99> out;
  size_t pos = 0;
  for (int shift = 0; shift < 3; ++shift) {
    const auto block = quintic_block(t, uv, shift);
    for (int eq = 0; eq < 4; ++eq) {
      if (shift == 2 && eq == 2) continue;
      for (const T& x : block[static_cast<size_t>(eq)].m) out[pos++] = x;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact monomial coefficient extraction
// ---------------------------------------------------------------------------

namespace detail {

// Dense-enough trivariate polynomial over exponents (i, j, k) of
// (alpha, beta, gamma); used for exact multilinear expansions, never sampled.
template <class T>
struct Poly3 {
  std::map<std::array<int, 3>, T> c;

  void add(std::array<int, 3> e, T v) {
    auto it = c.find(e);
    if (it == c.end())
      c.emplace(e, v);
    else
      it->second += v;
  }

  Poly3 operator*(const Poly3& o) const {
    Poly3 r;
    for (const auto& [ea, va] : c)
      for (const auto& [eb, vb] : o.c)
        r.add({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, va * vb);
    return r;
  }

  Poly3 operator+(const Poly3& o) const {
    Poly3 r = *this;
    for (const auto& [e, v] : o.c) r.add(e, v);
    return r;
  }

  Poly3 operator*(T s) const {
    Poly3 r = *this;
    for (auto& [e, v] : r.c) v *= s;
    return r;
  }

  // substitute gamma^2 = -(alpha^2 + beta^2) until every gamma exponent is <= 1
  Poly3 reduce_gamma() const {
    Poly3 cur = *this;
    bool changed = true;
    while (changed) {
      changed = false;
      Poly3 next;
      for (const auto& [e, v] : cur.c) {
        if (e[2] >= 2) {
          next.add({e[0] + 2, e[1], e[2] - 2}, -v);
          next.add({e[0], e[1] + 2, e[2] - 2}, -v);
          changed = true;
        } else {
          next.add(e, v);
        }
      }
      cur = std::move(next);
    }
    return cur;
  }

  T coeff(std::array<int, 3> e) const {
    auto it = c.find(e);
    return it == c.end() ? T(0) : it->second;
  }
};

// the six quadratic monomials of (alpha T1 + beta T2 + gamma T3)(...)^T and
// their exponent vectors: a^2 U1, b^2 U2, g^2 U3, ab V1, bg V2, ga V3
inline constexpr std::array<std::array<int, 3>, 6> kQuadExponents = {
    {{2, 0, 0}, {0, 2, 0}, {0, 0, 2}, {1, 1, 0}, {0, 1, 1}, {1, 0, 1}}};

}  // namespace detail

// The nine monomial coefficients of the trace quartic of the contraction
// S(s) = alpha T1 + beta T2 + gamma T3, after the reduction
// gamma^2 = -(alpha^2 + beta^2). Monomial order:
//   a^4, a^3 b, a^3 g, a^2 b^2, a^2 b g, a b^3, a b^2 g, b^4, b^3 g.
// Computed by exact polynomial expansion; the nine values vanish together
// with the eigenvalue quartics.
template <class T>
std::array<T, 9> coefficient_extraction(const TrifocalTensorT<T>& t) {
  const auto uv = build_UV(t);
  const Mat3<T>* w[6] = {&uv.u[0], &uv.u[1], &uv.u[2], &uv.v[0], &uv.v[1], &uv.v[2]};

  detail::Poly3<T> tr_poly;
  for (int m = 0; m < 6; ++m)
    tr_poly.add(detail::kQuadExponents[static_cast<size_t>(m)], trace(*w[m]));

  detail::Poly3<T> tr_sq;  // tr((S S^T)^2)
  for (int m = 0; m < 6; ++m)
    for (int m2 = 0; m2 < 6; ++m2) {
      const auto& ea = detail::kQuadExponents[static_cast<size_t>(m)];
      const auto& eb = detail::kQuadExponents[static_cast<size_t>(m2)];
      tr_sq.add({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, trace(*w[m] * *w[m2]));
    }

  const auto quartic = (tr_poly * tr_poly + tr_sq * T(-2)).reduce_gamma();

  constexpr std::array<std::array<int, 3>, 9> monomials = {{{4, 0, 0},
                                                            {3, 1, 0},
                                                            {3, 0, 1},
                                                            {2, 2, 0},
                                                            {2, 1, 1},
                                                            {1, 3, 0},
                                                            {1, 2, 1},
                                                            {0, 4, 0},
                                                            {0, 3, 1}}};
  std::array<T, 9> out;
  for (size_t i = 0; i < 9; ++i) out[i] = quartic.coeff(monomials[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Independence certificates
// ---------------------------------------------------------------------------

enum class ConstraintFamily { Eigenvalue9, Six6, Quintic99, QuinticRaw108 };

struct IndependenceCertificate {
  ConstraintFamily family;
  int family_size = 0;
  int rank = 0;
  double sigma_ratio = 0.0;  // sigma_rank+1 / sigma_1 (0 when rank == rows)
  bool pass = false;         // rank == expected independent count
};

namespace detail {

inline TrifocalTensor random_integer_tensor(Rng& rng, int lo = -4, int hi = 4) {
  TrifocalTensor t;
  for (int k = 0; k < 3; ++k)
    for (auto& x : t[k].m) x = static_cast<double>(rng.uniform_int(lo, hi));
  return t;
}

// numerical rank of a rows x cols evaluation matrix (row-major), rows
// normalized to unit length first; threshold on singular value ratio.
inline std::pair<int, double> evaluation_rank(std::vector<double>& mat, int rows, int cols,
                                              double ratio_threshold) {
  for (int r = 0; r < rows; ++r) {
    double n2 = 0.0;
    for (int c = 0; c < cols; ++c) {
      const double x = mat[static_cast<size_t>(r * cols + c)];
      n2 += x * x;
    }
    const double inv = n2 > 0.0 ? 1.0 / std::sqrt(n2) : 0.0;
    for (int c = 0; c < cols; ++c) mat[static_cast<size_t>(r * cols + c)] *= inv;
  }
  std::vector<double> gram(static_cast<size_t>(rows) * static_cast<size_t>(rows), 0.0);
  for (int i = 0; i < rows; ++i)
    for (int j = i; j < rows; ++j) {
      double s = 0.0;
      for (int c = 0; c < cols; ++c)
        s += mat[static_cast<size_t>(i * cols + c)] * mat[static_cast<size_t>(j * cols + c)];
      gram[static_cast<size_t>(i * rows + j)] = gram[static_cast<size_t>(j * rows + i)] = s;
    }
  std::vector<double> eval, evec;
  jacobi_eigen_sym(gram, rows, eval, evec);
  const double s1 = std::sqrt(std::max(eval[0], 0.0));
  if (s1 <= 0.0) return {0, 0.0};
  int rank = 0;
  double next_ratio = 0.0;
  for (int i = 0; i < rows; ++i) {
    const double si = std::sqrt(std::max(eval[static_cast<size_t>(i)], 0.0));
    if (si / s1 > ratio_threshold)
      ++rank;
    else {
      next_ratio = si / s1;
      break;
    }
  }
  return {rank, next_ratio};
}

}  // namespace detail

// Probabilistic linear-independence certificate: evaluate the family at
// N >= 3 * size random integer tensors and return the numerical rank of the
// (size x N) evaluation matrix at a 1e-6 singular value ratio threshold.
inline IndependenceCertificate independence_certificate(ConstraintFamily family, Rng& rng,
                                                        double ratio_threshold = 1e-6) {
  IndependenceCertificate cert;
  cert.family = family;
  int size = 0, expected = 0;
  switch (family) {
    case ConstraintFamily::Eigenvalue9: size = 9; expected = 9; break;
    case ConstraintFamily::Six6: size = 6; expected = 6; break;
    case ConstraintFamily::Quintic99: size = 99; expected = 99; break;
    case ConstraintFamily::QuinticRaw108: size = 108; expected = 99; break;
  }
  cert.family_size = size;
  const int n = 3 * size;
  std::vector<double> mat(static_cast<size_t>(size) * static_cast<size_t>(n));
  for (int col = 0; col < n; ++col) {
    const TrifocalTensor t = detail::random_integer_tensor(rng);
    std::vector<double> values;
    switch (family) {
      case ConstraintFamily::Eigenvalue9: {
        const auto v = eigenvalue_quartics(t);
        values.assign(v.begin(), v.end());
        break;
      }
      case ConstraintFamily::Six6: {
        const auto v = six_quartics(t);
        values.assign(v.begin(), v.end());
        break;
      }
      case ConstraintFamily::Quintic99: {
        const auto v = quintics99(t);
        values.assign(v.begin(), v.end());
        break;
      }
      case ConstraintFamily::QuinticRaw108: {
        const auto v = quintics_raw108(t);
        values.assign(v.begin(), v.end());
        break;
      }
    }
    for (int r = 0; r < size; ++r)
      mat[static_cast<size_t>(r * n + col)] = values[static_cast<size_t>(r)];
  }
  const auto [rank, ratio] = detail::evaluation_rank(mat, size, n, ratio_threshold);
  cert.rank = rank;
  cert.sigma_ratio = ratio;
  cert.pass = rank == expected;
  return cert;
}

// ---------------------------------------------------------------------------
// Constraint report
// ---------------------------------------------------------------------------

struct FamilyReport {
  std::string name;
  std::vector<double> residuals;  // magnitudes
  double max_residual = 0.0;
  int degree = 0;      // homogeneity degree of the family
  double threshold = 0.0;
  bool pass = false;
  bool evaluated = true;  // epipolar family may be unavailable on degenerate input
};

// Residual report of every constraint family on a tensor, evaluated after
// scaling to unit Frobenius norm so thresholds are scale-free.
struct ConstraintReport {
  double input_norm = 0.0;  // norm before normalization
  double tolerance = 0.0;
  FamilyReport epipolar;       // degree 6, 2 values
  FamilyReport extended_rank;  // degree 3, 10 values
  FamilyReport eigenvalue;     // degree 4, 9 values
  FamilyReport six_quartic;    // degree 4, 6 values
  FamilyReport quintic;        // degree 5, 99 values

  bool all_pass() const {
    return (!epipolar.evaluated || epipolar.pass) && extended_rank.pass && eigenvalue.pass &&
           six_quartic.pass && quintic.pass;
  }
};

namespace detail {

template <class T, size_t N>
void fill_family(FamilyReport& fr, const std::string& name, const std::array<T, N>& values,
                 int degree, double tol) {
  fr.name = name;
  fr.degree = degree;
  fr.threshold = tol;
  fr.residuals.resize(N);
  fr.max_residual = 0.0;
  for (size_t i = 0; i < N; ++i) {
    fr.residuals[i] = std::abs(values[i]);
    fr.max_residual = std::max(fr.max_residual, fr.residuals[i]);
  }
  fr.pass = fr.max_residual <= tol;
}

}  // namespace detail

template <class T>
ConstraintReport evaluate_report(const TrifocalTensorT<T>& t, double tol = 1e-8) {
  ConstraintReport rep;
  rep.input_norm = std::sqrt(t.frobenius_norm2());
  rep.tolerance = tol;
  const TrifocalTensorT<T> tn = t.normalized();

  try {
    detail::fill_family(rep.epipolar, "epipolar", epipolar_residuals(tn), 6, tol);
  } catch (const Error&) {
    rep.epipolar.name = "epipolar";
    rep.epipolar.degree = 6;
    rep.epipolar.evaluated = false;
  }
  detail::fill_family(rep.extended_rank, "extended_rank", extended_rank_coeffs(tn), 3, tol);
  detail::fill_family(rep.eigenvalue, "eigenvalue_quartic", eigenvalue_quartics(tn), 4, tol);
  detail::fill_family(rep.six_quartic, "six_quartic", six_quartics(tn), 4, tol);
  detail::fill_family(rep.quintic, "quintic", quintics99(tn), 5, tol);
  return rep;
}

}  // namespace trifocal
