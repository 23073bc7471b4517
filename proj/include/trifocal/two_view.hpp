// Two-view relative orientation: fundamental and essential matrices, the
// scalar and cubic characterizations of essential matrices, and the SVD-based
// pose extraction.

#pragma once

#include <cstdlib>
#include <optional>
#include <vector>

#include "trifocal/linalg.hpp"
#include "trifocal/types.hpp"

namespace trifocal {

struct FundamentalMatrix {
  Mat3d m;
};

template <class T>
struct EssentialMatrixT {
  Mat3<T> m;
  std::optional<Vec3<T>> t;         // factors retained when built from a pose
  std::optional<Rotation3<T>> rot;
  bool degenerate = false;          // t == 0 at construction
};

using EssentialMatrix = EssentialMatrixT<double>;

// F = [a]_x A for the camera pair ([I|0], [A|a]).
inline FundamentalMatrix fundamental_from_cameras(const Mat3d& a_mat, const Vec3d& a) {
  return {skew(a) * a_mat};
}

// E = [t]_x R.
template <class T>
EssentialMatrixT<T> essential_from_pose(const Rotation3<T>& r, const Vec3<T>& t) {
  EssentialMatrixT<T> e;
  e.m = skew(t) * r.matrix();
  e.t = t;
  e.rot = r;
  e.degenerate = norm(t) == 0.0;
  return e;
}

// tr(MM^T)^2 - 2 tr((MM^T)^2): vanishes iff the two potentially nonzero
// eigenvalues of MM^T coincide. Homogeneous of degree four.
template <class T>
T trace_quartic(const Mat3<T>& m) {
  const Mat3<T> g = m * transpose(m);
  const T t1 = trace(g);
  return t1 * t1 - T(2) * trace(g * g);
}

// (tr(MM^T) I - 2 MM^T) M; zero exactly on the closure of the essential set.
template <class T>
Mat3<T> essential_cubic_residual(const Mat3<T>& m) {
  const Mat3<T> g = m * transpose(m);
  return (Mat3<T>::identity() * trace(g) - g * T(2)) * m;
}

enum class EssentialVerdict { Essential, NotEssential };

struct EssentialClassification {
  EssentialVerdict verdict = EssentialVerdict::NotEssential;
  double det_residual = 0.0;    // |det M| after unit normalization
  double quartic_residual = 0.0;
  int rank = 3;                 // numerical rank; limits of essential matrices may have rank < 2
};

// det M == 0 and the trace quartic == 0, both tested after scaling M to unit
// Frobenius norm (the constraints are homogeneous of degree 3 and 4).
inline EssentialClassification classify_essential_real(const Mat3d& m, double tau = 1e-9) {
  EssentialClassification out;
  const double n = frobenius_norm(m);
  if (n < 1e-300) {
    out.verdict = EssentialVerdict::Essential;  // zero matrix: degenerate limit
    out.rank = 0;
    return out;
  }
  const Mat3d mn = m * (1.0 / n);
  out.det_residual = std::abs(det(mn));
  out.quartic_residual = std::abs(trace_quartic(mn));
  const auto s = svd3(mn).sigma;
  out.rank = (s[0] > 1e-12) + (s[1] > 1e-12 * s[0]) + (std::abs(s[2]) > 1e-12 * s[0]);
  out.verdict = (out.det_residual <= tau && out.quartic_residual <= tau)
                    ? EssentialVerdict::Essential
                    : EssentialVerdict::NotEssential;
  return out;
}

struct PoseCandidate {
  Rotation3d r;
  Vec3d t;  // unit norm
};

// The four (R, t) candidates with skew(t) R proportional to E, via the twisted
// pair of the SVD recipe. No cheirality test happens here: candidates are
// returned unranked and callers with point data must disambiguate themselves.
inline std::vector<PoseCandidate> decompose_essential(const Mat3d& e) {
  const Svd3 usv = svd3(e);
  if (usv.sigma[1] <= 1e-6 * usv.sigma[0] || usv.sigma[0] <= 0.0)
    throw DegenerateRank("essential matrix has rank < 2");

  Mat3d w = Mat3d::zero();
  w(0, 1) = -1;
  w(1, 0) = 1;
  w(2, 2) = 1;
  const Mat3d& u = usv.u.matrix();
  const Mat3d& v = usv.v.matrix();
  const Mat3d r1 = u * w * transpose(v);
  const Mat3d r2 = u * transpose(w) * transpose(v);
  const Vec3d t = u.col(2);

  std::vector<PoseCandidate> out;
  out.push_back({Rotation3d::trusted(r1), t});
  out.push_back({Rotation3d::trusted(r1), -t});
  out.push_back({Rotation3d::trusted(r2), t});
  out.push_back({Rotation3d::trusted(r2), -t});
  return out;
}

// Relative deviation of skew(t) R from the line spanned by E; scale chosen by
// least squares, so proportionality with either sign counts as a match.
inline double pose_residual(const Mat3d& e, const PoseCandidate& cand) {
  const Mat3d built = skew(cand.t) * cand.r.matrix();
  double num = 0.0, den = 0.0;
  for (size_t k = 0; k < 9; ++k) {
    num += built.m[k] * e.m[k];
    den += built.m[k] * built.m[k];
  }
  const double scale = (den > 0.0) ? num / den : 0.0;
  return frobenius_norm(built * scale - e) / std::max(frobenius_norm(e), 1e-300);
}

}  // namespace trifocal
