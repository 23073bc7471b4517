#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "trifocal/calibration.hpp"
#include "trifocal/random.hpp"

using namespace trifocal;

namespace {

CalibratedCameras random_calibrated(Rng& rng) {
  return {random_rotation(rng), random_rotation(rng), rng.normal_vec3(), rng.normal_vec3()};
}

// the near-degenerate strata: short baseline, aligned translations,
// nearly equal rotations
CalibratedCameras near_degenerate(Rng& rng, int mode) {
  CalibratedCameras c = random_calibrated(rng);
  switch (mode % 3) {
    case 0:
      c.t2 = c.t2 * (1e-3 / std::max(norm(c.t2), 1e-12));
      break;
    case 1:
      c.t3 = c.t2 * rng.uniform(0.5, 2.0);
      break;
    default: {
      const Vec3d axis = rng.normal_vec3();
      const Mat3d k = skew(axis * (1e-4 / std::max(norm(axis), 1e-12)));
      c.r3 = Rotation3d::trusted(c.r2.matrix() * (Mat3d::identity() + k));
      c.r3 = Rotation3d::trusted(svd3(c.r3.matrix()).u.matrix() *
                                 transpose(svd3(c.r3.matrix()).v.matrix()));
      break;
    }
  }
  return c;
}

double roundtrip_error(const TrifocalTensor& t, const CalibratedDecomposition& d) {
  const auto rebuilt = trifocal_from_cameras(CalibratedCameras{d.r2, d.r3, d.t2, d.t3});
  return tensor_distance_up_to_scale(rebuilt, t.normalized());
}

}  // namespace

TEST_CASE("calibration verdicts") {
  Rng rng(701);
  for (int i = 0; i < 200; ++i) {
    const auto t = trifocal_from_cameras(random_calibrated(rng));
    CHECK(is_calibrated(t).status == CalibrationStatus::Calibrated);
  }
  int not_calibrated = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto t = trifocal_from_cameras(
        ProjectiveCameras{rng.normal_mat3(), rng.normal_mat3(), rng.normal_vec3(),
                          rng.normal_vec3()});
    if (is_calibrated(t).status == CalibrationStatus::NotCalibrated) ++not_calibrated;
  }
  CHECK(not_calibrated >= 990);
  CHECK(is_calibrated(oracles::eigenvalue_only_tensor()).status ==
        CalibrationStatus::NotCalibrated);
}

TEST_CASE("decomposition round trip") {
  Rng rng(702);
  for (int i = 0; i < 200; ++i) {
    const auto cams = (i % 10 == 0) ? near_degenerate(rng, i / 10) : random_calibrated(rng);
    const auto t = trifocal_from_cameras(cams).normalized();
    const auto d = decompose_calibrated(t);
    CHECK(roundtrip_error(t, d) <= 1e-7);
    CHECK(is_rotation(d.r2.matrix(), 1e-9));
    CHECK(is_rotation(d.r3.matrix(), 1e-9));
  }
}

TEST_CASE("decomposition of the identity-pose tensor") {
  const Vec3d e3{0, 0, 1};
  const auto t = trifocal_from_cameras(CalibratedCameras{Rotation3d(), Rotation3d(), e3, e3});
  const auto d = decompose_calibrated(t);
  CHECK(roundtrip_error(t, d) <= 1e-12);
}

TEST_CASE("decomposition with vanishing translation") {
  Rng rng(703);
  for (int i = 0; i < 20; ++i) {
    const CalibratedCameras cams{random_rotation(rng), random_rotation(rng), Vec3d::zero(),
                                 rng.normal_vec3()};
    const auto t = trifocal_from_cameras(cams).normalized();
    const auto d = decompose_calibrated(t);
    CHECK(d.degenerate_freedom);
    CHECK(roundtrip_error(t, d) <= 1e-7);
  }
}

TEST_CASE("decomposition rejects uncalibrated input") {
  Rng rng(704);
  const auto t = trifocal_from_cameras(ProjectiveCameras{rng.normal_mat3(), rng.normal_mat3(),
                                                         rng.normal_vec3(), rng.normal_vec3()});
  CHECK_THROWS_AS(decompose_calibrated(t.normalized()), NotCalibratedInput);
}

TEST_CASE("radical witnesses") {
  {
    const RadicalWitnesses w = radical_witness_polys(CanonicalTensor{});
    CHECK(w.max_abs() == 0.0);
  }
  Rng rng(705);
  for (int i = 0; i < 300; ++i) {
    const auto t = trifocal_from_cameras(random_calibrated(rng)).normalized();
    const auto res = canonicalize(t);
    CHECK(radical_witness_polys(res.canonical).max_abs() <= 1e-8);
  }
  // generic canonical parameters violate the witnesses
  int nonzero = 0;
  for (int i = 0; i < 100; ++i) {
    CanonicalTensor c;
    c.lambda1 = rng.normal();
    c.mu2 = rng.normal();
    c.nu1 = rng.normal();
    c.nu2 = rng.normal();
    c.rho1 = rng.normal();
    c.rho2 = rng.normal();
    c.rho3 = rng.normal();
    c.sigma1 = rng.normal();
    c.sigma2 = rng.normal();
    c.sigma3 = rng.normal();
    if (radical_witness_polys(c).max_abs() > 1e-4) ++nonzero;
  }
  CHECK(nonzero == 100);
}

TEST_CASE("complex quartic-passing tensor stays outside the real decision") {
  // all fifteen quartics vanish on it, yet it cannot enter is_calibrated or
  // decompose_calibrated: both take real tensors only, which this is not
  const auto t = oracles::quartic_passing_complex_tensor();
  double worst = 0.0;
  for (const auto& q : quartics15(t)) worst = std::max(worst, std::abs(q));
  CHECK(worst <= 1e-12);
  static_assert(!std::is_invocable_v<decltype(&is_calibrated), CTrifocalTensor, double>);
}
