// Synthetic three-view scenes and the end-to-end experiment pipeline:
// generate cameras and points, project, optionally add pixel noise, estimate
// the tensor linearly, evaluate every constraint family and run the
// calibration decision. Everything is a pure function of (seed, config).

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trifocal/calibration.hpp"
#include "trifocal/constraints.hpp"
#include "trifocal/random.hpp"
#include "trifocal/tensor.hpp"
#include "trifocal/types.hpp"

namespace trifocal {

struct SceneConfig {
  int point_count = 20;
  double depth_min = 2.0;
  double depth_max = 6.0;
  double baseline_min = 0.5;
  double baseline_max = 2.0;
  double noise_sigma = 0.0;  // isotropic Gaussian, image units
  bool with_calibration = false;  // apply random upper-triangular K's
};

struct SyntheticScene {
  CameraTriple cameras;
  std::vector<std::array<double, 4>> points;       // homogeneous, w = 1
  std::vector<std::array<Vec3d, 3>> observations;  // per point: q1, q2, q3
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline Mat3d random_calibration(Rng& rng) {
  // focal in [400, 1200], small skew, principal point near (300, 250)
  Mat3d k = Mat3d::identity();
  k(0, 0) = rng.uniform(400.0, 1200.0);
  k(1, 1) = k(0, 0) * rng.uniform(0.9, 1.1);
  k(0, 1) = rng.uniform(-5.0, 5.0);
  k(0, 2) = rng.uniform(250.0, 350.0);
  k(1, 2) = rng.uniform(200.0, 300.0);
  return k;
}

}  // namespace detail

inline SyntheticScene generate_scene(std::uint64_t seed, const SceneConfig& cfg) {
  if (cfg.point_count < 7) throw ConfigInvalid("need at least 7 points");
  if (!(cfg.depth_min > 0.0) || cfg.depth_max < cfg.depth_min ||
      cfg.baseline_max < cfg.baseline_min || cfg.noise_sigma < 0.0)
    throw ConfigInvalid();

  Rng rng(seed);
  SyntheticScene scene;
  scene.seed = seed;
  scene.noise_sigma = cfg.noise_sigma;

  // moderate rotations keep the shared field of view non-empty
  auto small_rotation = [&rng]() {
    Vec3d axis = rng.normal_vec3();
    const double n = norm(axis);
    axis = (n > 1e-12) ? axis / n : Vec3d::unit(2);
    const double angle = rng.uniform(-0.4, 0.4);
    const Mat3d k = skew(axis);
    const Mat3d r = Mat3d::identity() + k * std::sin(angle) + (k * k) * (1.0 - std::cos(angle));
    return Rotation3d::trusted(r);
  };

  CalibratedCameras cams;
  cams.r2 = small_rotation();
  cams.r3 = small_rotation();
  auto baseline = [&rng, &cfg]() {
    Vec3d dir = rng.normal_vec3();
    const double n = norm(dir);
    dir = (n > 1e-12) ? dir / n : Vec3d::unit(0);
    return dir * rng.uniform(cfg.baseline_min, cfg.baseline_max);
  };
  cams.t2 = baseline();
  cams.t3 = baseline();
  scene.cameras.cams = cams;
  if (cfg.with_calibration) {
    scene.cameras.k = {detail::random_calibration(rng), detail::random_calibration(rng),
                       detail::random_calibration(rng)};
  }

  scene.points.reserve(static_cast<size_t>(cfg.point_count));
  scene.observations.reserve(static_cast<size_t>(cfg.point_count));
  int guard = 0;
  while (static_cast<int>(scene.points.size()) < cfg.point_count) {
    if (++guard > 100000) throw ConfigInvalid("could not place points in front of all cameras");
    const double z = rng.uniform(cfg.depth_min, cfg.depth_max);
    const Vec3d x{rng.uniform(-0.6, 0.6) * z, rng.uniform(-0.6, 0.6) * z, z};
    const Vec3d x2 = cams.r2 * x + cams.t2;
    const Vec3d x3 = cams.r3 * x + cams.t3;
    if (x2[2] <= 0.1 || x3[2] <= 0.1) continue;

    std::array<Vec3d, 3> q{x, x2, x3};
    if (scene.cameras.k) {
      for (int v = 0; v < 3; ++v) q[static_cast<size_t>(v)] = (*scene.cameras.k)[static_cast<size_t>(v)] * q[static_cast<size_t>(v)];
    }
    for (auto& qi : q) {
      qi = qi / qi[2];  // inhomogeneous image point (w = 1)
      if (cfg.noise_sigma > 0.0) {
        qi[0] += cfg.noise_sigma * rng.normal();
        qi[1] += cfg.noise_sigma * rng.normal();
      }
    }
    scene.points.push_back({x[0], x[1], x[2], 1.0});
    scene.observations.push_back(q);
  }
  return scene;
}

inline TrifocalTensor ground_truth_tensor(const SyntheticScene& scene) {
  TrifocalTensor that = trifocal_from_cameras(scene.cameras.cams);
  if (scene.cameras.k) {
    const auto& k = *scene.cameras.k;
    return uncalibrate(that, k[0], k[1], k[2]);
  }
  return that.normalized();
}

struct ExperimentRecord {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string tensor_source;  // "built" or "estimated"
  double estimation_error = 0.0;   // distance to ground truth, up to scale
  ConstraintReport report;         // on the working-frame tensor
  std::optional<ConstraintReport> calibrated_report;  // after removing known K's
  CalibrationStatus verdict = CalibrationStatus::Indeterminate;
  double verdict_residual = 0.0;
  std::string error;  // nonempty when a stage failed; other fields best-effort
};

// Estimate from the observations, evaluate every family, undo known
// calibrations and decide calibrated / not.
inline ExperimentRecord run_pipeline(const SyntheticScene& scene, double tol = 1e-8) {
  ExperimentRecord rec;
  rec.seed = scene.seed;
  rec.tensor_source = "estimated";
  try {
    std::vector<PointTriple> triples;
    triples.reserve(scene.observations.size());
    for (const auto& ob : scene.observations) triples.push_back({ob[0], ob[1], ob[2]});
    const TrifocalTensor estimated = estimate_linear(triples);
    rec.estimation_error = tensor_distance_up_to_scale(estimated, ground_truth_tensor(scene));
    rec.report = evaluate_report(estimated, tol);

    TrifocalTensor decision_frame = estimated;
    if (scene.cameras.k) {
      const auto& k = *scene.cameras.k;
      decision_frame = calibrated_frame(estimated, k[0], k[1], k[2]);
      rec.calibrated_report = evaluate_report(decision_frame, tol);
    }
    const auto verdict = is_calibrated(decision_frame, tol);
    rec.verdict = verdict.status;
    rec.verdict_residual = verdict.max_residual;
  } catch (const Error& e) {
    rec.error = e.what();
  }
  return rec;
}

}  // namespace trifocal
