#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "oracles.hpp"
#include "trifocal/io.hpp"
#include "trifocal/scene.hpp"

using namespace trifocal;

TEST_CASE("scene generation determinism") {
  const SceneConfig cfg;
  const auto a = generate_scene(12345, cfg);
  const auto b = generate_scene(12345, cfg);
  CHECK(to_json(a).dump() == to_json(b).dump());
  const auto c = generate_scene(12346, cfg);
  CHECK(to_json(a).dump() != to_json(c).dump());
}

TEST_CASE("noise-free scenes satisfy the incidence relation") {
  SceneConfig cfg;
  cfg.point_count = 15;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto scene = generate_scene(seed, cfg);
    const auto t = ground_truth_tensor(scene);
    for (const auto& ob : scene.observations) {
      const double scale = norm(ob[0]) * norm(ob[1]) * norm(ob[2]);
      CHECK(frobenius_norm(incidence_residual(t, ob[0], ob[1], ob[2])) <= 1e-10 * scale);
    }
    // depths positive in every view
    for (const auto& p : scene.points) {
      const Vec3d x{p[0], p[1], p[2]};
      CHECK(x[2] > 0.0);
      CHECK((scene.cameras.cams.r2 * x + scene.cameras.cams.t2)[2] > 0.0);
      CHECK((scene.cameras.cams.r3 * x + scene.cameras.cams.t3)[2] > 0.0);
    }
  }
}

TEST_CASE("scene configuration validation") {
  SceneConfig cfg;
  cfg.point_count = 6;
  CHECK_THROWS_AS(generate_scene(1, cfg), ConfigInvalid);
  cfg.point_count = 10;
  cfg.noise_sigma = -1.0;
  CHECK_THROWS_AS(generate_scene(1, cfg), ConfigInvalid);
}

TEST_CASE("pipeline verdicts") {
  {
    SceneConfig cfg;
    cfg.with_calibration = true;
    const auto rec = run_pipeline(generate_scene(77, cfg));
    CHECK(rec.error.empty());
    // with known calibrations removed, the noise-free tensor is calibrated
    CHECK(rec.verdict == CalibrationStatus::Calibrated);
    REQUIRE(rec.calibrated_report.has_value());
    CHECK(rec.calibrated_report->eigenvalue.pass);
  }
  {
    // raw uncalibrated tensor with unknown K: not calibrated
    SceneConfig cfg;
    cfg.with_calibration = true;
    auto scene = generate_scene(78, cfg);
    scene.cameras.k.reset();  // forget the calibrations
    const auto rec = run_pipeline(scene);
    CHECK(rec.error.empty());
    CHECK(rec.verdict == CalibrationStatus::NotCalibrated);
  }
  {
    // calibrated cameras observed directly (no K): calibrated
    const auto rec = run_pipeline(generate_scene(79, SceneConfig{}));
    CHECK(rec.error.empty());
    CHECK(rec.verdict == CalibrationStatus::Calibrated);
    CHECK(rec.estimation_error <= 1e-8);
  }
  {
    // degenerate scene: every observation from one space point
    auto scene = generate_scene(80, SceneConfig{});
    for (auto& ob : scene.observations) ob = scene.observations[0];
    const auto rec = run_pipeline(scene);
    CHECK_FALSE(rec.error.empty());
  }
}

TEST_CASE("median quartic residual grows with noise") {
  // sigma is in pixels; the calibrated configuration gives pixel-scale images
  const std::array<double, 4> sigmas = {0.0, 1e-6, 1e-4, 1e-2};
  std::array<double, 4> medians{};
  for (size_t si = 0; si < sigmas.size(); ++si) {
    std::vector<double> residuals;
    SceneConfig cfg;
    cfg.with_calibration = true;
    cfg.noise_sigma = sigmas[si];
    for (int i = 0; i < 40; ++i) {
      const auto rec = run_pipeline(generate_scene(1000 + static_cast<std::uint64_t>(i), cfg));
      if (rec.error.empty()) residuals.push_back(rec.verdict_residual);
    }
    REQUIRE(residuals.size() >= 35);
    std::sort(residuals.begin(), residuals.end());
    medians[si] = residuals[residuals.size() / 2];
  }
  CHECK(medians[0] <= medians[1]);
  CHECK(medians[1] <= medians[2]);
  CHECK(medians[2] <= medians[3]);
}

TEST_CASE("tensor JSON round trip") {
  Rng rng(801);
  {
    TrifocalTensor t;
    for (int k = 0; k < 3; ++k) t[k] = rng.normal_mat3();
    const auto doc = tensor_from_json(to_json(t));
    CHECK_FALSE(doc.complex);
    for (int k = 0; k < 3; ++k) CHECK(frobenius_norm(doc.real[k] - t[k]) == 0.0);
  }
  {
    CTrifocalTensor t;
    for (int k = 0; k < 3; ++k) t[k] = rng.normal_cmat3();
    const auto doc = tensor_from_json(to_json(t));
    CHECK(doc.complex);
    for (int k = 0; k < 3; ++k) CHECK(frobenius_norm(doc.cx[k] - t[k]) == 0.0);
  }
  CHECK_THROWS_AS(tensor_from_json(json{{"kind", "other"}}), ConfigInvalid);
}

TEST_CASE("correspondence and scene JSON round trips") {
  const auto scene = generate_scene(42, SceneConfig{});
  const auto back = scene_from_json(to_json(scene));
  CHECK(to_json(back).dump() == to_json(scene).dump());

  std::vector<PointTriple> triples;
  for (const auto& ob : scene.observations) triples.push_back({ob[0], ob[1], ob[2]});
  const auto tr_back = triples_from_json(to_json(triples));
  REQUIRE(tr_back.size() == triples.size());
  for (size_t i = 0; i < triples.size(); ++i) {
    CHECK(norm(tr_back[i].q1 - triples[i].q1) == 0.0);
    CHECK(norm(tr_back[i].q3 - triples[i].q3) == 0.0);
  }
}

TEST_CASE("experiment records are reproducible") {
  SceneConfig cfg;
  cfg.noise_sigma = 1e-4;
  auto run_once = [&cfg]() {
    json records = json::array();
    for (int i = 0; i < 5; ++i) {
      auto rec = run_pipeline(generate_scene(9000 + static_cast<std::uint64_t>(i), cfg));
      rec.scenario = "scene_" + std::to_string(i);
      records.push_back(to_json(rec));
    }
    return records.dump();
  };
  CHECK(run_once() == run_once());
}
