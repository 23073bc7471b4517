// JSON interchange. Field order is fixed (ordered maps) and all randomness is
// seeded, so a given seed and version reproduce files byte for byte.
//
// Formats:
//   tensor          {"kind": "trifocal", "complex": bool, "slices": [[[e x3] x3] x3]}
//                   real entry: number; complex entry: [re, im]
//   correspondences {"triples": [{"q1": [x,y,w], "q2": ..., "q3": ...}]}
//   scene           {"cameras": ..., "points": ..., "observations": ..., "seed": n}

#pragma once

#include <string>

#include <json.hpp>

#include "trifocal/calibration.hpp"
#include "trifocal/canonical.hpp"
#include "trifocal/constraints.hpp"
#include "trifocal/scene.hpp"
#include "trifocal/tensor.hpp"
#include "trifocal/types.hpp"

namespace trifocal {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Basic values
// ---------------------------------------------------------------------------

inline json to_json(const Vec3d& v) { return json::array({v[0], v[1], v[2]}); }

inline json to_json(const CVec3& v) {
  json a = json::array();
  for (int i = 0; i < 3; ++i) a.push_back(json::array({v[i].real(), v[i].imag()}));
  return a;
}

inline Vec3d vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigInvalid("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json to_json(const Mat3d& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i)
    rows.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
  return rows;
}

inline json to_json(const CMat3& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) {
    json row = json::array();
    for (int j = 0; j < 3; ++j) row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(row);
  }
  return rows;
}

inline Mat3d mat3_from_json(const json& j) {
  Mat3d m;
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) m(i, c) = j.at(static_cast<size_t>(i)).at(static_cast<size_t>(c)).get<double>();
  return m;
}

// ---------------------------------------------------------------------------
// Tensors
// ---------------------------------------------------------------------------

inline json to_json(const TrifocalTensor& t) {
  json slices = json::array();
  for (int k = 0; k < 3; ++k) slices.push_back(to_json(t[k]));
  return json{{"kind", "trifocal"}, {"complex", false}, {"slices", slices}};
}

inline json to_json(const CTrifocalTensor& t) {
  json slices = json::array();
  for (int k = 0; k < 3; ++k) slices.push_back(to_json(t[k]));
  return json{{"kind", "trifocal"}, {"complex", true}, {"slices", slices}};
}

struct TensorDocument {
  bool complex = false;
  TrifocalTensor real;
  CTrifocalTensor cx;
};

inline TensorDocument tensor_from_json(const json& j) {
  if (j.value("kind", "") != std::string("trifocal"))
    throw ConfigInvalid("not a trifocal tensor document");
  TensorDocument doc;
  doc.complex = j.value("complex", false);
  const json& slices = j.at("slices");
  if (!slices.is_array() || slices.size() != 3) throw ConfigInvalid("expected 3 slices");
  for (int k = 0; k < 3; ++k)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        const json& e = slices.at(static_cast<size_t>(k)).at(static_cast<size_t>(r)).at(static_cast<size_t>(c));
        if (doc.complex) {
          doc.cx[k](r, c) = e.is_array() ? cplx(e.at(0).get<double>(), e.at(1).get<double>())
                                         : cplx(e.get<double>());
        } else {
          if (e.is_array()) throw ConfigInvalid("complex entry in a real tensor document");
          doc.real[k](r, c) = e.get<double>();
        }
      }
  const bool finite = doc.complex ? doc.cx.is_finite() : doc.real.is_finite();
  if (!finite) throw ConfigInvalid("tensor entries must be finite");
  return doc;
}

// ---------------------------------------------------------------------------
// Correspondences
// ---------------------------------------------------------------------------

inline json to_json(const std::vector<PointTriple>& triples) {
  json arr = json::array();
  for (const auto& t : triples)
    arr.push_back(json{{"q1", to_json(t.q1)}, {"q2", to_json(t.q2)}, {"q3", to_json(t.q3)}});
  return json{{"triples", arr}};
}

inline std::vector<PointTriple> triples_from_json(const json& j) {
  std::vector<PointTriple> out;
  for (const auto& e : j.at("triples"))
    out.push_back({vec3_from_json(e.at("q1")), vec3_from_json(e.at("q2")),
                   vec3_from_json(e.at("q3"))});
  return out;
}

// ---------------------------------------------------------------------------
// Scenes
// ---------------------------------------------------------------------------

inline json to_json(const SyntheticScene& s) {
  json cams{{"r2", to_json(s.cameras.cams.r2.matrix())},
            {"t2", to_json(s.cameras.cams.t2)},
            {"r3", to_json(s.cameras.cams.r3.matrix())},
            {"t3", to_json(s.cameras.cams.t3)}};
  if (s.cameras.k) {
    cams["k1"] = to_json((*s.cameras.k)[0]);
    cams["k2"] = to_json((*s.cameras.k)[1]);
    cams["k3"] = to_json((*s.cameras.k)[2]);
  }
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back(json::array({p[0], p[1], p[2], p[3]}));
  json obs = json::array();
  for (const auto& o : s.observations)
    obs.push_back(json{{"q1", to_json(o[0])}, {"q2", to_json(o[1])}, {"q3", to_json(o[2])}});
  return json{{"cameras", cams},
              {"points", pts},
              {"observations", obs},
              {"noise_sigma", s.noise_sigma},
              {"seed", s.seed}};
}

inline SyntheticScene scene_from_json(const json& j) {
  SyntheticScene s;
  const json& cams = j.at("cameras");
  s.cameras.cams.r2 = Rotation3d(mat3_from_json(cams.at("r2")));
  s.cameras.cams.r3 = Rotation3d(mat3_from_json(cams.at("r3")));
  s.cameras.cams.t2 = vec3_from_json(cams.at("t2"));
  s.cameras.cams.t3 = vec3_from_json(cams.at("t3"));
  if (cams.contains("k1")) {
    s.cameras.k = {mat3_from_json(cams.at("k1")), mat3_from_json(cams.at("k2")),
                   mat3_from_json(cams.at("k3"))};
  }
  for (const auto& p : j.at("points"))
    s.points.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>(),
                        p.at(3).get<double>()});
  for (const auto& o : j.at("observations"))
    s.observations.push_back({vec3_from_json(o.at("q1")), vec3_from_json(o.at("q2")),
                              vec3_from_json(o.at("q3"))});
  s.noise_sigma = j.value("noise_sigma", 0.0);
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

// ---------------------------------------------------------------------------
// Reports and results
// ---------------------------------------------------------------------------

inline json to_json(const FamilyReport& f) {
  json out{{"name", f.name},
           {"degree", f.degree},
           {"evaluated", f.evaluated}};
  if (f.evaluated) {
    out["max_residual"] = f.max_residual;
    out["threshold"] = f.threshold;
    out["pass"] = f.pass;
    out["residuals"] = f.residuals;
  }
  return out;
}

inline json to_json(const ConstraintReport& r) {
  return json{{"input_norm", r.input_norm},
              {"tolerance", r.tolerance},
              {"all_pass", r.all_pass()},
              {"families", json::array({to_json(r.epipolar), to_json(r.extended_rank),
                                        to_json(r.eigenvalue), to_json(r.six_quartic),
                                        to_json(r.quintic)})}};
}

inline const char* to_string(CalibrationStatus s) {
  switch (s) {
    case CalibrationStatus::Calibrated: return "calibrated";
    case CalibrationStatus::NotCalibrated: return "not_calibrated";
    default: return "indeterminate";
  }
}

inline json to_json(const CalibrationVerdict& v) {
  return json{{"status", to_string(v.status)},
              {"max_residual", v.max_residual},
              {"tolerance", v.tolerance},
              {"quartic_residuals", v.quartic_residuals}};
}

inline json to_json(const CanonicalTensor& c) {
  return json{{"lambda1", c.lambda1}, {"mu2", c.mu2},   {"nu1", c.nu1},
              {"nu2", c.nu2},         {"rho1", c.rho1}, {"rho2", c.rho2},
              {"rho3", c.rho3},       {"sigma1", c.sigma1}, {"sigma2", c.sigma2},
              {"sigma3", c.sigma3}};
}

inline json to_json(const CanonicalizationResult& r) {
  return json{{"parameters", to_json(r.canonical)},
              {"q1", to_json(r.q1.matrix())},
              {"q2", to_json(r.q2.matrix())},
              {"q3", to_json(r.q3.matrix())},
              {"zero_pattern_residual", r.zero_pattern_residual},
              {"sigma_gap", r.sigma_gap},
              {"canonical_tensor", to_json(r.canonical.assemble())}};
}

inline json to_json(const CalibratedDecomposition& d) {
  return json{{"r2", to_json(d.r2.matrix())}, {"t2", to_json(d.t2)},
              {"r3", to_json(d.r3.matrix())}, {"t3", to_json(d.t3)},
              {"theta", d.theta},             {"degenerate_freedom", d.degenerate_freedom}};
}

inline json to_json(const ExperimentRecord& rec) {
  json out{{"scenario", rec.scenario},
           {"seed", rec.seed},
           {"tensor_source", rec.tensor_source}};
  if (!rec.error.empty()) {
    out["error"] = rec.error;
    return out;
  }
  out["estimation_error"] = rec.estimation_error;
  out["verdict"] = to_string(rec.verdict);
  out["verdict_residual"] = rec.verdict_residual;
  out["report"] = to_json(rec.report);
  if (rec.calibrated_report) out["calibrated_report"] = to_json(*rec.calibrated_report);
  return out;
}

inline json to_json(const IndependenceCertificate& c) {
  const char* name = "";
  switch (c.family) {
    case ConstraintFamily::Eigenvalue9: name = "eigenvalue9"; break;
    case ConstraintFamily::Six6: name = "six6"; break;
    case ConstraintFamily::Quintic99: name = "quintic99"; break;
    case ConstraintFamily::QuinticRaw108: name = "quintic_raw108"; break;
  }
  return json{{"family", name},
              {"family_size", c.family_size},
              {"rank", c.rank},
              {"sigma_ratio", c.sigma_ratio},
              {"pass", c.pass}};
}

}  // namespace trifocal
