#pragma once

#include <algorithm>
#include <random>

#include "tryon/fitting.hpp"
#include "tryon/head_model.hpp"

namespace tryon::testing {

struct Truth {
  ParamVector params;
  WeakPerspectiveCamera cam;
};

// Ground-truth draw for generate-then-recover runs: zero global pose, jaw
// mostly opening about x, camera in a typical photo range.
inline Truth draw_truth(const HeadModelAsset& asset, std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Truth t;
  t.params = ParamVector::zeros(asset);
  for (auto& b : t.params.beta) b = 2.0 * u(g);
  for (auto& e : t.params.psi) e = 0.8 * u(g);
  t.params.jaw_pose = Vec3(0.125 + 0.125 * u(g), 0.05 * u(g), 0.05 * u(g));
  t.cam.scale = 3.5 + 1.5 * u(g);
  t.cam.translation = Vec2(500.0 + 300.0 * u(g), 500.0 + 300.0 * u(g));
  return t;
}

inline Observation2D synthesize(const HeadModelAsset& asset, const Truth& t) {
  Observation2D obs;
  obs.points = project(embed_landmarks(asset, decode(asset, t.params)), t.cam);
  obs.confidence.assign(kNumLandmarks, 1.0);
  return obs;
}

inline double relative_error(const Eigen::VectorXd& est, const Eigen::VectorXd& truth) {
  return (est - truth).norm() / std::max(truth.norm(), 1e-12);
}

struct BlockErrors {
  double beta = 0, psi = 0, jaw = 0, camera = 0;
  double worst() const { return std::max({beta, psi, jaw, camera}); }
};

inline BlockErrors block_errors(const Truth& t, const FitResult& r) {
  BlockErrors e;
  e.beta = relative_error(r.params.beta, t.params.beta);
  e.psi = relative_error(r.params.psi, t.params.psi);
  e.jaw = relative_error(r.params.jaw_pose, t.params.jaw_pose);
  Eigen::Vector3d est(r.camera->scale, r.camera->translation.x(), r.camera->translation.y());
  Eigen::Vector3d tru(t.cam.scale, t.cam.translation.x(), t.cam.translation.y());
  e.camera = relative_error(est, tru);
  return e;
}

}  // namespace tryon::testing
