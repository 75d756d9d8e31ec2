#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <json.hpp>

#include "tryon/error.hpp"
#include "tryon/geom.hpp"
#include "tryon/head_model.hpp"

namespace tryon {

// Orthographic projection followed by uniform scale (pixels per mm) and a
// 2D translation (pixels). Image y grows upward in this model.
struct WeakPerspectiveCamera {
  double scale = 1.0;
  Vec2 translation = Vec2::Zero();
};

inline Vec2 project(const Vec3& p, const WeakPerspectiveCamera& cam) {
  return cam.scale * p.head<2>() + cam.translation;
}

inline std::vector<Vec2> project(std::span<const Vec3> points, const WeakPerspectiveCamera& cam) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(project(p, cam));
  return out;
}

struct EyelidPair {
  std::uint32_t upper = 0;
  std::uint32_t lower = 0;
};

/// Upper/lower eyelid landmark pairs of the 68-point convention.
inline std::vector<EyelidPair> default_eyelid_pairs() { return {{37, 41}, {38, 40}, {43, 47}, {44, 46}}; }

struct Observation2D {
  std::vector<Vec2> points;
  std::vector<double> confidence;
  std::vector<EyelidPair> eye_closure_pairs = default_eyelid_pairs();
};

struct Observation3D {
  std::vector<Vec3> points;
  std::vector<double> confidence;
  std::vector<EyelidPair> eye_closure_pairs = default_eyelid_pairs();
};

template <class Obs>
void validate_observation(const Obs& obs) {
  if (obs.points.size() != kNumLandmarks)
    throw Error(Errc::invalid_argument,
                "expected " + std::to_string(kNumLandmarks) + " landmarks, got " + std::to_string(obs.points.size()));
  if (obs.confidence.size() != kNumLandmarks)
    throw Error(Errc::invalid_argument, "confidence must have one entry per landmark");
  for (double c : obs.confidence)
    if (!(c >= 0.0 && c <= 1.0)) throw Error(Errc::invalid_argument, "confidence outside [0,1]");
  for (const auto& p : obs.points)
    if (!p.allFinite()) throw Error(Errc::invalid_argument, "non-finite landmark");
  for (const auto& pr : obs.eye_closure_pairs)
    if (pr.upper >= kNumLandmarks || pr.lower >= kNumLandmarks)
      throw Error(Errc::invalid_argument, "eyelid pair index out of range");
}

struct FitConfig {
  double lambda_beta = 1e-4;
  double lambda_psi = 1e-4;
  double w_eye = 1.0;
  int max_iters = 200;
  double rel_tol = 1e-10;
  double jacobian_step = 1e-6;
  double damping_init = 1e-3;

  void validate() const {
    if (!(lambda_beta >= 0.0) || !(lambda_psi >= 0.0) || !(w_eye >= 0.0))
      throw Error(Errc::invalid_argument, "fit weights must be nonnegative");
    if (max_iters < 1) throw Error(Errc::invalid_argument, "max_iters must be at least 1");
    if (!(rel_tol > 0.0)) throw Error(Errc::invalid_argument, "rel_tol must be positive");
    if (!(jacobian_step > 0.0)) throw Error(Errc::invalid_argument, "jacobian_step must be positive");
    if (!(damping_init > 0.0)) throw Error(Errc::invalid_argument, "damping_init must be positive");
  }
};

// Root mean square over the entries of each residual block (landmark block
// over usable landmarks only).
struct ResidualRms {
  double landmark = 0.0;
  double eye = 0.0;
  double regularization = 0.0;
};

struct FitResult {
  ParamVector params;
  std::optional<WeakPerspectiveCamera> camera;  // 2D fits only
  ResidualRms rms;
  int iterations = 0;
  bool converged = false;
  std::vector<double> cost_history;  // cost after initialization and after each accepted step
};

// ---------------------------------------------------------------------------
// Levenberg-Marquardt over a generic residual function. cost = |r|^2.

struct LmOptions {
  int max_iters = 200;
  double rel_tol = 1e-10;
  double jacobian_step = 1e-6;
  double damping_init = 1e-3;
};

struct LmReport {
  Eigen::VectorXd x;
  std::vector<double> cost_history;
  int iterations = 0;
  bool converged = false;
};

/// Central-difference Jacobian.
template <class ResidualFn>
Eigen::MatrixXd numeric_jacobian(ResidualFn&& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd xp = x;
  Eigen::MatrixXd jac;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    const Eigen::VectorXd rp = f(xp);
    xp[j] = x[j] - h;
    const Eigen::VectorXd rm = f(xp);
    xp[j] = x[j];
    if (j == 0) jac.resize(rp.size(), x.size());
    jac.col(j) = (rp - rm) / (2.0 * h);
  }
  return jac;
}

template <class ResidualFn>
LmReport levenberg_marquardt(ResidualFn&& f, Eigen::VectorXd x, const LmOptions& opt) {
  LmReport rep;
  Eigen::VectorXd r = f(x);
  double cost = r.squaredNorm();
  if (!std::isfinite(cost)) throw Error(Errc::numerical_failure, "non-finite initial cost");
  rep.cost_history.push_back(cost);

  double mu = opt.damping_init;
  for (int iter = 1; iter <= opt.max_iters; ++iter) {
    rep.iterations = iter;
    if (cost == 0.0) {
      rep.converged = true;
      break;
    }
    const Eigen::MatrixXd jac = numeric_jacobian(f, x, opt.jacobian_step);
    if (!jac.allFinite()) throw Error(Errc::numerical_failure, "non-finite Jacobian");
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() == 0.0) {
      rep.converged = true;
      break;
    }
    // Marquardt scaling; unobserved directions get a tiny floor so they stay put
    const Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12);

    bool accepted = false;
    bool stop = false;
    while (!accepted) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += mu * diag;
      const Eigen::VectorXd delta = a.ldlt().solve(-g);
      if (!delta.allFinite()) {
        mu *= 10.0;
      } else {
        const Eigen::VectorXd x_new = x + delta;
        const Eigen::VectorXd r_new = f(x_new);
        const double cost_new = r_new.squaredNorm();
        if (!std::isfinite(cost_new)) throw Error(Errc::numerical_failure, "non-finite cost during iteration");
        if (cost_new < cost) {
          const double rel = (cost - cost_new) / cost;
          x = x_new;
          r = r_new;
          cost = cost_new;
          rep.cost_history.push_back(cost);
          mu = std::max(mu / 10.0, 1e-15);
          accepted = true;
          if (rel < opt.rel_tol || delta.norm() <= 1e-15 * (x.norm() + 1e-15)) {
            rep.converged = true;
            stop = true;
          }
        } else {
          mu *= 10.0;
        }
      }
      if (!accepted && mu > 1e16) {
        // no descent direction left at working precision
        rep.converged = true;
        stop = true;
        break;
      }
    }
    if (stop) break;
  }
  rep.x = std::move(x);
  return rep;
}

// ---------------------------------------------------------------------------
// Landmark residuals

namespace detail {

inline std::size_t count_usable(const std::vector<double>& confidence) {
  std::size_t n = 0;
  for (double c : confidence)
    if (c > 0.0) ++n;
  return n;
}

struct ResidualLayout {
  Eigen::Index landmark_begin = 0, landmark_size = 0;
  Eigen::Index eye_begin = 0, eye_size = 0;
  Eigen::Index reg_begin = 0, reg_size = 0;
};

template <int Dim>
ResidualLayout layout_for(std::size_t pairs, int n_shape, int n_expression) {
  ResidualLayout l;
  l.landmark_size = static_cast<Eigen::Index>(Dim * kNumLandmarks);
  l.eye_begin = l.landmark_size;
  l.eye_size = static_cast<Eigen::Index>(Dim * pairs);
  l.reg_begin = l.eye_begin + l.eye_size;
  l.reg_size = n_shape + n_expression;
  return l;
}

// Fills data + regularization residuals from landmark positions already
// mapped into observation space (2D pixels or 3D mm).
template <int Dim, class Obs>
void fill_residuals(const std::vector<Eigen::Matrix<double, Dim, 1>>& model, const Obs& obs, const ParamVector& p,
                    const FitConfig& cfg, Eigen::VectorXd& r) {
  const auto l = layout_for<Dim>(obs.eye_closure_pairs.size(), static_cast<int>(p.beta.size()),
                                 static_cast<int>(p.psi.size()));
  r.resize(l.reg_begin + l.reg_size);
  for (std::size_t i = 0; i < kNumLandmarks; ++i)
    r.segment<Dim>(static_cast<Eigen::Index>(Dim * i)) = obs.confidence[i] * (model[i] - obs.points[i]);
  for (std::size_t k = 0; k < obs.eye_closure_pairs.size(); ++k) {
    const auto& pr = obs.eye_closure_pairs[k];
    const double w = cfg.w_eye * std::min(obs.confidence[pr.upper], obs.confidence[pr.lower]);
    const auto model_gap = model[pr.upper] - model[pr.lower];
    const auto obs_gap = obs.points[pr.upper] - obs.points[pr.lower];
    r.segment<Dim>(l.eye_begin + static_cast<Eigen::Index>(Dim * k)) = w * (model_gap - obs_gap);
  }
  r.segment(l.reg_begin, p.beta.size()) = std::sqrt(cfg.lambda_beta) * p.beta;
  r.segment(l.reg_begin + p.beta.size(), p.psi.size()) = std::sqrt(cfg.lambda_psi) * p.psi;
}

template <int Dim>
ResidualRms rms_of(const Eigen::VectorXd& r, std::size_t pairs, std::size_t usable, int n_shape, int n_expression) {
  const auto l = layout_for<Dim>(pairs, n_shape, n_expression);
  ResidualRms out;
  if (usable > 0)
    out.landmark =
        std::sqrt(r.segment(l.landmark_begin, l.landmark_size).squaredNorm() / static_cast<double>(Dim * usable));
  if (pairs > 0) out.eye = std::sqrt(r.segment(l.eye_begin, l.eye_size).squaredNorm() / static_cast<double>(Dim * pairs));
  if (l.reg_size > 0)
    out.regularization = std::sqrt(r.segment(l.reg_begin, l.reg_size).squaredNorm() / static_cast<double>(l.reg_size));
  return out;
}

// Parameter packing. 2D: [beta, psi, jaw(3), global pose(3), log scale, tx, ty].
// 3D: [beta, psi, jaw(3), global pose(3), global translation(3)].
inline Eigen::VectorXd pack_body(const ParamVector& p, Eigen::Index extra) {
  Eigen::VectorXd x(p.beta.size() + p.psi.size() + 6 + extra);
  x << p.beta, p.psi, p.jaw_pose, p.global_pose, Eigen::VectorXd::Zero(extra);
  return x;
}

inline ParamVector unpack_body(const Eigen::VectorXd& x, int n_shape, int n_expression) {
  ParamVector p;
  p.beta = x.segment(0, n_shape);
  p.psi = x.segment(n_shape, n_expression);
  p.jaw_pose = x.segment<3>(n_shape + n_expression);
  p.global_pose = x.segment<3>(n_shape + n_expression + 3);
  return p;
}

}  // namespace detail

/// Residual vector for the 2D objective: confidence-weighted landmark
/// differences, eyelid-gap differences, then sqrt(lambda)-scaled beta and psi.
inline Eigen::VectorXd residuals(const HeadModelAsset& asset, const ParamVector& params,
                                 const WeakPerspectiveCamera& cam, const Observation2D& obs, const FitConfig& cfg) {
  check_dimensions(asset, params);
  validate_observation(obs);
  const auto lm = embed_landmarks(asset, decode(asset, params));
  std::vector<Vec2> projected = project(lm, cam);
  Eigen::VectorXd r;
  detail::fill_residuals<2>(projected, obs, params, cfg, r);
  return r;
}

inline Eigen::VectorXd residuals3d(const HeadModelAsset& asset, const ParamVector& params, const Observation3D& obs,
                                   const FitConfig& cfg) {
  check_dimensions(asset, params);
  validate_observation(obs);
  const auto lm = embed_landmarks(asset, decode(asset, params));
  Eigen::VectorXd r;
  detail::fill_residuals<3>(lm, obs, params, cfg, r);
  return r;
}

namespace detail {

inline LmOptions lm_options(const FitConfig& cfg) {
  return {cfg.max_iters, cfg.rel_tol, cfg.jacobian_step, cfg.damping_init};
}

}  // namespace detail

/// LM refinement of a 2D fit from a given start. No minimum landmark count.
inline FitResult refine_landmarks2d(const HeadModelAsset& asset, const Observation2D& obs, const FitConfig& cfg,
                                    const ParamVector& start, const WeakPerspectiveCamera& cam_start) {
  cfg.validate();
  validate_observation(obs);
  check_dimensions(asset, start);
  if (!(cam_start.scale > 0.0)) throw Error(Errc::invalid_argument, "camera scale must be positive");
  const int nb = asset.n_shape(), ne = asset.n_expression();
  const auto support = landmark_support(asset);

  auto unpack = [&](const Eigen::VectorXd& x, ParamVector& p, WeakPerspectiveCamera& cam) {
    p = detail::unpack_body(x, nb, ne);
    const Eigen::Index c = nb + ne + 6;
    cam.scale = std::exp(x[c]);
    cam.translation = Vec2(x[c + 1], x[c + 2]);
  };
  auto f = [&](const Eigen::VectorXd& x) {
    ParamVector p;
    WeakPerspectiveCamera cam;
    unpack(x, p, cam);
    const auto decoded = decode_vertices(asset, p, support.vertices);
    const auto lm = landmarks_from_support(asset, support, decoded);
    std::vector<Vec2> projected = project(lm, cam);
    Eigen::VectorXd r;
    detail::fill_residuals<2>(projected, obs, p, cfg, r);
    return r;
  };

  Eigen::VectorXd x0 = detail::pack_body(start, 3);
  x0.tail<3>() << std::log(cam_start.scale), cam_start.translation;
  const LmReport rep = levenberg_marquardt(f, x0, detail::lm_options(cfg));

  FitResult out;
  WeakPerspectiveCamera cam;
  unpack(rep.x, out.params, cam);
  out.camera = cam;
  out.iterations = rep.iterations;
  out.converged = rep.converged;
  out.cost_history = rep.cost_history;
  out.rms = detail::rms_of<2>(f(rep.x), obs.eye_closure_pairs.size(), detail::count_usable(obs.confidence), nb, ne);
  return out;
}

/// Fits shape, expression, jaw, global rotation and camera to 2D landmarks.
inline FitResult fit_landmarks2d(const HeadModelAsset& asset, const Observation2D& obs, const FitConfig& cfg = {}) {
  cfg.validate();
  validate_observation(obs);
  if (detail::count_usable(obs.confidence) < 4)
    throw Error(Errc::insufficient_data, "need at least 4 landmarks with positive confidence");

  // camera and in-plane rotation from a similarity between template landmark xy and the observations
  const ParamVector zero = ParamVector::zeros(asset);
  const auto tmpl = embed_landmarks(asset, decode(asset, zero));
  std::vector<Vec3> src, dst;
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    if (obs.confidence[i] <= 0.0) continue;
    src.emplace_back(tmpl[i].x(), tmpl[i].y(), 0.0);
    dst.emplace_back(obs.points[i].x(), obs.points[i].y(), 0.0);
  }
  Similarity3 init;
  try {
    init = umeyama(src, dst, true);
  } catch (const Error& e) {
    if (e.code() == Errc::degenerate_input) throw Error(Errc::insufficient_data, "landmarks are collinear");
    throw;
  }
  ParamVector start = zero;
  start.global_pose = Vec3(0.0, 0.0, std::atan2(init.rotation(1, 0), init.rotation(0, 0)));
  WeakPerspectiveCamera cam{init.scale, init.translation.head<2>()};
  return refine_landmarks2d(asset, obs, cfg, start, cam);
}

/// Fits shape, expression, jaw and the global rigid pose to 3D landmarks (mm).
inline FitResult fit_landmarks3d(const HeadModelAsset& asset, const Observation3D& obs, const FitConfig& cfg = {}) {
  cfg.validate();
  validate_observation(obs);
  if (detail::count_usable(obs.confidence) < 3)
    throw Error(Errc::insufficient_data, "need at least 3 landmarks with positive confidence");
  const int nb = asset.n_shape(), ne = asset.n_expression();

  const ParamVector zero = ParamVector::zeros(asset);
  const auto tmpl = embed_landmarks(asset, decode(asset, zero));
  std::vector<Vec3> src, dst;
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    if (obs.confidence[i] <= 0.0) continue;
    src.push_back(tmpl[i]);
    dst.push_back(obs.points[i]);
  }
  Similarity3 init;
  try {
    init = umeyama(src, dst, false);
  } catch (const Error& e) {
    if (e.code() == Errc::degenerate_input) throw Error(Errc::insufficient_data, "landmarks are collinear");
    throw;
  }

  const auto support = landmark_support(asset);
  auto unpack = [&](const Eigen::VectorXd& x) {
    ParamVector p = detail::unpack_body(x, nb, ne);
    p.global_translation = x.segment<3>(nb + ne + 6);
    return p;
  };
  auto f = [&](const Eigen::VectorXd& x) {
    const ParamVector p = unpack(x);
    const auto decoded = decode_vertices(asset, p, support.vertices);
    const auto lm = landmarks_from_support(asset, support, decoded);
    Eigen::VectorXd r;
    detail::fill_residuals<3>(lm, obs, p, cfg, r);
    return r;
  };

  ParamVector start = zero;
  start.global_pose = rotvec_from_matrix(init.rotation);
  Eigen::VectorXd x0 = detail::pack_body(start, 3);
  x0.tail<3>() = init.translation;
  const LmReport rep = levenberg_marquardt(f, x0, detail::lm_options(cfg));

  FitResult out;
  out.params = unpack(rep.x);
  out.iterations = rep.iterations;
  out.converged = rep.converged;
  out.cost_history = rep.cost_history;
  out.rms = detail::rms_of<3>(f(rep.x), obs.eye_closure_pairs.size(), detail::count_usable(obs.confidence), nb, ne);
  return out;
}

// ---------------------------------------------------------------------------
// JSON formats

struct LandmarkFile {
  std::vector<Vec3> points;  // z = 0 for 2D files
  std::vector<double> confidence;
  std::vector<EyelidPair> eye_closure_pairs = default_eyelid_pairs();
  bool is_3d = false;

  Observation2D as_2d() const {
    Observation2D o;
    for (const auto& p : points) o.points.push_back(p.head<2>());
    o.confidence = confidence;
    o.eye_closure_pairs = eye_closure_pairs;
    return o;
  }
  Observation3D as_3d() const { return {points, confidence, eye_closure_pairs}; }
};

/// Accepts a bare array of [x, y] / [x, y, z] points, or an object with
/// "landmarks", optional "confidence", "eye_closure_pairs" and "image_y_down".
inline LandmarkFile parse_landmarks_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("landmarks: invalid JSON: ") + e.what());
  }
  LandmarkFile out;
  try {
    const nlohmann::json* pts = &j;
    bool y_down = false;
    if (j.is_object()) {
      pts = &j.at("landmarks");
      y_down = j.value("image_y_down", false);
      if (j.contains("confidence")) out.confidence = j.at("confidence").get<std::vector<double>>();
      if (j.contains("eye_closure_pairs")) {
        out.eye_closure_pairs.clear();
        for (const auto& pr : j.at("eye_closure_pairs"))
          out.eye_closure_pairs.push_back({pr.at(0).get<std::uint32_t>(), pr.at(1).get<std::uint32_t>()});
      }
    }
    if (!pts->is_array()) throw Error(Errc::parse_error, "landmarks must be an array");
    std::size_t dim = 0;
    for (const auto& p : *pts) {
      const auto v = p.get<std::vector<double>>();
      if (v.size() != 2 && v.size() != 3) throw Error(Errc::parse_error, "each landmark needs 2 or 3 coordinates");
      if (dim == 0) dim = v.size();
      if (v.size() != dim) throw Error(Errc::parse_error, "landmarks mix 2D and 3D points");
      out.points.emplace_back(v[0], y_down ? -v[1] : v[1], dim == 3 ? v[2] : 0.0);
    }
    out.is_3d = dim == 3;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("landmarks: ") + e.what());
  }
  if (out.points.size() != kNumLandmarks)
    throw Error(Errc::invalid_argument,
                "expected " + std::to_string(kNumLandmarks) + " landmarks, got " + std::to_string(out.points.size()));
  if (out.confidence.empty()) out.confidence.assign(kNumLandmarks, 1.0);
  if (out.confidence.size() != kNumLandmarks)
    throw Error(Errc::invalid_argument, "confidence must have one entry per landmark");
  return out;
}

inline nlohmann::json landmarks_to_json(std::span<const Vec2> points, std::span<const double> confidence) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back({p.x(), p.y()});
  return {{"landmarks", pts}, {"confidence", std::vector<double>(confidence.begin(), confidence.end())}};
}

inline nlohmann::json landmarks_to_json(std::span<const Vec3> points, std::span<const double> confidence) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back({p.x(), p.y(), p.z()});
  return {{"landmarks", pts}, {"confidence", std::vector<double>(confidence.begin(), confidence.end())}};
}

namespace detail {

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }
inline std::vector<double> to_std(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

inline Vec3 vec3_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw Error(Errc::parse_error, "expected a 3-vector");
  return Vec3(v[0], v[1], v[2]);
}

}  // namespace detail

inline nlohmann::json params_to_json(const ParamVector& p, const std::optional<WeakPerspectiveCamera>& cam = {}) {
  nlohmann::json j = {{"beta", detail::to_std(p.beta)},
                      {"psi", detail::to_std(p.psi)},
                      {"jaw_pose", detail::to_std(p.jaw_pose)},
                      {"global_pose", detail::to_std(p.global_pose)},
                      {"global_translation", detail::to_std(p.global_translation)}};
  if (cam) j["camera"] = {{"scale", cam->scale}, {"translation", {cam->translation.x(), cam->translation.y()}}};
  return j;
}

inline ParamVector params_from_json(const nlohmann::json& j) {
  try {
    ParamVector p;
    const auto beta = j.at("beta").get<std::vector<double>>();
    const auto psi = j.at("psi").get<std::vector<double>>();
    p.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    p.psi = Eigen::Map<const Eigen::VectorXd>(psi.data(), static_cast<Eigen::Index>(psi.size()));
    p.jaw_pose = detail::vec3_from(j.at("jaw_pose"));
    p.global_pose = detail::vec3_from(j.at("global_pose"));
    p.global_translation = j.contains("global_translation") ? detail::vec3_from(j.at("global_translation")) : Vec3::Zero();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("params: ") + e.what());
  }
}

inline nlohmann::json fit_result_to_json(const FitResult& r) {
  nlohmann::json j = params_to_json(r.params, r.camera);
  j["fit"] = {{"iterations", r.iterations},
              {"converged", r.converged},
              {"landmark_rms", r.rms.landmark},
              {"eye_rms", r.rms.eye},
              {"regularization_rms", r.rms.regularization},
              {"initial_cost", r.cost_history.empty() ? 0.0 : r.cost_history.front()},
              {"final_cost", r.cost_history.empty() ? 0.0 : r.cost_history.back()}};
  return j;
}

}  // namespace tryon
