#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "tryon/error.hpp"

namespace tryon {

// World-space geometry is in millimeters throughout.
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Rot3 = Eigen::Matrix3d;

struct Similarity3 {
  double scale = 1.0;
  Rot3 rotation = Rot3::Identity();
  Vec3 translation = Vec3::Zero();

  static Similarity3 identity() { return {}; }

  Vec3 operator()(const Vec3& p) const { return scale * (rotation * p) + translation; }

  // (*this) ∘ inner: apply inner first.
  Similarity3 compose(const Similarity3& inner) const {
    return {scale * inner.scale, rotation * inner.rotation,
            scale * (rotation * inner.translation) + translation};
  }

  Similarity3 inverse() const {
    const Rot3 rt = rotation.transpose();
    return {1.0 / scale, rt, -(rt * translation) / scale};
  }
};

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

/// Rotation matrix for an axis-angle vector (angle = |rotvec| in radians).
inline Rot3 rodrigues(const Vec3& rotvec) {
  if (!rotvec.allFinite()) throw Error(Errc::invalid_argument, "rodrigues: non-finite rotation vector");
  const double theta2 = rotvec.squaredNorm();
  const double theta = std::sqrt(theta2);
  Rot3 k;
  k << 0.0, -rotvec.z(), rotvec.y(),
       rotvec.z(), 0.0, -rotvec.x(),
       -rotvec.y(), rotvec.x(), 0.0;
  // sin(t)/t and (1-cos(t))/t^2, with series near zero to avoid cancellation
  double a, b;
  if (theta < 1e-4) {
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Rot3::Identity() + a * k + b * (k * k);
}

/// Inverse of rodrigues: axis-angle vector with angle in [0, pi].
inline Vec3 rotvec_from_matrix(const Rot3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

/// Least-squares similarity (or rigid, when with_scale is false) mapping src onto dst.
inline Similarity3 umeyama(std::span<const Vec3> src, std::span<const Vec3> dst, bool with_scale) {
  if (src.size() != dst.size()) throw Error(Errc::invalid_argument, "umeyama: point lists differ in length");
  if (src.size() < 3) throw Error(Errc::degenerate_input, "umeyama: need at least 3 correspondences");
  const double n = static_cast<double>(src.size());

  Vec3 mu_src = Vec3::Zero(), mu_dst = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!src[i].allFinite() || !dst[i].allFinite())
      throw Error(Errc::invalid_argument, "umeyama: non-finite point");
    mu_src += src[i];
    mu_dst += dst[i];
  }
  mu_src /= n;
  mu_dst /= n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double var_src = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Vec3 a = src[i] - mu_src;
    const Vec3 b = dst[i] - mu_dst;
    cov += b * a.transpose();
    var_src += a.squaredNorm();
  }
  cov /= n;
  var_src /= n;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  // rank < 2 means collinear (or coincident) configurations
  if (!(sv(1) >= 1e-12 * sv(0)) || sv(0) <= 0.0)
    throw Error(Errc::degenerate_input, "umeyama: collinear or coincident correspondences");

  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(2, 2) = -1.0;

  Similarity3 out;
  out.rotation = svd.matrixU() * s * svd.matrixV().transpose();
  out.scale = with_scale ? (sv.asDiagonal() * s).trace() / var_src : 1.0;
  out.translation = mu_dst - out.scale * (out.rotation * mu_src);
  return out;
}

inline std::vector<Vec3> apply_transform(std::span<const Vec3> points, const Similarity3& t) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(t(p));
  return out;
}

struct ClosestPoint {
  Vec3 point;
  Vec3 barycentric;  // weights of (a, b, c)
  double squared_distance;
};

/// Closest point on triangle (a, b, c) to p, by Voronoi region classification.
inline ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  auto make = [&](double u, double v, double w) {
    const Vec3 q = u * a + v * b + w * c;
    return ClosestPoint{q, Vec3(u, v, w), (p - q).squaredNorm()};
  };
  if (d1 <= 0.0 && d2 <= 0.0) return make(1, 0, 0);

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return make(0, 1, 0);

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = (d1 - d3) != 0.0 ? d1 / (d1 - d3) : 0.0;
    return make(1 - v, v, 0);
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return make(0, 0, 1);

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = (d2 - d6) != 0.0 ? d2 / (d2 - d6) : 0.0;
    return make(1 - w, 0, w);
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double denom = (d4 - d3) + (d5 - d6);
    const double w = denom != 0.0 ? (d4 - d3) / denom : 0.0;
    return make(0, 1 - w, w);
  }

  const double sum = va + vb + vc;
  if (sum == 0.0) {
    // zero-area triangle: nearest of the three edges
    auto on_edge = [&](const Vec3& e0, const Vec3& e1) {
      const Vec3 d = e1 - e0;
      const double len2 = d.squaredNorm();
      const double t = len2 > 0.0 ? std::clamp((p - e0).dot(d) / len2, 0.0, 1.0) : 0.0;
      return t;
    };
    const double tab = on_edge(a, b), tbc = on_edge(b, c), tca = on_edge(c, a);
    ClosestPoint best = make(1 - tab, tab, 0);
    for (const ClosestPoint& cand : {make(0, 1 - tbc, tbc), make(tca, 0, 1 - tca)})
      if (cand.squared_distance < best.squared_distance) best = cand;
    return best;
  }
  const double v = vb / sum, w = vc / sum;
  return make(1 - v - w, v, w);
}

}  // namespace tryon
