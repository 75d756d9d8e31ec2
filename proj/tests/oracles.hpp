#pragma once

// Independent reference implementations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "tryon/geom.hpp"
#include "tryon/mesh.hpp"

namespace tryon::testing {

// Rotation matrix of the unit quaternion exp(theta/2 * axis), written out by hand.
inline Rot3 quaternion_exp_oracle(const Vec3& rotvec) {
  const double theta = std::sqrt(rotvec.x() * rotvec.x() + rotvec.y() * rotvec.y() + rotvec.z() * rotvec.z());
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;
  if (theta > 0.0) {
    const double s = std::sin(theta / 2.0) / theta;
    w = std::cos(theta / 2.0);
    x = s * rotvec.x();
    y = s * rotvec.y();
    z = s * rotvec.z();
  }
  Rot3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

// Horn's closed-form absolute orientation: rotation is the top eigenvector of
// the 4x4 symmetric matrix built from the cross-covariance.
inline Similarity3 horn_oracle(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  Vec3 ms = Vec3::Zero(), md = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    ms += src[i];
    md += dst[i];
  }
  ms /= src.size();
  md /= dst.size();
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  double ss = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    m += (src[i] - ms) * (dst[i] - md).transpose();
    ss += (src[i] - ms).squaredNorm();
  }
  const double sxx = m(0, 0), sxy = m(0, 1), sxz = m(0, 2), syx = m(1, 0), syy = m(1, 1), syz = m(1, 2),
               szx = m(2, 0), szy = m(2, 1), szz = m(2, 2);
  Eigen::Matrix4d n;
  n << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
       syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
       szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
       sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(n);
  const Eigen::Vector4d q = es.eigenvectors().col(3);
  Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
  Similarity3 t;
  t.rotation = quat.normalized().toRotationMatrix();
  double num = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) num += (dst[i] - md).dot(t.rotation * (src[i] - ms));
  t.scale = num / ss;
  t.translation = md - t.scale * t.rotation * ms;
  return t;
}

inline ClosestPoint closest_point_oracle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  auto on_segment = [&](const Vec3& s0, const Vec3& s1) {
    const Vec3 d = s1 - s0;
    const double t = std::clamp((p - s0).dot(d) / d.squaredNorm(), 0.0, 1.0);
    return Vec3(s0 + t * d);
  };
  const Vec3 n = (b - a).cross(c - a);
  const Vec3 foot = p - (p - a).dot(n) / n.squaredNorm() * n;
  // barycentric of the foot from sub-triangle areas
  const double area = n.norm();
  const double wa = (b - foot).cross(c - foot).dot(n) / (area * area);
  const double wb = (c - foot).cross(a - foot).dot(n) / (area * area);
  const double wc = 1.0 - wa - wb;
  ClosestPoint out;
  if (wa >= 0 && wb >= 0 && wc >= 0) {
    out.point = foot;
  } else {
    const Vec3 cands[3] = {on_segment(a, b), on_segment(b, c), on_segment(c, a)};
    out.point = cands[0];
    for (const auto& q : cands)
      if ((q - p).squaredNorm() < (out.point - p).squaredNorm()) out.point = q;
  }
  out.squared_distance = (out.point - p).squaredNorm();
  return out;
}


// Nearest distance from p to any triangle, visiting every triangle.
inline double brute_force_distance(const Vec3& p, const Mesh& mesh) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles)
    best = std::min(best, closest_point_oracle(p, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]])
                              .squared_distance);
  return std::sqrt(best);
}

}  // namespace tryon::testing
