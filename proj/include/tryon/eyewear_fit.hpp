#pragma once

#include <optional>
#include <string>

#include "tryon/error.hpp"
#include "tryon/geom.hpp"
#include "tryon/head_model.hpp"
#include "tryon/mesh.hpp"
#include "tryon/surface_query.hpp"

namespace tryon {

// Anchor points in eyewear-local millimeters. The local frame is +x right,
// +y up, +z toward the viewer (out of the wearer's face).
struct EyewearAnchors {
  Vec3 bridge = Vec3::Zero();
  Vec3 hinge_left = Vec3::Zero();
  Vec3 hinge_right = Vec3::Zero();
  Vec3 lens_center_left = Vec3::Zero();
  Vec3 lens_center_right = Vec3::Zero();

  double hinge_span() const { return (hinge_right - hinge_left).norm(); }
  double lens_center_span() const { return (lens_center_right - lens_center_left).norm(); }
};

struct EyewearAsset {
  std::string id;
  std::string display_name;
  Mesh mesh;
  EyewearAnchors anchors;
};

inline void validate_anchors(const EyewearAnchors& a) {
  for (const Vec3* p : {&a.bridge, &a.hinge_left, &a.hinge_right, &a.lens_center_left, &a.lens_center_right})
    if (!p->allFinite()) throw Error(Errc::invalid_asset, "non-finite eyewear anchor");
  if (!(a.hinge_span() > 0.0)) throw Error(Errc::invalid_asset, "hinge span must be positive");
  if (!(a.lens_center_span() > 0.0)) throw Error(Errc::invalid_asset, "lens-center span must be positive");
}

// Right-handed orthonormal frame at the midpoint between the eye centers.
// forward = right x up points out of the face.
struct AnchorFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 right = Vec3::UnitX();
  Vec3 up = Vec3::UnitY();
  Vec3 forward = Vec3::UnitZ();
  double eye_distance = 0.0;  // interpupillary distance, mm

  Rot3 basis() const {
    Rot3 r;
    r.col(0) = right;
    r.col(1) = up;
    r.col(2) = forward;
    return r;
  }
};

struct FitParams {
  double forward_offset_mm = 10.0;
  double vertical_offset_mm = 0.0;
  std::optional<double> scale_override;

  void validate() const {
    if (!std::isfinite(forward_offset_mm) || !std::isfinite(vertical_offset_mm))
      throw Error(Errc::invalid_argument, "fit offsets must be finite");
    if (scale_override && !(*scale_override > 0.0 && std::isfinite(*scale_override)))
      throw Error(Errc::invalid_argument, "scale_override must be a positive number");
  }
};

/// Frame from the eye-group centroids and the nose-bridge group. The
/// nose-bridge centroid, with its component along the eye axis removed,
/// gives the up direction.
inline AnchorFrame head_anchor_frame(const HeadModelAsset& asset, const Mesh& mesh) {
  const auto [left, right] = eye_centers(asset, mesh);
  const Vec3 axis = right - left;
  const double ipd = axis.norm();
  if (!(ipd > 1e-9)) throw Error(Errc::degenerate_input, "eye centers coincide");

  AnchorFrame f;
  f.origin = 0.5 * (left + right);
  f.right = axis / ipd;
  f.eye_distance = ipd;

  const Vec3 bridge = group_centroid(asset, mesh, "nose_bridge") - f.origin;
  const Vec3 up_hint = bridge - bridge.dot(f.right) * f.right;
  const double len = up_hint.norm();
  if (!(len > 1e-9 * std::max(1.0, bridge.norm())))
    throw Error(Errc::degenerate_input, "nose bridge lies on the eye axis");

  f.forward = f.right.cross(up_hint / len).normalized();
  f.up = f.forward.cross(f.right).normalized();
  return f;
}

/// Maps eyewear-local coordinates onto the head so the bridge anchor sits
/// forward_offset_mm in front of (and vertical_offset_mm above) the eye midpoint.
inline Similarity3 compute_placement(const AnchorFrame& frame, const EyewearAsset& eyewear, const FitParams& fp) {
  fp.validate();
  const double span = eyewear.anchors.lens_center_span();
  if (!(span > 0.0)) throw Error(Errc::invalid_asset, "eyewear '" + eyewear.id + "' has zero lens-center span");

  Similarity3 t;
  t.scale = fp.scale_override ? *fp.scale_override : frame.eye_distance / span;
  t.rotation = frame.basis();
  const Vec3 target = frame.origin + fp.forward_offset_mm * frame.forward + fp.vertical_offset_mm * frame.up;
  t.translation = target - t.scale * (t.rotation * eyewear.anchors.bridge);
  return t;
}

struct ClearanceOptions {
  double min_clearance_mm = 0.5;
  double step_mm = 0.5;
  int max_steps = 40;
};

struct ClearanceReport {
  double min_distance = 0.0;  // over all eyewear vertices
  bool any_inside = false;
  bool ok(double min_clearance) const { return !any_inside && min_distance >= min_clearance; }
};

/// Distance and inside/outside state of every transformed eyewear vertex
/// against the head surface. Inside means the offset from the nearest
/// surface point opposes the interpolated surface normal there.
inline ClearanceReport measure_clearance(const Mesh& head, const std::vector<Vec3>& head_normals,
                                         const NearestTriangleSearch& search, const Mesh& eyewear,
                                         const Similarity3& t) {
  ClearanceReport r;
  r.min_distance = std::numeric_limits<double>::infinity();
  for (const auto& v : eyewear.vertices) {
    const Vec3 p = t(v);
    const SurfaceHit hit = search.nearest(p);
    r.min_distance = std::min(r.min_distance, hit.distance);
    const auto& tri = head.triangles[hit.triangle];
    const Vec3 n = hit.barycentric[0] * head_normals[tri[0]] + hit.barycentric[1] * head_normals[tri[1]] +
                   hit.barycentric[2] * head_normals[tri[2]];
    if (n.dot(p - hit.point) < 0.0) r.any_inside = true;
  }
  return r;
}

/// Pushes the placement along its forward axis in step_mm increments until
/// every eyewear vertex is outside the head and at least min_clearance_mm away.
inline Similarity3 resolve_clearance(const Mesh& head, const Mesh& eyewear, const Similarity3& t,
                                     const ClearanceOptions& opt = {}) {
  if (!(opt.step_mm > 0.0) || opt.max_steps < 0 || !(opt.min_clearance_mm >= 0.0))
    throw Error(Errc::invalid_argument, "invalid clearance options");
  if (!(t.scale > 0.0)) throw Error(Errc::invalid_argument, "placement scale must be positive");
  validate_mesh(eyewear, "eyewear mesh");
  if (eyewear.vertices.empty()) throw Error(Errc::invalid_argument, "eyewear mesh has no vertices");

  const std::vector<Vec3> normals = head.has_normals() ? head.normals : vertex_normals(head);
  const NearestTriangleSearch search(head);
  // eyewear local +z maps to the frame's forward axis
  const Vec3 forward = t.rotation.col(2);
  for (int k = 0; k <= opt.max_steps; ++k) {
    Similarity3 candidate = t;
    if (k > 0) candidate.translation += (k * opt.step_mm) * forward;
    if (measure_clearance(head, normals, search, eyewear, candidate).ok(opt.min_clearance_mm)) return candidate;
  }
  throw Error(Errc::cannot_fit, "no clear placement within " + std::to_string(opt.max_steps) + " steps of " +
                                    std::to_string(opt.step_mm) + " mm");
}

}  // namespace tryon
