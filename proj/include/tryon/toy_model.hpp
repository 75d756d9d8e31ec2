#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "tryon/eyewear_fit.hpp"
#include "tryon/head_model.hpp"
#include "tryon/mesh.hpp"

// Synthetic head and eyewear assets. The head is an ellipsoid with two flat
// eye discs, a 68-point landmark layout projected onto the front, smooth
// random shape bases and hand-shaped expression bases. Everything here is
// deterministic for a given seed on every platform.

namespace tryon::toy {

// splitmix64; std distributions are implementation defined, this is not
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec3 unit_vector() {
    Vec3 v(normal(), normal(), normal());
    while (v.norm() < 1e-6) v = Vec3(normal(), normal(), normal());
    return v.normalized();
  }

 private:
  std::uint64_t state_;
};

struct HeadShape {
  Vec3 center{0.0, -15.0, -70.0};
  Vec3 radii{75.0, 125.0, 90.0};
  int rings = 20;
  int segments = 24;
  double eye_half_spacing = 31.0;
  double eye_radius = 11.0;
};

// Canonical 68-point layout in face coordinates (mm, eyes at y = 0, x = +-31).
// Index order follows the common 68-point annotation: jaw 0-16, brows 17-26,
// nose 27-35, eyes 36-47 (36-41 on the -x eye), mouth 48-67.
inline std::array<Vec2, kNumLandmarks> canonical_landmarks_2d() {
  std::array<Vec2, kNumLandmarks> p;
  for (int k = 0; k <= 16; ++k) {
    const double a = std::numbers::pi * k / 16.0;
    p[k] = Vec2(-66.0 * std::cos(a), -90.0 * std::sin(a));
  }
  const double brow_x[5] = {-52, -43, -34, -25, -16};
  const double brow_y[5] = {16, 21, 23, 22, 19};
  for (int k = 0; k < 5; ++k) {
    p[17 + k] = Vec2(brow_x[k], brow_y[k]);
    p[26 - k] = Vec2(-brow_x[k], brow_y[k]);
  }
  p[27] = Vec2(0, 12);
  p[28] = Vec2(0, 3);
  p[29] = Vec2(0, -6);
  p[30] = Vec2(0, -15);
  p[31] = Vec2(-12, -24);
  p[32] = Vec2(-6, -26);
  p[33] = Vec2(0, -27);
  p[34] = Vec2(6, -26);
  p[35] = Vec2(12, -24);
  const Vec2 eye_left[6] = {{-41, 0}, {-35, 4}, {-27, 4}, {-21, 0}, {-27, -4}, {-35, -4}};
  const Vec2 eye_right[6] = {{21, 0}, {27, 4}, {35, 4}, {41, 0}, {35, -4}, {27, -4}};
  for (int k = 0; k < 6; ++k) {
    p[36 + k] = eye_left[k];
    p[42 + k] = eye_right[k];
  }
  const Vec2 mouth[20] = {{-25, -55}, {-15, -50}, {-6, -48}, {0, -49},   {6, -48},  {15, -50}, {25, -55},
                          {15, -61},  {6, -63},   {0, -64},  {-6, -63},  {-15, -61}, {-20, -55}, {-7, -53},
                          {0, -53.5}, {7, -53},   {20, -55}, {7, -57},   {0, -57.5}, {-7, -57}};
  for (int k = 0; k < 20; ++k) p[48 + k] = mouth[k];
  return p;
}

namespace detail {

inline double gaussian(const Vec3& v, const Vec3& c, double sigma) {
  return std::exp(-(v - c).squaredNorm() / (2.0 * sigma * sigma));
}

inline double ellipsoid_front_z(const HeadShape& h, double x, double y) {
  const double rx = (x - h.center.x()) / h.radii.x();
  const double ry = (y - h.center.y()) / h.radii.y();
  const double s = 1.0 - rx * rx - ry * ry;
  return h.center.z() + h.radii.z() * std::sqrt(std::max(s, 0.0));
}

inline LandmarkBinding bind_to_surface(const HeadModelAsset& a, const Vec3& p, std::uint32_t tri_begin,
                                       std::uint32_t tri_end) {
  LandmarkBinding best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::uint32_t t = tri_begin; t < tri_end; ++t) {
    const auto& tri = a.triangles[t];
    const auto cp = closest_point_on_triangle(p, a.template_vertices[tri[0]], a.template_vertices[tri[1]],
                                              a.template_vertices[tri[2]]);
    if (cp.squared_distance < best_d) {
      best_d = cp.squared_distance;
      best.triangle = t;
      Vec3 w = cp.barycentric.cwiseMax(0.0);
      best.barycentric = w / w.sum();
    }
  }
  return best;
}

}  // namespace detail

/// Synthetic head asset with the given basis sizes.
inline HeadModelAsset make_head(int n_shape = 10, int n_expression = 5, std::uint64_t seed = 20240601,
                                const HeadShape& h = {}) {
  HeadModelAsset a;
  const double pi = std::numbers::pi;

  // ellipsoid: top pole, rings, bottom pole; segment 0 faces +z
  auto ellipsoid_point = [&](double phi, double theta) {
    return Vec3(h.center.x() + h.radii.x() * std::sin(phi) * std::sin(theta),
                h.center.y() + h.radii.y() * std::cos(phi),
                h.center.z() + h.radii.z() * std::sin(phi) * std::cos(theta));
  };
  a.template_vertices.push_back(ellipsoid_point(0.0, 0.0));
  a.uv.emplace_back(0.5, 0.0);
  for (int i = 1; i <= h.rings; ++i) {
    const double phi = pi * i / (h.rings + 1);
    for (int j = 0; j < h.segments; ++j) {
      const double theta = 2.0 * pi * j / h.segments;
      a.template_vertices.push_back(ellipsoid_point(phi, theta));
      a.uv.emplace_back(static_cast<double>(j) / h.segments, static_cast<double>(i) / (h.rings + 1));
    }
  }
  const auto bottom = static_cast<std::uint32_t>(a.template_vertices.size());
  a.template_vertices.push_back(ellipsoid_point(pi, 0.0));
  a.uv.emplace_back(0.5, 1.0);

  auto ring_vertex = [&](int i, int j) {
    return static_cast<std::uint32_t>(1 + (i - 1) * h.segments + ((j % h.segments) + h.segments) % h.segments);
  };
  auto add_outward = [&](std::uint32_t p, std::uint32_t q, std::uint32_t r) {
    const Vec3& vp = a.template_vertices[p];
    const Vec3 n = (a.template_vertices[q] - vp).cross(a.template_vertices[r] - vp);
    const Vec3 centroid = (vp + a.template_vertices[q] + a.template_vertices[r]) / 3.0;
    if (n.dot(centroid - h.center) >= 0.0)
      a.triangles.push_back({p, q, r});
    else
      a.triangles.push_back({p, r, q});
  };
  for (int j = 0; j < h.segments; ++j) add_outward(0, ring_vertex(1, j), ring_vertex(1, j + 1));
  for (int i = 1; i < h.rings; ++i)
    for (int j = 0; j < h.segments; ++j) {
      add_outward(ring_vertex(i, j), ring_vertex(i + 1, j), ring_vertex(i + 1, j + 1));
      add_outward(ring_vertex(i, j), ring_vertex(i + 1, j + 1), ring_vertex(i, j + 1));
    }
  for (int j = 0; j < h.segments; ++j) add_outward(bottom, ring_vertex(h.rings, j + 1), ring_vertex(h.rings, j));
  const auto head_vertex_count = static_cast<std::uint32_t>(a.template_vertices.size());
  const auto head_tri_count = static_cast<std::uint32_t>(a.triangles.size());

  // nose bridge: the three front-column vertices around eye level and above
  std::vector<std::uint32_t> nose;
  for (std::uint32_t v = 1; v < bottom; ++v) {
    const Vec3& p = a.template_vertices[v];
    if (std::abs(p.x()) < 1e-9 && p.z() > h.center.z() && p.y() > -10.0 && p.y() < 35.0) nose.push_back(v);
  }
  Vec3 nose_centroid = Vec3::Zero();
  for (auto v : nose) nose_centroid += a.template_vertices[v];
  nose_centroid /= static_cast<double>(nose.size());

  // temples: side columns at the rings around eye level
  std::vector<std::uint32_t> left_temple, right_temple;
  for (std::uint32_t v = 1; v < bottom; ++v) {
    const Vec3& p = a.template_vertices[v];
    if (std::abs(p.z() - h.center.z()) < 1e-6 && p.y() > -25.0 && p.y() < 35.0)
      (p.x() < 0 ? left_temple : right_temple).push_back(v);
  }

  // eye discs in the plane of the nose-bridge centroid depth, facing +z
  const double eye_z = nose_centroid.z();
  std::vector<std::uint32_t> eye_groups[2];
  std::uint32_t eye_tri_begin[2]{}, eye_tri_end[2]{};
  for (int side = 0; side < 2; ++side) {
    const double cx = (side == 0 ? -1.0 : 1.0) * h.eye_half_spacing;
    const auto center = static_cast<std::uint32_t>(a.template_vertices.size());
    a.template_vertices.emplace_back(cx, 0.0, eye_z);
    a.uv.emplace_back(side == 0 ? 0.05 : 0.95, 0.05);
    eye_groups[side].push_back(center);
    for (int k = 0; k < 8; ++k) {
      const double ang = 2.0 * pi * k / 8.0;
      a.template_vertices.emplace_back(cx + h.eye_radius * std::cos(ang), h.eye_radius * std::sin(ang), eye_z);
      a.uv.emplace_back((side == 0 ? 0.05 : 0.95) + 0.04 * std::cos(ang), 0.05 + 0.04 * std::sin(ang));
      eye_groups[side].push_back(center + 1 + k);
    }
    eye_tri_begin[side] = static_cast<std::uint32_t>(a.triangles.size());
    for (std::uint32_t k = 0; k < 8; ++k) a.triangles.push_back({center, center + 1 + k, center + 1 + (k + 1) % 8});
    eye_tri_end[side] = static_cast<std::uint32_t>(a.triangles.size());
  }
  for (auto& uv : a.uv) uv = uv.cwiseMax(0.0).cwiseMin(1.0);
  const std::size_t n = a.template_vertices.size();

  a.vertex_groups["left_eye"] = eye_groups[0];
  a.vertex_groups["right_eye"] = eye_groups[1];
  a.vertex_groups["nose_bridge"] = nose;
  a.vertex_groups["left_temple"] = left_temple;
  a.vertex_groups["right_temple"] = right_temple;

  // landmarks
  const auto layout = canonical_landmarks_2d();
  std::array<Vec3, kNumLandmarks> lm3d;
  for (std::size_t k = 0; k < kNumLandmarks; ++k) {
    const Vec2& q = layout[k];
    if (k >= 36 && k <= 47) {
      const int side = k < 42 ? 0 : 1;
      lm3d[k] = Vec3(q.x(), q.y(), eye_z);
      a.landmarks.push_back(detail::bind_to_surface(a, lm3d[k], eye_tri_begin[side], eye_tri_end[side]));
    } else {
      lm3d[k] = Vec3(q.x(), q.y(), detail::ellipsoid_front_z(h, q.x(), q.y()));
      a.landmarks.push_back(detail::bind_to_surface(a, lm3d[k], 0, head_tri_count));
    }
  }

  // jaw: lower front of the head hinges about a joint behind the mouth
  a.jaw_joint = Vec3(0.0, -35.0, -55.0);
  a.jaw_weights.assign(n, 0.0);
  for (std::uint32_t v = 0; v < head_vertex_count; ++v) {
    const Vec3& p = a.template_vertices[v];
    if (p.z() > -60.0) a.jaw_weights[v] = std::clamp((-38.0 - p.y()) / 25.0, 0.0, 1.0);
  }

  // shape bases: sums of Gaussian bumps centered on random landmarks
  Rng rng(seed);
  a.shape_basis = RowMajorMatrix::Zero(static_cast<Eigen::Index>(3 * n), n_shape);
  for (int k = 0; k < n_shape; ++k) {
    for (int bump = 0; bump < 3; ++bump) {
      const Vec3 c = lm3d[rng.next() % kNumLandmarks];
      const Vec3 dir = 5.0 * rng.unit_vector();
      for (std::size_t v = 0; v < n; ++v) {
        const double g = detail::gaussian(a.template_vertices[v], c, 30.0);
        for (int d = 0; d < 3; ++d) a.shape_basis(static_cast<Eigen::Index>(3 * v + d), k) += g * dir[d];
      }
    }
  }

  // expression bases: brow raise, smile, eye closure, pucker, cheek puff;
  // beyond five, random localized bumps
  a.expression_basis = RowMajorMatrix::Zero(static_cast<Eigen::Index>(3 * n), n_expression);
  auto add = [&](int k, std::size_t v, const Vec3& d) {
    if (k >= n_expression) return;
    for (int c = 0; c < 3; ++c) a.expression_basis(static_cast<Eigen::Index>(3 * v + c), k) += d[c];
  };
  for (std::size_t v = 0; v < n; ++v) {
    const Vec3& p = a.template_vertices[v];
    const bool on_eye = v >= head_vertex_count;
    for (double sx : {-1.0, 1.0}) {
      add(0, v, Vec3(0, 4, 0) * detail::gaussian(p, Vec3(34 * sx, 23, lm3d[19].z()), 15.0));
      add(1, v, Vec3(2.8 * sx, 2.8, 0) * detail::gaussian(p, Vec3(25 * sx, -55, lm3d[48].z()), 12.0));
      add(4, v, Vec3(3.6 * sx, 0, 1.8) * detail::gaussian(p, Vec3(40 * sx, -35, lm3d[2].z()), 20.0));
    }
    // closing moves every eye-disc vertex onto the disc's horizontal midline
    if (on_eye) add(2, v, Vec3(0, -p.y(), 0));
    const double gm = detail::gaussian(p, Vec3(0, -56, lm3d[57].z()), 15.0);
    add(3, v, Vec3(-0.3 * p.x() * gm, 0, 3.0 * gm));
  }
  for (int k = 5; k < n_expression; ++k) {
    const Vec3 c = lm3d[rng.next() % kNumLandmarks];
    const Vec3 dir = 3.0 * rng.unit_vector();
    for (std::size_t v = 0; v < n; ++v) add(k, v, dir * detail::gaussian(a.template_vertices[v], c, 15.0));
  }

  validate_asset(a);
  return a;
}

// ---------------------------------------------------------------------------
// Eyewear

/// Appends a tube of the given radius along a polyline.
inline void append_tube(Mesh& mesh, const std::vector<Vec3>& path, bool closed, double radius, int sides = 6) {
  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  const std::size_t m = path.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3 prev = (i == 0) ? (closed ? path[m - 1] : path[0]) : path[i - 1];
    const Vec3 next = (i + 1 == m) ? (closed ? path[0] : path[m - 1]) : path[i + 1];
    const Vec3 tangent = (next - prev).normalized();
    const Vec3 ref = std::abs(tangent.y()) < 0.9 ? Vec3::UnitY() : Vec3::UnitX();
    const Vec3 u = tangent.cross(ref).normalized();
    const Vec3 w = tangent.cross(u);
    for (int s = 0; s < sides; ++s) {
      const double a = 2.0 * std::numbers::pi * s / sides;
      mesh.vertices.push_back(path[i] + radius * (std::cos(a) * u + std::sin(a) * w));
    }
  }
  const std::size_t segs = closed ? m : m - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    const auto r0 = base + static_cast<std::uint32_t>(i * sides);
    const auto r1 = base + static_cast<std::uint32_t>(((i + 1) % m) * sides);
    for (int s = 0; s < sides; ++s) {
      const auto s1 = static_cast<std::uint32_t>((s + 1) % sides);
      mesh.triangles.push_back({r0 + static_cast<std::uint32_t>(s), r1 + static_cast<std::uint32_t>(s), r1 + s1});
      mesh.triangles.push_back({r0 + static_cast<std::uint32_t>(s), r1 + s1, r0 + s1});
    }
  }
}

struct EyewearStyle {
  std::string id = "toy-classic";
  std::string display_name = "Toy Classic";
  double lens_half_span = 31.0;  // lens-center x
  double rim_half_width = 24.0;
  double rim_half_height = 18.0;
  double hinge_x = 56.0;
};

inline std::vector<EyewearStyle> default_eyewear_styles() {
  return {{"toy-classic", "Toy Classic", 31.0, 24.0, 18.0, 56.0},
          {"toy-round", "Toy Round", 31.0, 20.0, 20.0, 53.0},
          {"toy-wide", "Toy Wide", 33.0, 25.0, 16.0, 60.0}};
}

/// Frame mesh in eyewear-local coordinates: +x right, +y up, +z toward the viewer.
inline std::pair<Mesh, EyewearAnchors> make_eyewear(const EyewearStyle& s = {}) {
  Mesh mesh;
  EyewearAnchors anchors;
  const double pi = std::numbers::pi;
  for (double side : {-1.0, 1.0}) {
    std::vector<Vec3> rim;
    for (int k = 0; k < 24; ++k) {
      const double a = 2.0 * pi * k / 24;
      rim.emplace_back(side * s.lens_half_span + s.rim_half_width * std::cos(a), s.rim_half_height * std::sin(a), 0.0);
    }
    append_tube(mesh, rim, true, 1.5);
    const double hx = side * s.hinge_x;
    append_tube(mesh,
                {Vec3(side * (s.lens_half_span + s.rim_half_width), 6.0, 0.0), Vec3(hx, 6.0, 0.0),
                 Vec3(side * 78.0, 6.0, -25.0), Vec3(side * 84.0, 6.0, -70.0), Vec3(side * 84.0, 4.0, -120.0)},
                false, 1.2);
  }
  const double inner = s.lens_half_span - s.rim_half_width;
  append_tube(mesh, {Vec3(-inner, 4.0, 0.0), Vec3(0.0, 6.0, 0.0), Vec3(inner, 4.0, 0.0)}, false, 1.2);

  anchors.bridge = Vec3::Zero();
  anchors.hinge_left = Vec3(-s.hinge_x, 6.0, 0.0);
  anchors.hinge_right = Vec3(s.hinge_x, 6.0, 0.0);
  anchors.lens_center_left = Vec3(-s.lens_half_span, 0.0, 0.0);
  anchors.lens_center_right = Vec3(s.lens_half_span, 0.0, 0.0);
  return {mesh, anchors};
}

// ---------------------------------------------------------------------------
// Sphere

/// Latitude/longitude sphere. Ring vertices duplicate the seam column and
/// each pole has one vertex per longitude cell, so uv is single-valued.
/// Normals are the exact radial ones.
inline Mesh make_uv_sphere(double radius = 1.0, int n_lat = 24, int n_lon = 48) {
  if (n_lat < 2 || n_lon < 3 || !(radius > 0.0)) throw Error(Errc::invalid_argument, "make_uv_sphere: bad resolution");
  Mesh mesh;
  const double pi = std::numbers::pi;
  auto push = [&](double theta, double phi, const Vec2& uv) {
    const Vec3 n(std::sin(theta) * std::cos(phi), std::cos(theta), std::sin(theta) * std::sin(phi));
    mesh.vertices.push_back(radius * n);
    mesh.normals.push_back(n);
    mesh.uv.push_back(uv);
  };
  for (int j = 0; j < n_lon; ++j) push(0.0, 0.0, Vec2((j + 0.5) / n_lon, 0.0));
  const auto ring0 = static_cast<std::uint32_t>(n_lon);
  const auto cols = static_cast<std::uint32_t>(n_lon + 1);
  for (int i = 1; i < n_lat; ++i)
    for (int j = 0; j <= n_lon; ++j)
      push(pi * i / n_lat, 2.0 * pi * j / n_lon, Vec2(static_cast<double>(j) / n_lon, static_cast<double>(i) / n_lat));
  const auto south = static_cast<std::uint32_t>(mesh.vertices.size());
  for (int j = 0; j < n_lon; ++j) push(pi, 0.0, Vec2((j + 0.5) / n_lon, 1.0));

  auto at = [&](int i, int j) { return ring0 + static_cast<std::uint32_t>(i - 1) * cols + static_cast<std::uint32_t>(j); };
  for (int j = 0; j < n_lon; ++j) {
    const auto pj = static_cast<std::uint32_t>(j);
    mesh.triangles.push_back({pj, at(1, j + 1), at(1, j)});
    for (int i = 1; i + 1 < n_lat; ++i) {
      mesh.triangles.push_back({at(i, j), at(i, j + 1), at(i + 1, j)});
      mesh.triangles.push_back({at(i, j + 1), at(i + 1, j + 1), at(i + 1, j)});
    }
    mesh.triangles.push_back({at(n_lat - 1, j), at(n_lat - 1, j + 1), south + pj});
  }
  return mesh;
}

}  // namespace tryon::toy
