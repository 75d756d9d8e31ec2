#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "tryon/geom.hpp"
#include "tryon/mesh.hpp"

namespace tryon {

struct SurfaceHit {
  std::uint32_t triangle = 0;
  Vec3 point = Vec3::Zero();
  Vec3 barycentric = Vec3::Zero();
  double distance = std::numeric_limits<double>::infinity();
};

// Nearest-triangle search over every triangle of a mesh. Triangles whose
// bounding sphere lies strictly farther than the current best are skipped;
// the skip never drops a triangle that could tie or beat the best, so the
// answer is the same as visiting every triangle in index order.
class NearestTriangleSearch {
 public:
  explicit NearestTriangleSearch(const Mesh& mesh) : mesh_(&mesh) {
    validate_mesh(mesh);
    if (mesh.triangles.empty()) throw Error(Errc::invalid_argument, "nearest-triangle search on empty mesh");
    centers_.reserve(mesh.triangles.size());
    radii_.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
      const Vec3& a = mesh.vertices[t[0]];
      const Vec3& b = mesh.vertices[t[1]];
      const Vec3& c = mesh.vertices[t[2]];
      const Vec3 center = (a + b + c) / 3.0;
      const double r = std::sqrt(std::max({(a - center).squaredNorm(), (b - center).squaredNorm(),
                                           (c - center).squaredNorm()}));
      centers_.push_back(center);
      // inflate so rounding in the bound can never exclude a true candidate
      radii_.push_back(r * (1.0 + 1e-9) + 1e-9);
    }
  }

  SurfaceHit nearest(const Vec3& p) const {
    SurfaceHit best;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers_.size(); ++i) {
      const double lower = (p - centers_[i]).norm() - radii_[i];
      if (lower > 0.0 && lower * lower > best_sq) continue;
      const auto& t = mesh_->triangles[i];
      const auto cp = closest_point_on_triangle(p, mesh_->vertices[t[0]], mesh_->vertices[t[1]],
                                                mesh_->vertices[t[2]]);
      if (cp.squared_distance < best_sq) {
        best_sq = cp.squared_distance;
        best.triangle = static_cast<std::uint32_t>(i);
        best.point = cp.point;
        best.barycentric = cp.barycentric;
      }
    }
    best.distance = std::sqrt(best_sq);
    return best;
  }

 private:
  const Mesh* mesh_;
  std::vector<Vec3> centers_;
  std::vector<double> radii_;
};

}  // namespace tryon
