#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tryon/error.hpp"
#include "tryon/geom.hpp"

namespace tryon {

using Triangle = std::array<std::uint32_t, 3>;

// Indexed triangle mesh. uv and normals are either empty or one per vertex.
// UVs follow the glTF convention (origin top-left, v grows downward).
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Vec2> uv;
  std::vector<Vec3> normals;

  bool has_uv() const { return !uv.empty(); }
  bool has_normals() const { return !normals.empty(); }
};

inline void validate_mesh(const Mesh& mesh, const std::string& what = "mesh") {
  const std::size_t n = mesh.vertices.size();
  for (const auto& tri : mesh.triangles)
    for (auto idx : tri)
      if (idx >= n) throw Error(Errc::invalid_argument, what + ": triangle index out of range");
  if (!mesh.uv.empty() && mesh.uv.size() != n)
    throw Error(Errc::invalid_argument, what + ": uv count does not match vertex count");
  if (!mesh.normals.empty() && mesh.normals.size() != n)
    throw Error(Errc::invalid_argument, what + ": normal count does not match vertex count");
}

inline Mesh transformed(const Mesh& mesh, const Similarity3& t) {
  Mesh out = mesh;
  for (auto& v : out.vertices) v = t(v);
  for (auto& nrm : out.normals) nrm = t.rotation * nrm;
  return out;
}

/// Area-weighted vertex normals, unit length.
inline std::vector<Vec3> vertex_normals(const Mesh& mesh) {
  validate_mesh(mesh);
  if (mesh.triangles.empty()) throw Error(Errc::degenerate_input, "vertex_normals: mesh has no triangles");
  std::vector<Vec3> acc(mesh.vertices.size(), Vec3::Zero());
  for (const auto& tri : mesh.triangles) {
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    // |cross| is twice the area, so the sum is area weighted
    const Vec3 n = (b - a).cross(c - a);
    for (auto idx : tri) acc[idx] += n;
  }
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const double len = acc[i].norm();
    if (!(len > 0.0) || !std::isfinite(len))
      throw Error(Errc::degenerate_input,
                  "vertex_normals: vertex " + std::to_string(i) + " has no non-degenerate incident triangle");
    acc[i] /= len;
  }
  return acc;
}

inline Mesh with_normals(Mesh mesh) {
  mesh.normals = vertex_normals(mesh);
  return mesh;
}

}  // namespace tryon
