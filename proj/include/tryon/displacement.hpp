#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tryon/error.hpp"
#include "tryon/mesh.hpp"
#include "tryon/png_io.hpp"

namespace tryon {

// Scalar displacement in millimeters sampled over UV space with clamped
// edges. Texel (i, j) is centered at u = (i + 0.5) / width,
// v = (j + 0.5) / height; row 0 is v = 0 (top of the image).
struct DisplacementMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major

  static DisplacementMap constant(double value, int width = 1, int height = 1) {
    DisplacementMap m;
    m.width = width;
    m.height = height;
    m.values.assign(static_cast<std::size_t>(width) * height, value);
    return m;
  }

  void validate() const {
    if (width < 1 || height < 1) throw Error(Errc::invalid_argument, "displacement map must be at least 1x1");
    if (values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw Error(Errc::invalid_argument, "displacement map size mismatch");
    for (double v : values)
      if (!std::isfinite(v)) throw Error(Errc::invalid_argument, "non-finite displacement value");
  }

  double texel(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return values[static_cast<std::size_t>(y) * width + x];
  }

  /// Bilinear sample.
  double sample(const Vec2& uv) const {
    const double fx = uv.x() * width - 0.5;
    const double fy = uv.y() * height - 0.5;
    const double x0 = std::floor(fx), y0 = std::floor(fy);
    const double tx = fx - x0, ty = fy - y0;
    const int ix = static_cast<int>(x0), iy = static_cast<int>(y0);
    const double top = (1.0 - tx) * texel(ix, iy) + tx * texel(ix + 1, iy);
    const double bottom = (1.0 - tx) * texel(ix, iy + 1) + tx * texel(ix + 1, iy + 1);
    return (1.0 - ty) * top + ty * bottom;
  }
};

/// Grayscale sample s in [0, maxval] maps linearly to [-range_mm, +range_mm].
inline DisplacementMap displacement_from_png(std::span<const std::uint8_t> png_bytes, double range_mm) {
  if (!(range_mm >= 0.0) || !std::isfinite(range_mm))
    throw Error(Errc::invalid_argument, "displacement range must be a nonnegative number");
  const GrayImage img = decode_png_gray(png_bytes);
  DisplacementMap m;
  m.width = img.width;
  m.height = img.height;
  m.values.resize(img.samples.size());
  const double maxval = img.max_value();
  for (std::size_t i = 0; i < img.samples.size(); ++i)
    m.values[i] = -range_mm + 2.0 * range_mm * (static_cast<double>(img.samples[i]) / maxval);
  return m;
}

/// Offsets each vertex along its (input) normal by gain * sample(uv). The
/// input normals are used as-is throughout; topology and uv are unchanged.
inline Mesh apply_displacement(const Mesh& mesh, const DisplacementMap& map, double gain) {
  validate_mesh(mesh);
  map.validate();
  if (!mesh.has_uv()) throw Error(Errc::invalid_argument, "apply_displacement: mesh has no uv");
  if (!mesh.has_normals()) throw Error(Errc::invalid_argument, "apply_displacement: mesh has no normals");
  if (!std::isfinite(gain)) throw Error(Errc::invalid_argument, "apply_displacement: non-finite gain");
  Mesh out = mesh;
  if (gain == 0.0) return out;
  for (std::size_t i = 0; i < out.vertices.size(); ++i) {
    const double d = map.sample(mesh.uv[i]);
    if (d != 0.0) out.vertices[i] += (gain * d) * mesh.normals[i];
  }
  return out;
}

}  // namespace tryon
