#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "tryon/error.hpp"
#include "tryon/geom.hpp"
#include "tryon/mesh.hpp"
#include "tryon/surface_query.hpp"

namespace tryon {

struct ErrorSummary {
  double median_mm = 0.0;
  double mean_mm = 0.0;
  double std_mm = 0.0;  // population standard deviation
  std::size_t count = 0;
};

struct ErrorCurve {
  std::vector<double> thresholds_mm;
  std::vector<double> fraction_below;
};

/// Alignment of predicted landmarks onto ground truth. Rigid unless the
/// caller opts into scale.
inline Similarity3 align_rigid_landmarks(std::span<const Vec3> pred, std::span<const Vec3> gt,
                                         bool with_scale = false) {
  return umeyama(pred, gt, with_scale);
}

/// Per-point distance to the nearest point on any triangle of the mesh.
inline std::vector<double> scan_to_mesh_distances(std::span<const Vec3> points, const Mesh& mesh) {
  if (points.empty()) throw Error(Errc::invalid_argument, "scan_to_mesh_distances: no points");
  if (mesh.triangles.empty()) throw Error(Errc::invalid_argument, "scan_to_mesh_distances: mesh has no triangles");
  const NearestTriangleSearch search(mesh);
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(search.nearest(p).distance);
  return out;
}

inline ErrorSummary summarize(std::span<const double> distances) {
  if (distances.empty()) throw Error(Errc::invalid_argument, "summarize: no distances");
  std::vector<double> sorted(distances.begin(), distances.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  ErrorSummary s;
  s.count = n;
  s.median_mm = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  double sum = 0.0;
  for (double d : distances) sum += d;
  s.mean_mm = sum / static_cast<double>(n);
  double sq = 0.0;
  for (double d : distances) sq += (d - s.mean_mm) * (d - s.mean_mm);
  s.std_mm = std::sqrt(sq / static_cast<double>(n));
  return s;
}

/// Fraction of distances at or below each of n_steps evenly spaced thresholds in [0, max_mm].
inline ErrorCurve cumulative_curve(std::span<const double> distances, double max_mm, int n_steps) {
  if (distances.empty()) throw Error(Errc::invalid_argument, "cumulative_curve: no distances");
  if (n_steps < 2) throw Error(Errc::invalid_argument, "cumulative_curve: n_steps must be at least 2");
  if (!(max_mm > 0.0)) throw Error(Errc::invalid_argument, "cumulative_curve: max_mm must be positive");
  std::vector<double> sorted(distances.begin(), distances.end());
  std::sort(sorted.begin(), sorted.end());
  ErrorCurve c;
  const double n = static_cast<double>(sorted.size());
  for (int i = 0; i < n_steps; ++i) {
    const double t = max_mm * static_cast<double>(i) / static_cast<double>(n_steps - 1);
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    c.thresholds_mm.push_back(t);
    c.fraction_below.push_back(static_cast<double>(below) / n);
  }
  return c;
}

inline std::string curve_to_csv(const ErrorCurve& c) {
  std::string out = "threshold_mm,fraction\n";
  char buf[96];
  for (std::size_t i = 0; i < c.thresholds_mm.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", c.thresholds_mm[i], c.fraction_below[i]);
    out += buf;
  }
  return out;
}

// Benchmark-table rendering: one row per method with median / mean / std for
// the low- and high-quality splits, 2 decimals, "-" for a missing split.
struct ReportRow {
  std::string method;
  std::optional<ErrorSummary> lq;
  std::optional<ErrorSummary> hq;
};

inline std::string render_report(const std::vector<ReportRow>& rows) {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.method.size());
  auto cell = [](const std::optional<ErrorSummary>& s, double ErrorSummary::*field) {
    if (!s) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", (*s).*field);
    return std::string(buf);
  };
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::string out = pad("Method", width) + "  Median (mm)    Mean (mm)      Std (mm)\n";
  out += pad("", width) + "  LQ     HQ      LQ     HQ      LQ     HQ\n";
  for (const auto& r : rows) {
    out += pad(r.method, width);
    for (auto field : {&ErrorSummary::median_mm, &ErrorSummary::mean_mm, &ErrorSummary::std_mm}) {
      out += "  " + pad(cell(r.lq, field), 5) + "  " + pad(cell(r.hq, field), 5) + " ";
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
  }
  return out;
}

}  // namespace tryon
