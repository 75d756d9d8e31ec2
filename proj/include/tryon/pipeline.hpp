#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tryon/displacement.hpp"
#include "tryon/error.hpp"
#include "tryon/eyewear_fit.hpp"
#include "tryon/head_model.hpp"
#include "tryon/mesh_io.hpp"

namespace tryon {

// Bumped whenever render output for identical inputs would change; part of
// the service's content-addressing key.
inline constexpr const char* kPipelineVersion = "tryon-pipeline/1";

// ---------------------------------------------------------------------------
// Eyewear anchors sidecar (<id>.anchors.json)

inline EyewearAnchors parse_anchors_json(const nlohmann::json& j, double* unit_scale = nullptr) {
  try {
    const double s = detail::unit_scale_to_mm(j.value("units", std::string("mm")));
    auto point = [&](const char* key) {
      const auto v = j.at(key).get<std::vector<double>>();
      if (v.size() != 3) throw Error(Errc::invalid_asset, std::string("anchor '") + key + "' must have 3 coordinates");
      return Vec3(v[0], v[1], v[2]) * s;
    };
    EyewearAnchors a;
    a.bridge = point("bridge");
    a.hinge_left = point("hinge_left");
    a.hinge_right = point("hinge_right");
    a.lens_center_left = point("lens_center_left");
    a.lens_center_right = point("lens_center_right");
    validate_anchors(a);
    if (unit_scale) *unit_scale = s;
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_asset, std::string("anchors: ") + e.what());
  }
}

inline nlohmann::json anchors_to_json(const std::string& id, const std::string& display_name, const EyewearAnchors& a) {
  auto arr = [](const Vec3& v) { return std::vector<double>{v.x(), v.y(), v.z()}; };
  return {{"id", id},
          {"display_name", display_name},
          {"units", "mm"},
          {"bridge", arr(a.bridge)},
          {"hinge_left", arr(a.hinge_left)},
          {"hinge_right", arr(a.hinge_right)},
          {"lens_center_left", arr(a.lens_center_left)},
          {"lens_center_right", arr(a.lens_center_right)}};
}

struct LoadedEyewear {
  EyewearAsset asset;
  Material material;
};

/// Eyewear from a GLB plus its anchors sidecar. All mesh nodes are baked into
/// one asset-local mesh; the GLB is read in the sidecar's units.
inline LoadedEyewear load_eyewear(std::span<const std::uint8_t> glb, std::string_view anchors_text,
                                  const std::string& fallback_id = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(anchors_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_asset, std::string("anchors JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::invalid_asset, "anchors JSON must be an object");
  double unit = 1.0;
  LoadedEyewear out;
  out.asset.anchors = parse_anchors_json(j, &unit);
  out.asset.id = j.value("id", fallback_id);
  out.asset.display_name = j.value("display_name", out.asset.id);
  if (out.asset.id.empty()) throw Error(Errc::invalid_asset, "eyewear has no id");

  const Scene scene = read_glb(glb);
  if (scene.nodes.empty()) throw Error(Errc::invalid_asset, "eyewear GLB has no mesh nodes");
  Mesh& mesh = out.asset.mesh;
  bool uv = true;
  for (const auto& n : scene.nodes) uv &= n.mesh.has_uv();
  for (const auto& n : scene.nodes) {
    Mesh baked = baked_mesh(n);
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    for (const auto& v : baked.vertices) mesh.vertices.push_back(unit * v);
    if (uv) mesh.uv.insert(mesh.uv.end(), baked.uv.begin(), baked.uv.end());
    for (const auto& t : baked.triangles) mesh.triangles.push_back({base + t[0], base + t[1], base + t[2]});
  }
  const auto& first = scene.nodes.front();
  if (first.material) out.material = scene.materials[*first.material];
  out.material.name = out.asset.id;
  return out;
}

// ---------------------------------------------------------------------------

struct DisplacementInput {
  DisplacementMap map;
  double gain = 1.0;
};

struct TryonRender {
  Mesh head;
  Similarity3 initial_placement;
  Similarity3 placement;  // after clearance resolution
  AnchorFrame frame;
  std::vector<std::uint8_t> glb;
};

inline Material neutral_head_material() { return {"head", {0.80, 0.68, 0.60, 1.0}, {}}; }

/// decode -> normals -> (displacement) -> anchor frame -> placement ->
/// clearance -> merged two-node scene -> GLB bytes.
inline TryonRender render_tryon(const HeadModelAsset& asset, const ParamVector& params, const LoadedEyewear& eyewear,
                                const FitParams& fp = {}, const ClearanceOptions& clearance = {},
                                const std::optional<DisplacementInput>& displacement = std::nullopt) {
  TryonRender r;
  Mesh decoded = with_normals(decode(asset, params));
  r.frame = head_anchor_frame(asset, decoded);
  if (displacement) decoded = with_normals(apply_displacement(decoded, displacement->map, displacement->gain));
  r.head = std::move(decoded);
  r.initial_placement = compute_placement(r.frame, eyewear.asset, fp);
  r.placement = resolve_clearance(r.head, eyewear.asset.mesh, r.initial_placement, clearance);
  const Scene scene = merge_scene(r.head, neutral_head_material(), eyewear.asset.mesh, eyewear.material, r.placement);
  r.glb = write_glb(scene);
  return r;
}

}  // namespace tryon
