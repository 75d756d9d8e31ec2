#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "tryon/error.hpp"
#include "tryon/geom.hpp"
#include "tryon/mesh.hpp"

namespace tryon {

inline constexpr std::size_t kNumLandmarks = 68;

inline const std::vector<std::string>& required_vertex_groups() {
  static const std::vector<std::string> names{"left_eye", "right_eye", "nose_bridge", "left_temple",
                                              "right_temple"};
  return names;
}

struct LandmarkBinding {
  std::uint32_t triangle = 0;
  Vec3 barycentric = Vec3(1.0, 0.0, 0.0);
};

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Parametric head: template + linear shape/expression bases + a jaw joint
// skinned with per-vertex weights. Basis row 3*v + c holds coordinate c of
// vertex v. Immutable once validated.
struct HeadModelAsset {
  std::vector<Vec3> template_vertices;
  std::vector<Triangle> triangles;
  std::vector<Vec2> uv;
  RowMajorMatrix shape_basis;       // 3N x n_shape
  RowMajorMatrix expression_basis;  // 3N x n_expression
  Vec3 jaw_joint = Vec3::Zero();
  std::vector<double> jaw_weights;
  std::vector<LandmarkBinding> landmarks;
  std::map<std::string, std::vector<std::uint32_t>> vertex_groups;

  std::size_t num_vertices() const { return template_vertices.size(); }
  int n_shape() const { return static_cast<int>(shape_basis.cols()); }
  int n_expression() const { return static_cast<int>(expression_basis.cols()); }

  const std::vector<std::uint32_t>& group(const std::string& name) const {
    auto it = vertex_groups.find(name);
    if (it == vertex_groups.end() || it->second.empty())
      throw Error(Errc::invalid_asset, "vertex group '" + name + "' missing or empty");
    return it->second;
  }
};

struct ParamVector {
  Eigen::VectorXd beta;
  Eigen::VectorXd psi;
  Vec3 jaw_pose = Vec3::Zero();
  Vec3 global_pose = Vec3::Zero();
  Vec3 global_translation = Vec3::Zero();

  static ParamVector zeros(const HeadModelAsset& asset) {
    ParamVector p;
    p.beta = Eigen::VectorXd::Zero(asset.n_shape());
    p.psi = Eigen::VectorXd::Zero(asset.n_expression());
    return p;
  }

  bool all_finite() const {
    return beta.allFinite() && psi.allFinite() && jaw_pose.allFinite() && global_pose.allFinite() &&
           global_translation.allFinite();
  }
};

/// Checks every structural invariant of the asset. Throws invalid-asset.
inline void validate_asset(const HeadModelAsset& a) {
  auto fail = [](const std::string& msg) { throw Error(Errc::invalid_asset, msg); };
  const std::size_t n = a.num_vertices();
  if (n == 0) fail("no template vertices");
  if (a.triangles.empty()) fail("no triangles");
  for (const auto& v : a.template_vertices)
    if (!v.allFinite()) fail("non-finite template vertex");
  for (const auto& t : a.triangles)
    for (auto idx : t)
      if (idx >= n) fail("triangle index out of range");
  if (a.uv.size() != n) fail("uv count does not match vertex count");
  for (const auto& t : a.uv)
    if (!(t.x() >= 0.0 && t.x() <= 1.0 && t.y() >= 0.0 && t.y() <= 1.0)) fail("uv outside [0,1]");
  if (static_cast<std::size_t>(a.shape_basis.rows()) != 3 * n) fail("shape basis row count != 3N");
  if (static_cast<std::size_t>(a.expression_basis.rows()) != 3 * n) fail("expression basis row count != 3N");
  if (!a.shape_basis.allFinite() || !a.expression_basis.allFinite()) fail("non-finite basis entry");
  if (!a.jaw_joint.allFinite()) fail("non-finite jaw joint");
  if (a.jaw_weights.size() != n) fail("jaw weight count does not match vertex count");
  for (double w : a.jaw_weights)
    if (!(w >= 0.0 && w <= 1.0)) fail("jaw weight outside [0,1]");
  if (a.landmarks.size() != kNumLandmarks) fail("landmark embedding must have 68 entries");
  for (const auto& lm : a.landmarks) {
    if (lm.triangle >= a.triangles.size()) fail("landmark triangle index out of range");
    if ((lm.barycentric.array() < 0.0).any()) fail("negative barycentric weight");
    if (std::abs(lm.barycentric.sum() - 1.0) > 1e-9) fail("barycentric weights do not sum to 1");
  }
  for (const auto& name : required_vertex_groups()) {
    auto it = a.vertex_groups.find(name);
    if (it == a.vertex_groups.end()) fail("missing required vertex group '" + name + "'");
    if (it->second.empty()) fail("required vertex group '" + name + "' is empty");
  }
  for (const auto& [name, idx] : a.vertex_groups)
    for (auto i : idx)
      if (i >= n) fail("vertex group '" + name + "' index out of range");
}

inline void check_dimensions(const HeadModelAsset& asset, const ParamVector& p) {
  if (p.beta.size() != asset.n_shape())
    throw Error(Errc::invalid_argument, "beta has " + std::to_string(p.beta.size()) + " entries, asset expects " +
                                            std::to_string(asset.n_shape()));
  if (p.psi.size() != asset.n_expression())
    throw Error(Errc::invalid_argument, "psi has " + std::to_string(p.psi.size()) + " entries, asset expects " +
                                            std::to_string(asset.n_expression()));
  if (!p.all_finite()) throw Error(Errc::invalid_argument, "non-finite parameter");
}

namespace detail {

struct PoseMatrices {
  Rot3 jaw;
  Rot3 global;
};

inline Vec3 decode_vertex(const HeadModelAsset& a, const ParamVector& p, const PoseMatrices& m, std::size_t i) {
  Vec3 v = a.template_vertices[i];
  for (int c = 0; c < 3; ++c) {
    const auto row = static_cast<Eigen::Index>(3 * i + c);
    v[c] += a.shape_basis.row(row).dot(p.beta) + a.expression_basis.row(row).dot(p.psi);
  }
  const double w = a.jaw_weights[i];
  if (w != 0.0) {
    const Vec3 rotated = m.jaw * (v - a.jaw_joint) + a.jaw_joint;
    v = w * rotated + (1.0 - w) * v;
  }
  return m.global * v + p.global_translation;
}

}  // namespace detail

/// Decodes only the listed vertices (same values decode() would produce).
inline std::vector<Vec3> decode_vertices(const HeadModelAsset& asset, const ParamVector& params,
                                         std::span<const std::uint32_t> indices) {
  check_dimensions(asset, params);
  const detail::PoseMatrices m{rodrigues(params.jaw_pose), rodrigues(params.global_pose)};
  std::vector<Vec3> out;
  out.reserve(indices.size());
  for (auto i : indices) {
    if (i >= asset.num_vertices()) throw Error(Errc::invalid_argument, "vertex index out of range");
    out.push_back(detail::decode_vertex(asset, params, m, i));
  }
  return out;
}

/// Blendshapes, then two-influence jaw skinning, then the global rigid pose.
inline Mesh decode(const HeadModelAsset& asset, const ParamVector& params) {
  check_dimensions(asset, params);
  const detail::PoseMatrices m{rodrigues(params.jaw_pose), rodrigues(params.global_pose)};
  Mesh mesh;
  mesh.vertices.resize(asset.num_vertices());
  for (std::size_t i = 0; i < asset.num_vertices(); ++i) mesh.vertices[i] = detail::decode_vertex(asset, params, m, i);
  mesh.triangles = asset.triangles;
  mesh.uv = asset.uv;
  return mesh;
}

inline Vec3 barycentric_point(const Mesh& mesh, const Triangle& tri, const Vec3& w) {
  return w[0] * mesh.vertices[tri[0]] + w[1] * mesh.vertices[tri[1]] + w[2] * mesh.vertices[tri[2]];
}

inline std::vector<Vec3> embed_landmarks(const HeadModelAsset& asset, const Mesh& mesh) {
  if (mesh.vertices.size() != asset.num_vertices() || mesh.triangles.size() != asset.triangles.size())
    throw Error(Errc::invalid_argument, "embed_landmarks: mesh topology does not match asset");
  std::vector<Vec3> out;
  out.reserve(asset.landmarks.size());
  for (const auto& lm : asset.landmarks)
    out.push_back(barycentric_point(mesh, asset.triangles[lm.triangle], lm.barycentric));
  return out;
}

/// Vertex indices that landmark evaluation touches, in a stable order, plus
/// for each landmark the positions of its three corners within that list.
struct LandmarkSupport {
  std::vector<std::uint32_t> vertices;
  std::vector<std::array<std::size_t, 3>> corners;
};

inline LandmarkSupport landmark_support(const HeadModelAsset& asset) {
  LandmarkSupport s;
  std::map<std::uint32_t, std::size_t> slot;
  for (const auto& lm : asset.landmarks) {
    std::array<std::size_t, 3> c{};
    for (int k = 0; k < 3; ++k) {
      const auto v = asset.triangles[lm.triangle][k];
      auto [it, inserted] = slot.emplace(v, s.vertices.size());
      if (inserted) s.vertices.push_back(v);
      c[k] = it->second;
    }
    s.corners.push_back(c);
  }
  return s;
}

inline std::vector<Vec3> landmarks_from_support(const HeadModelAsset& asset, const LandmarkSupport& support,
                                                const std::vector<Vec3>& decoded) {
  std::vector<Vec3> out;
  out.reserve(asset.landmarks.size());
  for (std::size_t i = 0; i < asset.landmarks.size(); ++i) {
    const auto& w = asset.landmarks[i].barycentric;
    const auto& c = support.corners[i];
    out.push_back(w[0] * decoded[c[0]] + w[1] * decoded[c[1]] + w[2] * decoded[c[2]]);
  }
  return out;
}

inline Vec3 group_centroid(const HeadModelAsset& asset, const Mesh& mesh, const std::string& name) {
  const auto& idx = asset.group(name);
  Vec3 sum = Vec3::Zero();
  for (auto i : idx) {
    if (i >= mesh.vertices.size()) throw Error(Errc::invalid_argument, "group index outside mesh");
    sum += mesh.vertices[i];
  }
  return sum / static_cast<double>(idx.size());
}

inline std::pair<Vec3, Vec3> eye_centers(const HeadModelAsset& asset, const Mesh& mesh) {
  return {group_centroid(asset, mesh, "left_eye"), group_centroid(asset, mesh, "right_eye")};
}

// ---------------------------------------------------------------------------
// Model-asset container: <name>.fma.json manifest + <name>.fma.bin blob of
// little-endian 32-bit tensors, each starting on a 4-byte boundary.

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io_error, "short write to " + path.string());
}

inline std::uint32_t load_le32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

inline void store_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

inline double unit_scale_to_mm(const std::string& unit) {
  if (unit == "mm" || unit == "millimeters" || unit == "millimetres") return 1.0;
  if (unit == "cm" || unit == "centimeters" || unit == "centimetres") return 10.0;
  if (unit == "m" || unit == "meters" || unit == "metres") return 1000.0;
  throw Error(Errc::invalid_asset, "unknown unit '" + unit + "'");
}

struct TensorView {
  std::string dtype;
  std::vector<std::size_t> shape;
  const std::uint8_t* data = nullptr;
  std::size_t count = 0;

  double at(std::size_t i) const {
    const std::uint32_t bits = load_le32(data + 4 * i);
    if (dtype == "uint32") return static_cast<double>(bits);
    return static_cast<double>(std::bit_cast<float>(bits));
  }
};

}  // namespace detail

inline std::filesystem::path blob_path_for(const std::filesystem::path& manifest) {
  std::string s = manifest.string();
  const std::string suffix = ".json";
  if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
    return s.substr(0, s.size() - suffix.size()) + ".bin";
  return s + ".bin";
}

/// Parses a manifest + blob pair already in memory.
inline HeadModelAsset parse_asset(std::string_view manifest_text, std::span<const std::uint8_t> blob) {
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(manifest_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::corrupt_asset, std::string("manifest is not valid JSON: ") + e.what());
  }
  try {
    if (m.value("format_version", 0) != 1) throw Error(Errc::invalid_asset, "format_version must be 1");
    const double to_mm = detail::unit_scale_to_mm(m.at("units").get<std::string>());

    auto tensor = [&](const std::string& name, std::size_t rank) {
      const auto& t = m.at("tensors").at(name);
      detail::TensorView v;
      v.dtype = t.at("dtype").get<std::string>();
      if (v.dtype != "float32" && v.dtype != "uint32")
        throw Error(Errc::invalid_asset, "tensor '" + name + "' has unsupported dtype " + v.dtype);
      v.shape = t.at("shape").get<std::vector<std::size_t>>();
      if (v.shape.size() != rank) throw Error(Errc::invalid_asset, "tensor '" + name + "' has wrong rank");
      v.count = 1;
      for (auto d : v.shape) v.count *= d;
      const auto offset = t.at("offset").get<std::size_t>();
      if (offset % 4 != 0) throw Error(Errc::corrupt_asset, "tensor '" + name + "' is not 4-byte aligned");
      if (offset > blob.size() || v.count > (blob.size() - offset) / 4)
        throw Error(Errc::corrupt_asset, "tensor '" + name + "' extends past the end of the blob");
      v.data = blob.data() + offset;
      return v;
    };

    HeadModelAsset a;
    const auto tv = tensor("template_vertices", 2);
    if (tv.shape[1] != 3) throw Error(Errc::invalid_asset, "template_vertices must be N x 3");
    const std::size_t n = tv.shape[0];
    a.template_vertices.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      a.template_vertices[i] = Vec3(tv.at(3 * i), tv.at(3 * i + 1), tv.at(3 * i + 2)) * to_mm;

    const auto tri = tensor("triangles", 2);
    if (tri.shape[1] != 3) throw Error(Errc::invalid_asset, "triangles must be M x 3");
    a.triangles.resize(tri.shape[0]);
    for (std::size_t i = 0; i < tri.shape[0]; ++i)
      for (int k = 0; k < 3; ++k) a.triangles[i][k] = static_cast<std::uint32_t>(tri.at(3 * i + k));

    const auto uv = tensor("uv", 2);
    if (uv.shape[0] != n || uv.shape[1] != 2) throw Error(Errc::invalid_asset, "uv must be N x 2");
    a.uv.resize(n);
    for (std::size_t i = 0; i < n; ++i) a.uv[i] = Vec2(uv.at(2 * i), uv.at(2 * i + 1));

    auto basis = [&](const std::string& name, const std::string& dim_key) {
      const auto b = tensor(name, 2);
      const auto declared = m.at(dim_key).get<std::size_t>();
      if (b.shape[0] != 3 * n) throw Error(Errc::invalid_asset, name + " must have 3N rows");
      if (b.shape[1] != declared)
        throw Error(Errc::invalid_asset, name + " column count does not match " + dim_key);
      RowMajorMatrix out(b.shape[0], b.shape[1]);
      for (std::size_t i = 0; i < b.count; ++i) out.data()[i] = b.at(i) * to_mm;
      return out;
    };
    a.shape_basis = basis("shape_basis", "n_shape");
    a.expression_basis = basis("expression_basis", "n_expression");

    const auto jj = tensor("jaw_joint", 1);
    if (jj.count != 3) throw Error(Errc::invalid_asset, "jaw_joint must have 3 entries");
    a.jaw_joint = Vec3(jj.at(0), jj.at(1), jj.at(2)) * to_mm;

    const auto jw = tensor("jaw_weights", 1);
    if (jw.count != n) throw Error(Errc::invalid_asset, "jaw_weights must have N entries");
    a.jaw_weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) a.jaw_weights[i] = jw.at(i);

    for (const auto& e : m.at("landmark_embedding")) {
      LandmarkBinding b;
      b.triangle = e.at("triangle").get<std::uint32_t>();
      const auto w = e.at("barycentric").get<std::vector<double>>();
      if (w.size() != 3) throw Error(Errc::invalid_asset, "barycentric entry must have 3 weights");
      b.barycentric = Vec3(w[0], w[1], w[2]);
      a.landmarks.push_back(b);
    }
    for (const auto& [name, idx] : m.at("vertex_groups").items())
      a.vertex_groups[name] = idx.get<std::vector<std::uint32_t>>();

    validate_asset(a);
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_asset, std::string("manifest field error: ") + e.what());
  }
}

inline HeadModelAsset load_asset(const std::filesystem::path& manifest_path) {
  const auto manifest = detail::read_file_bytes(manifest_path);
  const auto blob = detail::read_file_bytes(blob_path_for(manifest_path));
  return parse_asset(std::string_view(reinterpret_cast<const char*>(manifest.data()), manifest.size()), blob);
}

/// Serializes to (manifest text, blob bytes). Values are stored as float32.
inline std::pair<std::string, std::vector<std::uint8_t>> serialize_asset(const HeadModelAsset& a) {
  validate_asset(a);
  std::vector<std::uint8_t> blob;
  nlohmann::json tensors = nlohmann::json::object();
  auto put_f32 = [&](const std::string& name, std::vector<std::size_t> shape, auto&& each) {
    const std::size_t offset = blob.size();
    each([&](double v) { detail::store_le32(blob, std::bit_cast<std::uint32_t>(static_cast<float>(v))); });
    tensors[name] = {{"dtype", "float32"}, {"shape", shape}, {"offset", offset}};
  };
  const std::size_t n = a.num_vertices();
  put_f32("template_vertices", {n, 3}, [&](auto emit) {
    for (const auto& v : a.template_vertices) for (int c = 0; c < 3; ++c) emit(v[c]);
  });
  {
    const std::size_t offset = blob.size();
    for (const auto& t : a.triangles) for (auto idx : t) detail::store_le32(blob, idx);
    tensors["triangles"] = {{"dtype", "uint32"}, {"shape", {a.triangles.size(), 3}}, {"offset", offset}};
  }
  put_f32("uv", {n, 2}, [&](auto emit) {
    for (const auto& t : a.uv) { emit(t.x()); emit(t.y()); }
  });
  put_f32("shape_basis", {3 * n, static_cast<std::size_t>(a.n_shape())}, [&](auto emit) {
    for (Eigen::Index i = 0; i < a.shape_basis.size(); ++i) emit(a.shape_basis.data()[i]);
  });
  put_f32("expression_basis", {3 * n, static_cast<std::size_t>(a.n_expression())}, [&](auto emit) {
    for (Eigen::Index i = 0; i < a.expression_basis.size(); ++i) emit(a.expression_basis.data()[i]);
  });
  put_f32("jaw_joint", {3}, [&](auto emit) { for (int c = 0; c < 3; ++c) emit(a.jaw_joint[c]); });
  put_f32("jaw_weights", {n}, [&](auto emit) { for (double w : a.jaw_weights) emit(w); });

  nlohmann::json lms = nlohmann::json::array();
  for (const auto& lm : a.landmarks)
    lms.push_back({{"triangle", lm.triangle},
                   {"barycentric", {lm.barycentric[0], lm.barycentric[1], lm.barycentric[2]}}});
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [name, idx] : a.vertex_groups) groups[name] = idx;

  nlohmann::json m = {{"format_version", 1},
                      {"units", "millimeters"},
                      {"num_vertices", n},
                      {"n_shape", a.n_shape()},
                      {"n_expression", a.n_expression()},
                      {"tensors", tensors},
                      {"landmark_embedding", lms},
                      {"vertex_groups", groups}};
  return {m.dump(1), std::move(blob)};
}

inline void save_asset(const HeadModelAsset& asset, const std::filesystem::path& manifest_path) {
  const auto [manifest, blob] = serialize_asset(asset);
  detail::write_file_bytes(manifest_path, std::span(reinterpret_cast<const std::uint8_t*>(manifest.data()),
                                                    manifest.size()));
  detail::write_file_bytes(blob_path_for(manifest_path), blob);
}

}  // namespace tryon
