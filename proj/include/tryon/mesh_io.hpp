#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Geometry>
#include <json.hpp>

#include "tryon/error.hpp"
#include "tryon/geom.hpp"
#include "tryon/mesh.hpp"
#include "tryon/png_io.hpp"

namespace tryon {

// ---------------------------------------------------------------------------
// OBJ

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline double parse_double(std::string_view s, std::size_t line_no) {
  // strtod handles the exponent/inf forms that OBJ exporters emit
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size() || tmp.empty())
    throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": bad number '" + tmp + "'");
  return v;
}

inline long parse_index(std::string_view s, std::size_t line_no) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": bad index '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

/// Wavefront OBJ subset: v, vt, vn and f (v, v/vt, v/vt/vn, v//vn), polygons
/// fan-triangulated. Each distinct (v, vt, vn) corner combination becomes one
/// output vertex; the first combination seen for position i keeps index i.
/// vt is flipped to the top-left UV origin (v' = 1 - v).
inline Mesh parse_obj(std::string_view text) {
  std::vector<Vec3> pos;
  std::vector<Vec2> tex;
  std::vector<Vec3> nrm;
  struct Corner {
    long v, t, n;
  };
  std::vector<std::vector<Corner>> faces;
  std::vector<std::size_t> face_lines;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "v") {
      if (tok.size() < 4) throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": v needs 3 coordinates");
      pos.emplace_back(detail::parse_double(tok[1], line_no), detail::parse_double(tok[2], line_no),
                       detail::parse_double(tok[3], line_no));
    } else if (tok[0] == "vt") {
      if (tok.size() < 3) throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": vt needs 2 coordinates");
      tex.emplace_back(detail::parse_double(tok[1], line_no), 1.0 - detail::parse_double(tok[2], line_no));
    } else if (tok[0] == "vn") {
      if (tok.size() < 4) throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": vn needs 3 coordinates");
      nrm.emplace_back(detail::parse_double(tok[1], line_no), detail::parse_double(tok[2], line_no),
                       detail::parse_double(tok[3], line_no));
    } else if (tok[0] == "f") {
      if (tok.size() < 4) throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": face needs 3 corners");
      std::vector<Corner> face;
      for (std::size_t k = 1; k < tok.size(); ++k) {
        const std::string_view c = tok[k];
        Corner corner{0, 0, 0};
        const auto s1 = c.find('/');
        corner.v = detail::parse_index(c.substr(0, s1), line_no);
        if (s1 != std::string_view::npos) {
          const auto rest = c.substr(s1 + 1);
          const auto s2 = rest.find('/');
          const auto t = rest.substr(0, s2);
          if (!t.empty()) corner.t = detail::parse_index(t, line_no);
          if (s2 != std::string_view::npos) corner.n = detail::parse_index(rest.substr(s2 + 1), line_no);
        }
        if (corner.v < 0 || corner.t < 0 || corner.n < 0)
          throw Error(Errc::unsupported_feature,
                      "line " + std::to_string(line_no) + ": negative (relative) OBJ indices are not supported");
        if (corner.v == 0) throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": index 0 is invalid");
        face.push_back(corner);
      }
      faces.push_back(std::move(face));
      face_lines.push_back(line_no);
    }
    // other statements (o, g, s, usemtl, mtllib, l, ...) are ignored
  }

  bool any_t = false, any_n = false;
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (const auto& c : faces[f]) {
      const auto ln = std::to_string(face_lines[f]);
      if (static_cast<std::size_t>(c.v) > pos.size()) throw Error(Errc::parse_error, "line " + ln + ": vertex index out of range");
      if (static_cast<std::size_t>(c.t) > tex.size()) throw Error(Errc::parse_error, "line " + ln + ": texcoord index out of range");
      if (static_cast<std::size_t>(c.n) > nrm.size()) throw Error(Errc::parse_error, "line " + ln + ": normal index out of range");
      any_t |= c.t != 0;
      any_n |= c.n != 0;
    }

  Mesh mesh;
  mesh.vertices = pos;
  if (any_t) mesh.uv.assign(pos.size(), Vec2::Zero());
  if (any_n) mesh.normals.assign(pos.size(), Vec3::Zero());
  std::vector<std::optional<std::pair<long, long>>> base_attr(pos.size());
  std::map<std::tuple<long, long, long>, std::uint32_t> split;

  auto resolve = [&](const Corner& c) -> std::uint32_t {
    const auto base = static_cast<std::size_t>(c.v - 1);
    const std::pair<long, long> attr{c.t, c.n};
    auto set_attr = [&](std::size_t idx) {
      if (any_t) mesh.uv[idx] = c.t ? tex[static_cast<std::size_t>(c.t - 1)] : Vec2::Zero();
      if (any_n) mesh.normals[idx] = c.n ? nrm[static_cast<std::size_t>(c.n - 1)] : Vec3::Zero();
    };
    if (!base_attr[base]) {
      base_attr[base] = attr;
      set_attr(base);
      return static_cast<std::uint32_t>(base);
    }
    if (*base_attr[base] == attr) return static_cast<std::uint32_t>(base);
    const auto key = std::make_tuple(c.v, c.t, c.n);
    if (auto it = split.find(key); it != split.end()) return it->second;
    const auto idx = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back(pos[base]);
    if (any_t) mesh.uv.emplace_back();
    if (any_n) mesh.normals.emplace_back();
    set_attr(idx);
    split.emplace(key, idx);
    return idx;
  };

  for (const auto& face : faces) {
    std::vector<std::uint32_t> idx;
    for (const auto& c : face) idx.push_back(resolve(c));
    for (std::size_t k = 1; k + 1 < idx.size(); ++k) mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// Scene

struct Material {
  std::string name;
  std::array<double, 4> base_color{1.0, 1.0, 1.0, 1.0};
  std::vector<std::uint8_t> texture_png;  // empty when untextured
};

// glTF node TRS kept verbatim (quaternion x, y, z, w; uniform scale) so that
// read/write round trips reproduce the exact numbers.
struct NodeTransform {
  std::array<double, 3> translation{0.0, 0.0, 0.0};
  std::array<double, 4> rotation{0.0, 0.0, 0.0, 1.0};
  double scale = 1.0;

  static NodeTransform from_similarity(const Similarity3& s) {
    NodeTransform t;
    Eigen::Quaterniond q(s.rotation);
    q.normalize();
    if (q.w() < 0.0) q.coeffs() *= -1.0;
    t.translation = {s.translation.x(), s.translation.y(), s.translation.z()};
    t.rotation = {q.x(), q.y(), q.z(), q.w()};
    t.scale = s.scale;
    return t;
  }

  Similarity3 to_similarity() const {
    Eigen::Quaterniond q(rotation[3], rotation[0], rotation[1], rotation[2]);
    q.normalize();
    return {scale, q.toRotationMatrix(), Vec3(translation[0], translation[1], translation[2])};
  }

  bool is_identity() const {
    return translation == std::array<double, 3>{0, 0, 0} && rotation == std::array<double, 4>{0, 0, 0, 1} &&
           scale == 1.0;
  }
};

struct SceneNode {
  std::string name;
  Mesh mesh;
  NodeTransform transform;
  std::optional<std::size_t> material;
};

struct Scene {
  std::vector<SceneNode> nodes;
  std::vector<Material> materials;

  const SceneNode* find(const std::string& name) const {
    for (const auto& n : nodes)
      if (n.name == name) return &n;
    return nullptr;
  }
};

inline void validate_scene(const Scene& scene) {
  if (scene.nodes.empty()) throw Error(Errc::invalid_argument, "scene has no nodes");
  std::set<std::string> names;
  for (const auto& n : scene.nodes) {
    if (!names.insert(n.name).second) throw Error(Errc::invalid_argument, "duplicate node name '" + n.name + "'");
    validate_mesh(n.mesh, "node '" + n.name + "'");
    if (n.mesh.vertices.empty() || n.mesh.triangles.empty())
      throw Error(Errc::invalid_argument, "node '" + n.name + "' has an empty mesh");
    if (n.material && *n.material >= scene.materials.size())
      throw Error(Errc::invalid_argument, "node '" + n.name + "' references a missing material");
    if (!(n.transform.scale > 0.0)) throw Error(Errc::invalid_argument, "node scale must be positive");
  }
  for (const auto& m : scene.materials)
    if (!m.texture_png.empty() && !has_png_signature(m.texture_png))
      throw Error(Errc::invalid_argument, "material '" + m.name + "' texture is not PNG");
}

/// Node transform applied to the node's geometry.
inline Mesh baked_mesh(const SceneNode& node) { return transformed(node.mesh, node.transform.to_similarity()); }

// ---------------------------------------------------------------------------
// GLB

inline constexpr std::uint32_t kGlbMagic = 0x46546C67;      // "glTF"
inline constexpr std::uint32_t kGlbChunkJson = 0x4E4F534A;  // "JSON"
inline constexpr std::uint32_t kGlbChunkBin = 0x004E4942;   // "BIN\0"

namespace gltf {
inline constexpr int kFloat = 5126;
inline constexpr int kUnsignedByte = 5121;
inline constexpr int kUnsignedShort = 5123;
inline constexpr int kUnsignedInt = 5125;
inline constexpr int kArrayBuffer = 34962;
inline constexpr int kElementArrayBuffer = 34963;
}  // namespace gltf

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

inline void put_f32(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

inline float get_f32(const std::uint8_t* p) {
  const std::uint32_t bits = get_u32(p);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

inline void pad_to_4(std::vector<std::uint8_t>& out, std::uint8_t fill) {
  while (out.size() % 4 != 0) out.push_back(fill);
}

class GlbBuilder {
 public:
  nlohmann::json accessors = nlohmann::json::array();
  nlohmann::json views = nlohmann::json::array();
  std::vector<std::uint8_t> bin;

  int add_view(std::span<const std::uint8_t> bytes, std::optional<int> target) {
    pad_to_4(bin, 0);
    nlohmann::json v = {{"buffer", 0}, {"byteOffset", bin.size()}, {"byteLength", bytes.size()}};
    if (target) v["target"] = *target;
    bin.insert(bin.end(), bytes.begin(), bytes.end());
    views.push_back(v);
    return static_cast<int>(views.size()) - 1;
  }

  template <int N, class Vec>
  int add_float_accessor(const std::vector<Vec>& data) {
    std::vector<std::uint8_t> bytes;
    std::array<float, N> lo, hi;
    lo.fill(std::numeric_limits<float>::infinity());
    hi.fill(-std::numeric_limits<float>::infinity());
    for (const auto& v : data)
      for (int c = 0; c < N; ++c) {
        const float f = static_cast<float>(v[c]);
        lo[c] = std::min(lo[c], f);
        hi[c] = std::max(hi[c], f);
        put_f32(bytes, f);
      }
    const int view = add_view(bytes, gltf::kArrayBuffer);
    nlohmann::json a = {{"bufferView", view},
                        {"componentType", gltf::kFloat},
                        {"count", data.size()},
                        {"type", N == 3 ? "VEC3" : "VEC2"},
                        {"min", std::vector<double>(lo.begin(), lo.end())},
                        {"max", std::vector<double>(hi.begin(), hi.end())}};
    accessors.push_back(a);
    return static_cast<int>(accessors.size()) - 1;
  }

  int add_index_accessor(const std::vector<Triangle>& tris) {
    std::vector<std::uint8_t> bytes;
    std::uint32_t lo = std::numeric_limits<std::uint32_t>::max(), hi = 0;
    for (const auto& t : tris)
      for (auto i : t) {
        put_u32(bytes, i);
        lo = std::min(lo, i);
        hi = std::max(hi, i);
      }
    const int view = add_view(bytes, gltf::kElementArrayBuffer);
    accessors.push_back({{"bufferView", view},
                         {"componentType", gltf::kUnsignedInt},
                         {"count", 3 * tris.size()},
                         {"type", "SCALAR"},
                         {"min", {lo}},
                         {"max", {hi}}});
    return static_cast<int>(accessors.size()) - 1;
  }
};

}  // namespace detail

/// Serializes a scene as a glTF 2.0 binary. Output is a pure function of the
/// scene: JSON keys are sorted and no whitespace is emitted.
inline std::vector<std::uint8_t> write_glb(const Scene& scene) {
  validate_scene(scene);
  detail::GlbBuilder b;
  nlohmann::json meshes = nlohmann::json::array();
  nlohmann::json nodes = nlohmann::json::array();
  nlohmann::json scene_nodes = nlohmann::json::array();

  for (std::size_t i = 0; i < scene.nodes.size(); ++i) {
    const SceneNode& n = scene.nodes[i];
    nlohmann::json attributes = {{"POSITION", b.add_float_accessor<3>(n.mesh.vertices)}};
    if (n.mesh.has_normals()) attributes["NORMAL"] = b.add_float_accessor<3>(n.mesh.normals);
    if (n.mesh.has_uv()) attributes["TEXCOORD_0"] = b.add_float_accessor<2>(n.mesh.uv);
    nlohmann::json prim = {{"attributes", attributes}, {"indices", b.add_index_accessor(n.mesh.triangles)}, {"mode", 4}};
    if (n.material) prim["material"] = *n.material;
    meshes.push_back({{"name", n.name}, {"primitives", {prim}}});
    nodes.push_back({{"name", n.name},
                     {"mesh", i},
                     {"translation", n.transform.translation},
                     {"rotation", n.transform.rotation},
                     {"scale", {n.transform.scale, n.transform.scale, n.transform.scale}}});
    scene_nodes.push_back(i);
  }

  nlohmann::json materials = nlohmann::json::array();
  nlohmann::json textures = nlohmann::json::array();
  nlohmann::json images = nlohmann::json::array();
  for (const auto& m : scene.materials) {
    nlohmann::json pbr = {{"baseColorFactor", m.base_color}, {"metallicFactor", 0.0}, {"roughnessFactor", 1.0}};
    if (!m.texture_png.empty()) {
      const int view = b.add_view(m.texture_png, std::nullopt);
      images.push_back({{"bufferView", view}, {"mimeType", "image/png"}});
      textures.push_back({{"sampler", 0}, {"source", images.size() - 1}});
      pbr["baseColorTexture"] = {{"index", textures.size() - 1}};
    }
    materials.push_back({{"name", m.name}, {"pbrMetallicRoughness", pbr}});
  }

  detail::pad_to_4(b.bin, 0);
  nlohmann::json doc = {{"asset", {{"generator", "tryon"}, {"version", "2.0"}}},
                        {"scene", 0},
                        {"scenes", {{{"nodes", scene_nodes}}}},
                        {"nodes", nodes},
                        {"meshes", meshes},
                        {"accessors", b.accessors},
                        {"bufferViews", b.views},
                        {"buffers", {{{"byteLength", b.bin.size()}}}}};
  if (!materials.empty()) doc["materials"] = materials;
  if (!textures.empty()) {
    doc["textures"] = textures;
    doc["images"] = images;
    doc["samplers"] = {{{"magFilter", 9729}, {"minFilter", 9987}}};
  }

  std::string json_text = doc.dump();
  while (json_text.size() % 4 != 0) json_text.push_back(' ');

  std::vector<std::uint8_t> out;
  const std::size_t total = 12 + 8 + json_text.size() + 8 + b.bin.size();
  out.reserve(total);
  detail::put_u32(out, kGlbMagic);
  detail::put_u32(out, 2);
  detail::put_u32(out, static_cast<std::uint32_t>(total));
  detail::put_u32(out, static_cast<std::uint32_t>(json_text.size()));
  detail::put_u32(out, kGlbChunkJson);
  out.insert(out.end(), json_text.begin(), json_text.end());
  detail::put_u32(out, static_cast<std::uint32_t>(b.bin.size()));
  detail::put_u32(out, kGlbChunkBin);
  out.insert(out.end(), b.bin.begin(), b.bin.end());
  return out;
}

namespace detail {

struct GlbChunks {
  nlohmann::json doc;
  std::span<const std::uint8_t> bin;
};

inline GlbChunks split_glb(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || get_u32(bytes.data()) != kGlbMagic) throw Error(Errc::not_glb, "missing glTF magic");
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != 2) throw Error(Errc::unsupported_feature, "glTF binary version " + std::to_string(version));
  const std::uint32_t length = get_u32(bytes.data() + 8);
  if (length > bytes.size()) throw Error(Errc::corrupt_file, "declared length exceeds file size");
  const auto data = bytes.first(length);

  GlbChunks out;
  bool have_json = false;
  std::size_t pos = 12;
  while (pos < data.size()) {
    if (data.size() - pos < 8) throw Error(Errc::corrupt_file, "truncated chunk header");
    const std::uint32_t chunk_len = get_u32(data.data() + pos);
    const std::uint32_t chunk_type = get_u32(data.data() + pos + 4);
    pos += 8;
    if (chunk_len > data.size() - pos) throw Error(Errc::corrupt_file, "chunk overruns buffer");
    const auto payload = data.subspan(pos, chunk_len);
    if (!have_json) {
      if (chunk_type != kGlbChunkJson) throw Error(Errc::corrupt_file, "first chunk is not JSON");
      try {
        out.doc = nlohmann::json::parse(payload.begin(), payload.end());
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::corrupt_file, std::string("JSON chunk: ") + e.what());
      }
      have_json = true;
    } else if (chunk_type == kGlbChunkBin && out.bin.empty()) {
      out.bin = payload;
    }
    pos += chunk_len;
  }
  if (!have_json) throw Error(Errc::corrupt_file, "no JSON chunk");
  return out;
}

inline int component_size(int component_type) {
  switch (component_type) {
    case gltf::kFloat:
    case gltf::kUnsignedInt: return 4;
    case gltf::kUnsignedShort:
    case 5122: return 2;
    case gltf::kUnsignedByte:
    case 5120: return 1;
    default: return 0;
  }
}

inline int type_components(const std::string& type) {
  if (type == "SCALAR") return 1;
  if (type == "VEC2") return 2;
  if (type == "VEC3") return 3;
  if (type == "VEC4") return 4;
  if (type == "MAT4") return 16;
  return 0;
}

// Resolved accessor: element i, component c lives at data + i * stride + c * component size.
struct AccessorView {
  const std::uint8_t* data = nullptr;
  std::size_t count = 0;
  std::size_t stride = 0;
  int components = 0;
  int component_type = 0;
};

inline std::span<const std::uint8_t> buffer_view_bytes(const GlbChunks& g, std::size_t view_index,
                                                       std::size_t* stride = nullptr) {
  const auto& views = g.doc.at("bufferViews");
  if (view_index >= views.size()) throw Error(Errc::corrupt_file, "bufferView index out of range");
  const auto& v = views[view_index];
  if (v.value("buffer", 0) != 0) throw Error(Errc::unsupported_feature, "only the GLB-embedded buffer is supported");
  const std::size_t offset = v.value("byteOffset", std::size_t{0});
  const std::size_t len = v.at("byteLength").get<std::size_t>();
  if (offset > g.bin.size() || len > g.bin.size() - offset) throw Error(Errc::corrupt_file, "bufferView overruns BIN chunk");
  if (stride) *stride = v.value("byteStride", std::size_t{0});
  return g.bin.subspan(offset, len);
}

inline AccessorView accessor_view(const GlbChunks& g, std::size_t index) {
  const auto& accessors = g.doc.at("accessors");
  if (index >= accessors.size()) throw Error(Errc::corrupt_file, "accessor index out of range");
  const auto& a = accessors[index];
  if (a.contains("sparse")) throw Error(Errc::unsupported_feature, "sparse accessors");
  if (!a.contains("bufferView")) throw Error(Errc::unsupported_feature, "accessor without bufferView");
  AccessorView out;
  out.component_type = a.at("componentType").get<int>();
  out.components = type_components(a.at("type").get<std::string>());
  out.count = a.at("count").get<std::size_t>();
  const int csize = component_size(out.component_type);
  if (csize == 0 || out.components == 0)
    throw Error(Errc::unsupported_feature, "accessor component type " + std::to_string(out.component_type));
  std::size_t stride = 0;
  const auto view = buffer_view_bytes(g, a.at("bufferView").get<std::size_t>(), &stride);
  const std::size_t elem = static_cast<std::size_t>(csize) * out.components;
  out.stride = stride ? stride : elem;
  const std::size_t offset = a.value("byteOffset", std::size_t{0});
  if (out.count == 0) throw Error(Errc::corrupt_file, "accessor with zero count");
  if (offset > view.size() || (out.count - 1) * out.stride + elem > view.size() - offset)
    throw Error(Errc::corrupt_file, "accessor overruns its bufferView");
  out.data = view.data() + offset;
  return out;
}

template <int N>
std::vector<Eigen::Matrix<double, N, 1>> read_float_vectors(const GlbChunks& g, std::size_t index) {
  const auto v = accessor_view(g, index);
  if (v.component_type != gltf::kFloat) throw Error(Errc::unsupported_feature, "non-float vertex attribute");
  if (v.components != N) throw Error(Errc::corrupt_file, "attribute has wrong component count");
  std::vector<Eigen::Matrix<double, N, 1>> out(v.count);
  for (std::size_t i = 0; i < v.count; ++i)
    for (int c = 0; c < N; ++c) out[i][c] = get_f32(v.data + i * v.stride + 4 * c);
  return out;
}

inline std::vector<std::uint32_t> read_indices(const GlbChunks& g, std::size_t index) {
  const auto v = accessor_view(g, index);
  if (v.components != 1) throw Error(Errc::corrupt_file, "index accessor must be SCALAR");
  std::vector<std::uint32_t> out(v.count);
  for (std::size_t i = 0; i < v.count; ++i) {
    const std::uint8_t* p = v.data + i * v.stride;
    switch (v.component_type) {
      case gltf::kUnsignedInt: out[i] = get_u32(p); break;
      case gltf::kUnsignedShort: out[i] = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8); break;
      case gltf::kUnsignedByte: out[i] = p[0]; break;
      default: throw Error(Errc::unsupported_feature, "index component type " + std::to_string(v.component_type));
    }
  }
  return out;
}

inline NodeTransform read_node_transform(const nlohmann::json& node) {
  NodeTransform t;
  if (node.contains("matrix")) {
    const auto m = node.at("matrix").get<std::vector<double>>();
    if (m.size() != 16) throw Error(Errc::corrupt_file, "node matrix must have 16 entries");
    Eigen::Matrix3d a;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = m[static_cast<std::size_t>(c * 4 + r)];  // column-major
    const double s = std::cbrt(a.determinant());
    if (!(s > 0.0)) throw Error(Errc::unsupported_feature, "node matrix is not a similarity");
    const Rot3 r = a / s;
    if ((r.transpose() * r - Rot3::Identity()).norm() > 1e-6)
      throw Error(Errc::unsupported_feature, "node matrix has non-uniform scale or shear");
    return NodeTransform::from_similarity({s, r, Vec3(m[12], m[13], m[14])});
  }
  if (node.contains("translation")) {
    const auto v = node.at("translation").get<std::vector<double>>();
    if (v.size() != 3) throw Error(Errc::corrupt_file, "translation must have 3 entries");
    t.translation = {v[0], v[1], v[2]};
  }
  if (node.contains("rotation")) {
    const auto v = node.at("rotation").get<std::vector<double>>();
    if (v.size() != 4) throw Error(Errc::corrupt_file, "rotation must have 4 entries");
    t.rotation = {v[0], v[1], v[2], v[3]};
  }
  if (node.contains("scale")) {
    const auto v = node.at("scale").get<std::vector<double>>();
    if (v.size() != 3) throw Error(Errc::corrupt_file, "scale must have 3 entries");
    if (v[0] != v[1] || v[1] != v[2]) throw Error(Errc::unsupported_feature, "non-uniform node scale");
    t.scale = v[0];
  }
  return t;
}

inline Mesh read_mesh(const GlbChunks& g, std::size_t mesh_index, std::optional<std::size_t>* material) {
  const auto& meshes = g.doc.at("meshes");
  if (mesh_index >= meshes.size()) throw Error(Errc::corrupt_file, "mesh index out of range");
  Mesh out;
  bool all_uv = true, all_normals = true;
  for (const auto& prim : meshes[mesh_index].at("primitives")) {
    const auto& attr = prim.at("attributes");
    all_uv &= attr.contains("TEXCOORD_0");
    all_normals &= attr.contains("NORMAL");
  }
  for (const auto& prim : meshes[mesh_index].at("primitives")) {
    if (prim.value("mode", 4) != 4) throw Error(Errc::unsupported_feature, "non-triangle primitive mode");
    const auto& attr = prim.at("attributes");
    const auto pos = read_float_vectors<3>(g, attr.at("POSITION").get<std::size_t>());
    const auto base = static_cast<std::uint32_t>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), pos.begin(), pos.end());
    if (all_normals) {
      const auto n = read_float_vectors<3>(g, attr.at("NORMAL").get<std::size_t>());
      if (n.size() != pos.size()) throw Error(Errc::corrupt_file, "NORMAL count differs from POSITION count");
      out.normals.insert(out.normals.end(), n.begin(), n.end());
    }
    if (all_uv) {
      const auto t = read_float_vectors<2>(g, attr.at("TEXCOORD_0").get<std::size_t>());
      if (t.size() != pos.size()) throw Error(Errc::corrupt_file, "TEXCOORD_0 count differs from POSITION count");
      out.uv.insert(out.uv.end(), t.begin(), t.end());
    }
    std::vector<std::uint32_t> idx;
    if (prim.contains("indices")) {
      idx = read_indices(g, prim.at("indices").get<std::size_t>());
    } else {
      idx.resize(pos.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
    }
    if (idx.size() % 3 != 0) throw Error(Errc::corrupt_file, "index count is not a multiple of 3");
    for (std::size_t i = 0; i < idx.size(); i += 3) {
      for (int k = 0; k < 3; ++k)
        if (idx[i + k] >= pos.size()) throw Error(Errc::corrupt_file, "index out of range");
      out.triangles.push_back({base + idx[i], base + idx[i + 1], base + idx[i + 2]});
    }
    if (material && !*material && prim.contains("material")) *material = prim.at("material").get<std::size_t>();
  }
  return out;
}

}  // namespace detail

/// Parses the subset of glTF 2.0 binary that write_glb produces (plus
/// unsigned byte/short indices, byteStride, matrix transforms and node
/// hierarchies of similarity transforms). Unknown fields are ignored.
inline Scene read_glb(std::span<const std::uint8_t> bytes) {
  const auto g = detail::split_glb(bytes);
  Scene scene;
  try {
    if (g.doc.contains("materials")) {
      for (const auto& m : g.doc.at("materials")) {
        Material mat;
        mat.name = m.value("name", std::string{});
        if (m.contains("pbrMetallicRoughness")) {
          const auto& pbr = m.at("pbrMetallicRoughness");
          if (pbr.contains("baseColorFactor")) {
            const auto c = pbr.at("baseColorFactor").get<std::vector<double>>();
            if (c.size() == 4) mat.base_color = {c[0], c[1], c[2], c[3]};
          }
          if (pbr.contains("baseColorTexture")) {
            const auto tex_index = pbr.at("baseColorTexture").at("index").get<std::size_t>();
            const auto& tex = g.doc.at("textures").at(tex_index);
            if (tex.contains("source")) {
              const auto& img = g.doc.at("images").at(tex.at("source").get<std::size_t>());
              if (img.contains("bufferView") && img.value("mimeType", std::string{}) == "image/png") {
                const auto view = detail::buffer_view_bytes(g, img.at("bufferView").get<std::size_t>());
                mat.texture_png.assign(view.begin(), view.end());
              }
            }
          }
        }
        scene.materials.push_back(std::move(mat));
      }
    }

    const auto& nodes = g.doc.contains("nodes") ? g.doc.at("nodes") : nlohmann::json::array();
    // roots: the default scene's node list, or every node nobody lists as a child
    std::vector<std::size_t> roots;
    if (g.doc.contains("scenes") && !g.doc.at("scenes").empty()) {
      const std::size_t s = g.doc.value("scene", std::size_t{0});
      roots = g.doc.at("scenes").at(s).value("nodes", std::vector<std::size_t>{});
    } else {
      std::set<std::size_t> children;
      for (const auto& n : nodes)
        for (auto c : n.value("children", std::vector<std::size_t>{})) children.insert(c);
      for (std::size_t i = 0; i < nodes.size(); ++i)
        if (!children.count(i)) roots.push_back(i);
    }

    std::set<std::string> used;
    struct Pending {
      std::size_t index;
      bool has_parent;
      Similarity3 parent;
    };
    std::vector<Pending> stack;
    for (auto it = roots.rbegin(); it != roots.rend(); ++it) stack.push_back({*it, false, Similarity3{}});
    std::size_t visited = 0;
    while (!stack.empty()) {
      const Pending top = stack.back();
      const std::size_t index = top.index;
      stack.pop_back();
      if (index >= nodes.size()) throw Error(Errc::corrupt_file, "node index out of range");
      if (++visited > 4 * nodes.size() + 4) throw Error(Errc::corrupt_file, "node graph has a cycle");
      const auto& node = nodes[index];
      NodeTransform local = detail::read_node_transform(node);
      NodeTransform world = local;
      std::optional<Similarity3> world_sim;
      if (top.has_parent) {
        world_sim = top.parent.compose(local.to_similarity());
        world = NodeTransform::from_similarity(*world_sim);
      } else if (!local.is_identity()) {
        world_sim = local.to_similarity();
      }
      if (node.contains("mesh")) {
        SceneNode sn;
        sn.name = node.value("name", std::string{});
        if (sn.name.empty() || used.count(sn.name)) sn.name = "node_" + std::to_string(index);
        used.insert(sn.name);
        sn.mesh = detail::read_mesh(g, node.at("mesh").get<std::size_t>(), &sn.material);
        if (sn.material && *sn.material >= scene.materials.size())
          throw Error(Errc::corrupt_file, "primitive references a missing material");
        sn.transform = world;
        scene.nodes.push_back(std::move(sn));
      }
      const auto children = node.value("children", std::vector<std::size_t>{});
      for (auto it = children.rbegin(); it != children.rend(); ++it)
        stack.push_back({*it, true, world_sim ? *world_sim : Similarity3::identity()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::corrupt_file, std::string("glTF JSON: ") + e.what());
  }
  return scene;
}

// ---------------------------------------------------------------------------
// Structural validator

struct GlbValidation {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
};

/// Checks container layout, alignment, buffer/accessor bounds, index ranges,
/// POSITION bounds and embedded image signatures. Never throws.
inline GlbValidation validate_glb(std::span<const std::uint8_t> bytes) {
  GlbValidation v;
  auto issue = [&](std::string s) { v.issues.push_back(std::move(s)); };
  if (bytes.size() < 20) {
    issue("file shorter than a GLB header");
    return v;
  }
  if (detail::get_u32(bytes.data()) != kGlbMagic) issue("bad magic");
  if (detail::get_u32(bytes.data() + 4) != 2) issue("version is not 2");
  if (detail::get_u32(bytes.data() + 8) != bytes.size()) issue("declared length does not equal file size");
  if (bytes.size() % 4 != 0) issue("file length is not a multiple of 4");
  const std::uint32_t json_len = detail::get_u32(bytes.data() + 12);
  if (detail::get_u32(bytes.data() + 16) != kGlbChunkJson) issue("first chunk is not JSON");
  if (json_len % 4 != 0) issue("JSON chunk length is not a multiple of 4");
  if (!v.ok()) return v;
  if (20 + std::size_t{json_len} > bytes.size()) {
    issue("JSON chunk overruns file");
    return v;
  }
  const std::size_t bin_hdr = 20 + json_len;
  if (bin_hdr < bytes.size()) {
    if (bytes.size() - bin_hdr < 8) {
      issue("truncated BIN chunk header");
      return v;
    }
    const std::uint32_t bin_len = detail::get_u32(bytes.data() + bin_hdr);
    if (detail::get_u32(bytes.data() + bin_hdr + 4) != kGlbChunkBin) issue("second chunk is not BIN");
    if (bin_len % 4 != 0) issue("BIN chunk length is not a multiple of 4");
    if (bin_hdr + 8 + std::size_t{bin_len} > bytes.size()) issue("BIN chunk overruns file");
  }
  if (!v.ok()) return v;

  detail::GlbChunks g;
  try {
    g = detail::split_glb(bytes);
  } catch (const Error& e) {
    issue(e.what());
    return v;
  }
  const auto& doc = g.doc;
  try {
    if (!doc.contains("asset") || doc.at("asset").value("version", std::string{}) != "2.0")
      issue("asset.version is not \"2.0\"");
    if (doc.contains("buffers")) {
      const auto& bufs = doc.at("buffers");
      if (bufs.size() != 1) issue("expected exactly one buffer");
      else if (bufs[0].contains("uri")) issue("buffer 0 must be the embedded BIN chunk");
      else if (bufs[0].at("byteLength").get<std::size_t>() > g.bin.size()) issue("buffer byteLength exceeds BIN chunk");
    }
    const std::size_t nviews = doc.contains("bufferViews") ? doc.at("bufferViews").size() : 0;
    for (std::size_t i = 0; i < nviews; ++i) {
      try {
        (void)detail::buffer_view_bytes(g, i);
      } catch (const Error& e) {
        issue("bufferView " + std::to_string(i) + ": " + e.what());
      }
    }
    const std::size_t nacc = doc.contains("accessors") ? doc.at("accessors").size() : 0;
    for (std::size_t i = 0; i < nacc; ++i) {
      try {
        const auto a = detail::accessor_view(g, i);
        const auto off = static_cast<std::size_t>(a.data - g.bin.data());
        if (off % static_cast<std::size_t>(detail::component_size(a.component_type)) != 0)
          issue("accessor " + std::to_string(i) + " is misaligned");
      } catch (const Error& e) {
        issue("accessor " + std::to_string(i) + ": " + e.what());
      }
    }
    if (!v.ok()) return v;

    if (doc.contains("meshes")) {
      for (std::size_t m = 0; m < doc.at("meshes").size(); ++m) {
        for (const auto& prim : doc.at("meshes")[m].at("primitives")) {
          const auto& attr = prim.at("attributes");
          if (!attr.contains("POSITION")) {
            issue("mesh " + std::to_string(m) + " primitive without POSITION");
            continue;
          }
          const auto pos_index = attr.at("POSITION").get<std::size_t>();
          const auto& pos_acc = doc.at("accessors").at(pos_index);
          if (pos_acc.at("componentType").get<int>() != gltf::kFloat || pos_acc.at("type") != "VEC3") {
            issue("mesh " + std::to_string(m) + " POSITION is not float VEC3");
            continue;
          }
          if (!pos_acc.contains("min") || !pos_acc.contains("max")) issue("POSITION accessor lacks min/max");
          const auto pos = detail::read_float_vectors<3>(g, pos_index);
          if (pos_acc.contains("min") && pos_acc.contains("max")) {
            const auto lo = pos_acc.at("min").get<std::vector<double>>();
            const auto hi = pos_acc.at("max").get<std::vector<double>>();
            bool inside = lo.size() == 3 && hi.size() == 3;
            for (const auto& p : pos)
              for (int c = 0; c < 3 && inside; ++c) inside = p[c] >= lo[c] && p[c] <= hi[c];
            if (!inside) issue("mesh " + std::to_string(m) + " POSITION outside declared min/max");
          }
          for (const char* name : {"NORMAL", "TEXCOORD_0"}) {
            if (!attr.contains(name)) continue;
            const auto& acc = doc.at("accessors").at(attr.at(name).get<std::size_t>());
            if (acc.at("count").get<std::size_t>() != pos.size())
              issue(std::string(name) + " count differs from POSITION count");
          }
          if (prim.contains("indices")) {
            const auto idx = detail::read_indices(g, prim.at("indices").get<std::size_t>());
            if (idx.size() % 3 != 0 && prim.value("mode", 4) == 4) issue("triangle index count not a multiple of 3");
            for (auto i : idx)
              if (i >= pos.size()) {
                issue("mesh " + std::to_string(m) + " index out of range");
                break;
              }
          }
        }
      }
    }
    if (doc.contains("images")) {
      for (std::size_t i = 0; i < doc.at("images").size(); ++i) {
        const auto& img = doc.at("images")[i];
        if (!img.contains("bufferView")) continue;
        const auto view = detail::buffer_view_bytes(g, img.at("bufferView").get<std::size_t>());
        if (img.value("mimeType", std::string{}) == "image/png" && !has_png_signature(view))
          issue("image " + std::to_string(i) + " is not a PNG");
      }
    }
    if (doc.contains("nodes")) {
      const std::size_t nmesh = doc.contains("meshes") ? doc.at("meshes").size() : 0;
      for (std::size_t i = 0; i < doc.at("nodes").size(); ++i) {
        const auto& n = doc.at("nodes")[i];
        if (n.contains("mesh") && n.at("mesh").get<std::size_t>() >= nmesh)
          issue("node " + std::to_string(i) + " references a missing mesh");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    issue(std::string("glTF JSON structure: ") + e.what());
  } catch (const Error& e) {
    issue(e.what());
  }
  return v;
}

// ---------------------------------------------------------------------------

/// Head and eyewear as two nodes; the placement rides on the eyewear node,
/// geometry is left untouched.
inline Scene merge_scene(const Mesh& head, const Material& head_material, const Mesh& eyewear,
                         const Material& eyewear_material, const Similarity3& placement) {
  Scene s;
  s.materials = {head_material, eyewear_material};
  s.nodes.push_back({"head", head, NodeTransform{}, 0});
  s.nodes.push_back({"eyewear", eyewear, NodeTransform::from_similarity(placement), 1});
  validate_scene(s);
  return s;
}

}  // namespace tryon
