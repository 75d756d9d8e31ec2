#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_support.hpp"
#include "tryon/head_model.hpp"

using namespace tryon;
using tryon::testing::error_code_of;
using tryon::testing::fixture;
using tryon::testing::random_vec;
using tryon::testing::toy_head;

namespace {

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

Vec3 from_json(const nlohmann::json& j) { return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>()); }

ParamVector params_from_reference(const nlohmann::json& j) {
  ParamVector p;
  const auto beta = j.at("beta").get<std::vector<double>>();
  const auto psi = j.at("psi").get<std::vector<double>>();
  p.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
  p.psi = Eigen::Map<const Eigen::VectorXd>(psi.data(), psi.size());
  p.jaw_pose = from_json(j.at("jaw_pose"));
  p.global_pose = from_json(j.at("global_pose"));
  p.global_translation = from_json(j.at("global_translation"));
  return p;
}

// Rotation by unit quaternion q v q*, no matrices.
Vec3 rotate_quat(const Vec3& rotvec, const Vec3& v) {
  const double theta = rotvec.norm();
  if (theta == 0.0) return v;
  const Eigen::Quaterniond q(Eigen::AngleAxisd(theta, rotvec / theta));
  return q * v;
}

ParamVector random_params(const HeadModelAsset& a, std::mt19937_64& g) {
  ParamVector p = ParamVector::zeros(a);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& b : p.beta) b = n(g);
  for (auto& e : p.psi) e = 0.5 * n(g);
  p.jaw_pose = random_vec(g, -0.3, 0.3);
  p.global_pose = random_vec(g, -0.6, 0.6);
  p.global_translation = random_vec(g, -50, 50);
  return p;
}

std::pair<std::string, std::vector<std::uint8_t>> py_asset_bytes() {
  std::ifstream m(fixture("py_head.fma.json"));
  std::string manifest((std::istreambuf_iterator<char>(m)), {});
  return {manifest, detail::read_file_bytes(fixture("py_head.fma.bin"))};
}

}  // namespace

TEST(HeadAssetContainer, ExternalFixtureDecodesLikeNumpy) {
  const auto asset = load_asset(fixture("py_head.fma.json"));
  EXPECT_EQ(asset.num_vertices(), 120u);
  EXPECT_EQ(asset.n_shape(), 4);
  EXPECT_EQ(asset.n_expression(), 3);
  EXPECT_EQ(asset.vertex_groups.count("extra_group"), 1u);
  const auto ref = read_json(fixture("py_head.reference.json"));
  ASSERT_EQ(ref.at("cases").size(), 4u);
  for (const auto& c : ref.at("cases")) {
    const ParamVector p = params_from_reference(c.at("params"));
    const Mesh m = decode(asset, p);
    const auto& verts = c.at("vertices");
    ASSERT_EQ(verts.size(), m.vertices.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < verts.size(); ++i) worst = std::max(worst, (m.vertices[i] - from_json(verts[i])).norm());
    EXPECT_LT(worst, 1e-9);
    const auto lm = embed_landmarks(asset, m);
    for (std::size_t i = 0; i < kNumLandmarks; ++i) EXPECT_LT((lm[i] - from_json(c.at("landmarks")[i])).norm(), 1e-9);
  }
}

TEST(HeadAssetContainer, UnitsAreConvertedToMillimeters) {
  auto [manifest, blob] = py_asset_bytes();
  const auto cm = parse_asset(manifest, blob);
  auto j = nlohmann::json::parse(manifest);
  j["units"] = "m";
  const auto m = parse_asset(j.dump(), blob);
  EXPECT_LT((m.template_vertices[7] - 100.0 * cm.template_vertices[7]).norm(), 1e-9);
  EXPECT_NEAR(m.shape_basis(5, 1), 100.0 * cm.shape_basis(5, 1), 1e-9);
  EXPECT_LT((m.jaw_joint - 100.0 * cm.jaw_joint).norm(), 1e-9);
  EXPECT_EQ(m.jaw_weights, cm.jaw_weights);
  j["units"] = "furlongs";
  EXPECT_EQ(error_code_of([&] { parse_asset(j.dump(), blob); }), Errc::invalid_asset);
}

TEST(HeadAssetContainer, CorruptionIsDetected) {
  auto [manifest, blob] = py_asset_bytes();
  const auto base = nlohmann::json::parse(manifest);

  EXPECT_EQ(error_code_of([&] { parse_asset("{not json", blob); }), Errc::corrupt_asset);

  auto misaligned = base;
  misaligned["tensors"]["uv"]["offset"] = misaligned["tensors"]["uv"]["offset"].get<int>() + 2;
  EXPECT_EQ(error_code_of([&] { parse_asset(misaligned.dump(), blob); }), Errc::corrupt_asset);

  const std::vector<std::uint8_t> truncated(blob.begin(), blob.end() - 8);
  EXPECT_EQ(error_code_of([&] { parse_asset(manifest, truncated); }), Errc::corrupt_asset);

  auto version = base;
  version["format_version"] = 2;
  EXPECT_EQ(error_code_of([&] { parse_asset(version.dump(), blob); }), Errc::invalid_asset);

  auto no_group = base;
  no_group["vertex_groups"].erase("nose_bridge");
  EXPECT_EQ(error_code_of([&] { parse_asset(no_group.dump(), blob); }), Errc::invalid_asset);

  auto short_lm = base;
  short_lm["landmark_embedding"].erase(short_lm["landmark_embedding"].size() - 1);
  EXPECT_EQ(error_code_of([&] { parse_asset(short_lm.dump(), blob); }), Errc::invalid_asset);

  auto bad_bary = base;
  bad_bary["landmark_embedding"][3]["barycentric"] = {0.5, 0.6, -0.1};
  EXPECT_EQ(error_code_of([&] { parse_asset(bad_bary.dump(), blob); }), Errc::invalid_asset);

  auto bad_dim = base;
  bad_dim["n_shape"] = 5;
  EXPECT_EQ(error_code_of([&] { parse_asset(bad_dim.dump(), blob); }), Errc::invalid_asset);

  auto bad_group_index = base;
  bad_group_index["vertex_groups"]["left_eye"] = {1000};
  EXPECT_EQ(error_code_of([&] { parse_asset(bad_group_index.dump(), blob); }), Errc::invalid_asset);

  EXPECT_EQ(error_code_of([&] { load_asset(fixture("does-not-exist.fma.json")); }), Errc::io_error);
}

TEST(HeadAssetContainer, SaveLoadRoundTripAtFloat32Precision) {
  const auto& a = toy_head();
  const auto dir = tryon::testing::temp_dir("asset");
  save_asset(a, dir / "toy.fma.json");
  const auto b = load_asset(dir / "toy.fma.json");
  ASSERT_EQ(a.num_vertices(), b.num_vertices());
  EXPECT_EQ(a.triangles, b.triangles);
  for (std::size_t i = 0; i < a.num_vertices(); ++i)
    EXPECT_LT((a.template_vertices[i] - b.template_vertices[i]).norm(), 1e-4);
  EXPECT_LT((a.shape_basis - b.shape_basis).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_EQ(a.vertex_groups, b.vertex_groups);
  // once float32-representable, a second round trip is exact
  save_asset(b, dir / "again.fma.json");
  const auto c = load_asset(dir / "again.fma.json");
  EXPECT_EQ(serialize_asset(b), serialize_asset(c));
  std::filesystem::remove_all(dir);
}

TEST(HeadDecode, ZeroParamsGiveTemplate) {
  const auto& a = toy_head();
  const Mesh m = decode(a, ParamVector::zeros(a));
  for (std::size_t i = 0; i < a.num_vertices(); ++i) EXPECT_LT((m.vertices[i] - a.template_vertices[i]).norm(), 1e-12);
  EXPECT_EQ(m.triangles, a.triangles);
  EXPECT_EQ(m.uv.size(), a.uv.size());
}

TEST(HeadDecode, BlendshapesAreLinearWithoutPose) {
  const auto& a = toy_head();
  std::mt19937_64 g(21);
  for (int trial = 0; trial < 5; ++trial) {
    ParamVector p1 = random_params(a, g), p2 = random_params(a, g);
    for (auto* p : {&p1, &p2}) p->jaw_pose = p->global_pose = p->global_translation = Vec3::Zero();
    ParamVector sum = p1;
    sum.beta += p2.beta;
    sum.psi += p2.psi;
    const auto m1 = decode(a, p1), m2 = decode(a, p2), ms = decode(a, sum);
    for (std::size_t i = 0; i < a.num_vertices(); ++i) {
      const Vec3 lin = m1.vertices[i] + m2.vertices[i] - a.template_vertices[i];
      EXPECT_LT((ms.vertices[i] - lin).norm(), 1e-9);
    }
  }
}

TEST(HeadDecode, MatchesPerVertexSkinningOracle) {
  const auto& a = toy_head();
  std::mt19937_64 g(22);
  for (int trial = 0; trial < 10; ++trial) {
    const ParamVector p = random_params(a, g);
    const Mesh m = decode(a, p);
    for (std::size_t i = 0; i < a.num_vertices(); ++i) {
      Vec3 v = a.template_vertices[i];
      for (int c = 0; c < 3; ++c) {
        for (int k = 0; k < a.n_shape(); ++k) v[c] += a.shape_basis(3 * i + c, k) * p.beta[k];
        for (int k = 0; k < a.n_expression(); ++k) v[c] += a.expression_basis(3 * i + c, k) * p.psi[k];
      }
      const double w = a.jaw_weights[i];
      const Vec3 jawed = w * (rotate_quat(p.jaw_pose, v - a.jaw_joint) + a.jaw_joint) + (1.0 - w) * v;
      const Vec3 want = rotate_quat(p.global_pose, jawed) + p.global_translation;
      EXPECT_LT((m.vertices[i] - want).norm(), 1e-9) << "vertex " << i;
    }
  }
}

TEST(HeadDecode, JawOnlyMovesWeightedVertices) {
  const auto& a = toy_head();
  ParamVector p = ParamVector::zeros(a);
  p.jaw_pose = Vec3(0.3, 0.0, 0.0);
  const Mesh m = decode(a, p);
  int moved = 0;
  for (std::size_t i = 0; i < a.num_vertices(); ++i) {
    if (a.jaw_weights[i] == 0.0) EXPECT_EQ(m.vertices[i], a.template_vertices[i]);
    else moved += (m.vertices[i] - a.template_vertices[i]).norm() > 1e-6;
  }
  EXPECT_GT(moved, 10);
}

TEST(HeadDecode, SparseDecodeMatchesFullDecode) {
  const auto& a = toy_head();
  std::mt19937_64 g(23);
  const ParamVector p = random_params(a, g);
  const Mesh m = decode(a, p);
  const std::vector<std::uint32_t> idx{0, 17, 250, 499, 3};
  const auto sparse = decode_vertices(a, p, idx);
  for (std::size_t k = 0; k < idx.size(); ++k) EXPECT_EQ(sparse[k], m.vertices[idx[k]]);
  const auto support = landmark_support(a);
  const auto lm_sparse = landmarks_from_support(a, support, decode_vertices(a, p, support.vertices));
  const auto lm_full = embed_landmarks(a, m);
  for (std::size_t i = 0; i < kNumLandmarks; ++i) EXPECT_LT((lm_sparse[i] - lm_full[i]).norm(), 1e-12);
}

TEST(HeadDecode, DimensionErrors) {
  const auto& a = toy_head();
  ParamVector p = ParamVector::zeros(a);
  p.beta.resize(3);
  EXPECT_EQ(error_code_of([&] { decode(a, p); }), Errc::invalid_argument);
  p = ParamVector::zeros(a);
  p.jaw_pose.x() = std::nan("");
  EXPECT_EQ(error_code_of([&] { decode(a, p); }), Errc::invalid_argument);
  Mesh other;
  other.vertices = {Vec3::Zero()};
  other.triangles = {{0, 0, 0}};
  EXPECT_EQ(error_code_of([&] { embed_landmarks(a, other); }), Errc::invalid_argument);
}

TEST(HeadDecode, LandmarksAreRigidlyEquivariant) {
  const auto& a = toy_head();
  std::mt19937_64 g(24);
  ParamVector p = random_params(a, g);
  p.global_pose = p.global_translation = Vec3::Zero();
  const auto base = embed_landmarks(a, decode(a, p));
  const Vec3 r = random_vec(g, -1, 1), t = random_vec(g, -30, 30);
  p.global_pose = r;
  p.global_translation = t;
  const auto moved = embed_landmarks(a, decode(a, p));
  for (std::size_t i = 0; i < kNumLandmarks; ++i) EXPECT_LT((moved[i] - (rodrigues(r) * base[i] + t)).norm(), 1e-9);
}

TEST(ToyHead, StructuralContract) {
  const auto& a = toy_head();
  EXPECT_NO_THROW(validate_asset(a));
  EXPECT_EQ(a.landmarks.size(), kNumLandmarks);
  const auto [left, right] = eye_centers(a, decode(a, ParamVector::zeros(a)));
  EXPECT_LT(left.x(), 0.0);
  EXPECT_GT(right.x(), 0.0);
  EXPECT_NEAR(left.x(), -right.x(), 1e-9);
  EXPECT_NEAR(left.y(), right.y(), 1e-9);
  // two heads from the same seed are identical
  const auto b = toy::make_head();
  EXPECT_EQ(serialize_asset(a), serialize_asset(b));
}
