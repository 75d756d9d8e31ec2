#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_support.hpp"
#include "tryon/metrics.hpp"

using namespace tryon;
using namespace tryon::testing;

namespace {

Mesh random_soup(std::mt19937_64& g, int n_tri) {
  Mesh m;
  for (int i = 0; i < n_tri; ++i) {
    const Vec3 c = random_vec(g, -50, 50);
    for (int k = 0; k < 3; ++k) m.vertices.push_back(c + random_vec(g, -8, 8));
    const auto b = static_cast<std::uint32_t>(3 * i);
    m.triangles.push_back({b, b + 1, b + 2});
  }
  return m;
}

}  // namespace

TEST(ScanToMesh, MatchesAllTriangleOracle) {
  std::mt19937_64 g(11);
  const Mesh m = random_soup(g, 500);
  std::vector<Vec3> pts;
  for (int i = 0; i < 200; ++i) pts.push_back(random_vec(g, -70, 70));
  const auto d = scan_to_mesh_distances(pts, m);
  ASSERT_EQ(d.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(d[i], brute_force_distance(pts[i], m), 1e-9);
}

TEST(ScanToMesh, PointsOnTheSurfaceAreAtZero) {
  const auto& a = toy_head();
  const Mesh m = decode(a, ParamVector::zeros(a));
  const auto d = scan_to_mesh_distances(embed_landmarks(a, m), m);
  for (double x : d) EXPECT_LT(x, 1e-9);
}

TEST(ScanToMesh, InvariantUnderRigidMotion) {
  std::mt19937_64 g(12);
  const Mesh m = random_soup(g, 100);
  std::vector<Vec3> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(random_vec(g, -60, 60));
  const Similarity3 t{1.0, rodrigues(random_vec(g, -3, 3)), random_vec(g, -100, 100)};
  const auto d0 = scan_to_mesh_distances(pts, m);
  const auto d1 = scan_to_mesh_distances(apply_transform(pts, t), transformed(m, t));
  for (std::size_t i = 0; i < d0.size(); ++i) EXPECT_NEAR(d0[i], d1[i], 1e-9);
}

TEST(ScanToMesh, RejectsEmptyInput) {
  std::mt19937_64 g(13);
  const Mesh m = random_soup(g, 3);
  EXPECT_EQ(error_code_of([&] { scan_to_mesh_distances({}, m); }), Errc::invalid_argument);
  std::vector<Vec3> one{Vec3::Zero()};
  EXPECT_EQ(error_code_of([&] { scan_to_mesh_distances(one, Mesh{}); }), Errc::invalid_argument);
}

TEST(Summarize, KnownValues) {
  const std::vector<double> d{1, 2, 3};
  const auto s = summarize(d);
  EXPECT_EQ(s.median_mm, 2.0);
  EXPECT_EQ(s.mean_mm, 2.0);
  EXPECT_NEAR(s.std_mm, 0.8165, 1e-4);
  EXPECT_EQ(s.count, 3u);

  const std::vector<double> single{5};
  const auto one = summarize(single);
  EXPECT_EQ(one.median_mm, 5.0);
  EXPECT_EQ(one.mean_mm, 5.0);
  EXPECT_EQ(one.std_mm, 0.0);

  const std::vector<double> even{4, 1, 3, 2};
  EXPECT_EQ(summarize(even).median_mm, 2.5);
  EXPECT_EQ(error_code_of([] { summarize({}); }), Errc::invalid_argument);
}

TEST(Summarize, ScalesLinearly) {
  std::mt19937_64 g(14);
  std::uniform_real_distribution<double> u(0, 10);
  std::vector<double> d(101), k(101);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = u(g);
    k[i] = 3.0 * d[i];
  }
  const auto a = summarize(d), b = summarize(k);
  EXPECT_NEAR(b.median_mm, 3.0 * a.median_mm, 1e-12);
  EXPECT_NEAR(b.mean_mm, 3.0 * a.mean_mm, 1e-12);
  EXPECT_NEAR(b.std_mm, 3.0 * a.std_mm, 1e-12);
}

TEST(Curve, MatchesCountingOracle) {
  std::mt19937_64 g(15);
  std::uniform_real_distribution<double> u(0, 12);
  std::vector<double> d(300);
  for (auto& x : d) x = u(g);
  d.push_back(5.0);  // exactly on a threshold
  const auto c = cumulative_curve(d, 10.0, 11);
  ASSERT_EQ(c.thresholds_mm.size(), 11u);
  for (std::size_t i = 0; i < c.thresholds_mm.size(); ++i) {
    EXPECT_EQ(c.thresholds_mm[i], 10.0 * static_cast<double>(i) / 10.0);
    std::size_t count = 0;
    for (double x : d) count += (x <= c.thresholds_mm[i]) ? 1 : 0;
    EXPECT_EQ(c.fraction_below[i], static_cast<double>(count) / static_cast<double>(d.size()));
  }
  EXPECT_EQ(error_code_of([&] { cumulative_curve(d, 10.0, 1); }), Errc::invalid_argument);
  EXPECT_EQ(error_code_of([&] { cumulative_curve(d, 0.0, 5); }), Errc::invalid_argument);
}

TEST(Curve, Csv) {
  const std::vector<double> d{0.5, 1.5};
  EXPECT_EQ(curve_to_csv(cumulative_curve(d, 2.0, 3)),
            "threshold_mm,fraction\n0.000000,0.000000\n1.000000,0.500000\n2.000000,1.000000\n");
}

TEST(Report, RendersTableRow) {
  const ErrorSummary lq{1.48, 1.91, 1.66, 10};
  const std::string out = render_report({{"ours", lq, std::nullopt}});
  EXPECT_NE(out.find("Method"), std::string::npos);
  const auto row = out.substr(out.find("ours"));
  EXPECT_EQ(row, "ours    1.48   -       1.91   -       1.66   -\n");
}

TEST(Alignment, RecoversRigidMotion) {
  std::mt19937_64 g(16);
  std::vector<Vec3> gt;
  for (int i = 0; i < 7; ++i) gt.push_back(random_vec(g, -40, 40));
  const Similarity3 t{1.0, rodrigues(random_vec(g, -2, 2)), random_vec(g, -20, 20)};
  const auto pred = apply_transform(gt, t.inverse());
  const Similarity3 fit = align_rigid_landmarks(pred, gt);
  EXPECT_EQ(fit.scale, 1.0);
  const auto back = apply_transform(pred, fit);
  for (std::size_t i = 0; i < gt.size(); ++i) EXPECT_LT((back[i] - gt[i]).norm(), 1e-9);
}

TEST(Alignment, NeverReflects) {
  std::mt19937_64 g(17);
  std::vector<Vec3> gt, mirrored;
  for (int i = 0; i < 10; ++i) {
    gt.push_back(random_vec(g, -40, 40));
    mirrored.push_back(Vec3(-gt.back().x(), gt.back().y(), gt.back().z()));
  }
  const Similarity3 fit = align_rigid_landmarks(mirrored, gt, true);
  EXPECT_NEAR(fit.rotation.determinant(), 1.0, 1e-12);
  EXPECT_GT(fit.scale, 0.0);
}
