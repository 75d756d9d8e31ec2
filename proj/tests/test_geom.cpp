#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_support.hpp"
#include "tryon/geom.hpp"

using namespace tryon;
using namespace tryon::testing;

TEST(Rodrigues, ZeroIsIdentity) { EXPECT_TRUE(rodrigues(Vec3::Zero()).isApprox(Rot3::Identity(), 0.0)); }

TEST(Rodrigues, MatchesQuaternionExponential) {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> angle(0.0, 3.1);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v = random_vec(g).normalized() * angle(g);
    EXPECT_LT((rodrigues(v) - quaternion_exp_oracle(v)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Rodrigues, SmallAngleSeriesIsContinuous) {
  const Vec3 axis = Vec3(1, 2, -0.5).normalized();
  for (double theta : {1e-12, 1e-8, 9.9e-5, 1e-4, 1.01e-4, 1e-3}) {
    EXPECT_LT((rodrigues(theta * axis) - quaternion_exp_oracle(theta * axis)).cwiseAbs().maxCoeff(), 1e-15)
        << theta;
  }
}

TEST(Rodrigues, OrthonormalWithUnitDeterminant) {
  std::mt19937_64 g(2);
  for (int i = 0; i < 200; ++i) {
    const Rot3 r = rodrigues(random_vec(g, -4, 4));
    EXPECT_LT((r.transpose() * r - Rot3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  }
}

TEST(Rodrigues, RejectsNonFinite) {
  EXPECT_THROW(rodrigues(Vec3(std::nan(""), 0, 0)), Error);
  try {
    rodrigues(Vec3(INFINITY, 0, 0));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_argument);
  }
}

TEST(Rodrigues, RotvecRoundTrip) {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> angle(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = random_vec(g).normalized() * angle(g);
    EXPECT_LT((rotvec_from_matrix(rodrigues(v)) - v).norm(), 1e-10);
  }
}

TEST(Umeyama, ConstructThenRecover) {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> scale(0.2, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const Similarity3 t{scale(g), rodrigues(random_vec(g, -3, 3)), random_vec(g, -100, 100)};
    std::vector<Vec3> src;
    for (int k = 0; k < 3 + i % 20; ++k) src.push_back(random_vec(g, -50, 50));
    const auto dst = apply_transform(src, t);
    const Similarity3 r = umeyama(src, dst, true);
    EXPECT_NEAR(r.scale, t.scale, 1e-9 * t.scale);
    EXPECT_LT((r.rotation - t.rotation).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((r.translation - t.translation).norm(), 1e-9 * (1.0 + t.translation.norm()));
  }
}

TEST(Umeyama, NoisyDataMatchesHornOracle) {
  std::mt19937_64 g(5);
  std::normal_distribution<double> noise(0.0, 0.5);
  for (int i = 0; i < 200; ++i) {
    const Similarity3 t{1.7, rodrigues(random_vec(g, -2, 2)), random_vec(g, -10, 10)};
    std::vector<Vec3> src, dst;
    for (int k = 0; k < 30; ++k) {
      src.push_back(random_vec(g, -20, 20));
      dst.push_back(t(src.back()) + Vec3(noise(g), noise(g), noise(g)));
    }
    const Similarity3 r = umeyama(src, dst, true);
    const Similarity3 h = horn_oracle(src, dst);
    EXPECT_LT((r.rotation - h.rotation).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(r.scale, h.scale, 1e-9);
    EXPECT_LT((r.translation - h.translation).norm(), 1e-8);
  }
}

TEST(Umeyama, RigidModeKeepsUnitScale) {
  std::mt19937_64 g(6);
  const Similarity3 t{1.0, rodrigues(Vec3(0.3, -0.2, 1.0)), Vec3(1, 2, 3)};
  std::vector<Vec3> src;
  for (int k = 0; k < 10; ++k) src.push_back(random_vec(g, -5, 5));
  const auto r = umeyama(src, apply_transform(src, t), false);
  EXPECT_EQ(r.scale, 1.0);
  EXPECT_LT((r.rotation - t.rotation).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Umeyama, ReflectedInputStillProperRotation) {
  std::mt19937_64 g(7);
  std::vector<Vec3> src, dst;
  for (int k = 0; k < 12; ++k) {
    src.push_back(random_vec(g, -5, 5));
    dst.push_back(Vec3(-src.back().x(), src.back().y(), src.back().z()));
  }
  const auto r = umeyama(src, dst, true);
  EXPECT_NEAR(r.rotation.determinant(), 1.0, 1e-12);
}

TEST(Umeyama, PlanarPointsAreNotDegenerate) {
  const std::vector<Vec3> src{{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {1, 1, 0}};
  const Similarity3 t{2.0, rodrigues(Vec3(0, 0, 0.7)), Vec3(3, -1, 0)};
  const auto r = umeyama(src, apply_transform(src, t), true);
  EXPECT_LT((r.rotation - t.rotation).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(r.scale, 2.0, 1e-12);
}

TEST(Umeyama, Errors) {
  const std::vector<Vec3> two{{0, 0, 0}, {1, 0, 0}};
  const std::vector<Vec3> line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
  const std::vector<Vec3> three{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::io_error;
  };
  EXPECT_EQ(code_of([&] { umeyama(two, two, true); }), Errc::degenerate_input);
  EXPECT_EQ(code_of([&] { umeyama(line, line, true); }), Errc::degenerate_input);
  EXPECT_EQ(code_of([&] { umeyama(three, two, true); }), Errc::invalid_argument);
}

TEST(Similarity, ComposeAndInverse) {
  std::mt19937_64 g(8);
  const Similarity3 a{1.5, rodrigues(Vec3(0.1, 0.2, 0.3)), Vec3(1, 2, 3)};
  const Similarity3 b{0.5, rodrigues(Vec3(-1, 0.4, 0)), Vec3(-4, 0, 2)};
  for (int i = 0; i < 20; ++i) {
    const Vec3 p = random_vec(g, -10, 10);
    EXPECT_LT((a.compose(b)(p) - a(b(p))).norm(), 1e-12);
    EXPECT_LT((a.inverse()(a(p)) - p).norm(), 1e-12);
  }
}

TEST(ClosestPoint, MatchesIndependentOracle) {
  std::mt19937_64 g(9);
  for (int i = 0; i < 5000; ++i) {
    const Vec3 a = random_vec(g), b = random_vec(g), c = random_vec(g);
    const Vec3 p = random_vec(g, -2, 2);
    const auto got = closest_point_on_triangle(p, a, b, c);
    const auto want = closest_point_oracle(p, a, b, c);
    EXPECT_NEAR(std::sqrt(got.squared_distance), std::sqrt(want.squared_distance), 1e-12);
    EXPECT_LT((got.point - want.point).norm(), 1e-9);
    const Vec3 from_bary = got.barycentric[0] * a + got.barycentric[1] * b + got.barycentric[2] * c;
    EXPECT_LT((from_bary - got.point).norm(), 1e-12);
    EXPECT_NEAR(got.barycentric.sum(), 1.0, 1e-12);
    EXPECT_GE(got.barycentric.minCoeff(), -1e-12);
  }
}

TEST(ClosestPoint, DegenerateTriangleFallsBackToEdges) {
  const Vec3 a(0, 0, 0), b(2, 0, 0), c(1, 0, 0);
  const auto r = closest_point_on_triangle(Vec3(1.5, 1, 0), a, b, c);
  EXPECT_NEAR(r.squared_distance, 1.0, 1e-15);
  EXPECT_LT((r.point - Vec3(1.5, 0, 0)).norm(), 1e-15);
}

TEST(ClosestPoint, HeightAboveInterior) {
  const auto r = closest_point_on_triangle(Vec3(0.2, 0.2, 3.25), Vec3(0, 0, 0), Vec3(10, 0, 0), Vec3(0, 10, 0));
  EXPECT_DOUBLE_EQ(std::sqrt(r.squared_distance), 3.25);
}
