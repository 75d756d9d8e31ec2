#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "tryon/displacement.hpp"
#include "tryon/toy_model.hpp"

using namespace tryon;
using namespace tryon::testing;

TEST(Displacement, ConstantMapOnUnitSphere) {
  const Mesh sphere = toy::make_uv_sphere(1.0, 24, 48);
  for (double d : {-0.3, 0.05, 0.25}) {
    const Mesh out = apply_displacement(sphere, DisplacementMap::constant(d, 4, 3), 1.0);
    for (const auto& v : out.vertices) EXPECT_NEAR(v.norm(), 1.0 + d, 1e-6);
    EXPECT_EQ(out.triangles, sphere.triangles);
    EXPECT_EQ(out.uv, sphere.uv);
  }
}

TEST(Displacement, ZeroIsBitwiseIdentity) {
  const Mesh sphere = toy::make_uv_sphere(3.0, 8, 16);
  EXPECT_EQ(apply_displacement(sphere, DisplacementMap::constant(0.0, 2, 2), 1.0).vertices, sphere.vertices);
  EXPECT_EQ(apply_displacement(sphere, DisplacementMap::constant(0.7, 2, 2), 0.0).vertices, sphere.vertices);
}

TEST(Displacement, GainIsAdditive) {
  std::mt19937_64 g(21);
  std::uniform_real_distribution<double> u(-1, 1);
  DisplacementMap map = DisplacementMap::constant(0.0, 7, 5);
  for (auto& v : map.values) v = u(g);
  const Mesh sphere = toy::make_uv_sphere(10.0, 12, 24);
  const Mesh a = apply_displacement(sphere, map, 0.4);
  const Mesh b = apply_displacement(sphere, map, 0.6);
  const Mesh ab = apply_displacement(sphere, map, 1.0);
  for (std::size_t i = 0; i < sphere.vertices.size(); ++i) {
    const Vec3 sum = a.vertices[i] + b.vertices[i] - sphere.vertices[i];
    EXPECT_LT((sum - ab.vertices[i]).norm(), 1e-12);
  }
}

TEST(Displacement, SamplingConvention) {
  DisplacementMap m = DisplacementMap::constant(0.0, 2, 2);
  m.values = {0, 1, 2, 3};  // row 0 is the top of the image
  EXPECT_EQ(m.sample(Vec2(0.25, 0.25)), 0.0);
  EXPECT_EQ(m.sample(Vec2(0.75, 0.25)), 1.0);
  EXPECT_EQ(m.sample(Vec2(0.25, 0.75)), 2.0);
  EXPECT_EQ(m.sample(Vec2(0.5, 0.5)), 1.5);
  EXPECT_EQ(m.sample(Vec2(-3.0, 0.25)), 0.0);  // clamped
  EXPECT_EQ(m.sample(Vec2(0.75, 9.0)), 3.0);
}

TEST(Displacement, PngMapping) {
  for (int depth : {8, 16}) {
    GrayImage img;
    img.width = 3;
    img.height = 1;
    img.bit_depth = depth;
    const std::uint16_t top = depth == 16 ? 65535 : 255;
    img.samples = {0, static_cast<std::uint16_t>(depth == 16 ? 32768 : 128), top};
    const auto bytes = encode_png_gray(img);
    const GrayImage back = decode_png_gray(bytes);
    EXPECT_EQ(back.bit_depth, depth);
    EXPECT_EQ(back.samples, img.samples);
    const DisplacementMap m = displacement_from_png(bytes, 2.0);
    EXPECT_EQ(m.values[0], -2.0);
    EXPECT_EQ(m.values[2], 2.0);
    EXPECT_NEAR(m.values[1], -2.0 + 4.0 * img.samples[1] / top, 1e-12);
  }
  const std::vector<std::uint8_t> junk{1, 2, 3};
  EXPECT_TRUE(error_code_of([&] { displacement_from_png(junk, 1.0); }).has_value());
  EXPECT_EQ(error_code_of([] { displacement_from_png({}, -1.0); }), Errc::invalid_argument);
}

TEST(Displacement, Preconditions) {
  Mesh m = toy::make_uv_sphere(1.0, 4, 6);
  const auto map = DisplacementMap::constant(0.1);
  Mesh no_uv = m;
  no_uv.uv.clear();
  EXPECT_EQ(error_code_of([&] { apply_displacement(no_uv, map, 1.0); }), Errc::invalid_argument);
  Mesh no_n = m;
  no_n.normals.clear();
  EXPECT_EQ(error_code_of([&] { apply_displacement(no_n, map, 1.0); }), Errc::invalid_argument);
  EXPECT_EQ(error_code_of([&] { apply_displacement(m, map, std::nan("")); }), Errc::invalid_argument);
  DisplacementMap bad = map;
  bad.values.push_back(0.0);
  EXPECT_EQ(error_code_of([&] { apply_displacement(m, bad, 1.0); }), Errc::invalid_argument);
}
