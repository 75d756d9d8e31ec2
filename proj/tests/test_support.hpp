#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include "tryon/head_model.hpp"
#include "tryon/toy_model.hpp"

namespace tryon::testing {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(TRYON_FIXTURE_DIR) / name; }

// Toy head built once per process; float64 values, not round-tripped through the container.
inline const HeadModelAsset& toy_head() {
  static const HeadModelAsset asset = toy::make_head();
  return asset;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::mt19937_64 gen{std::random_device{}()};
  auto p = std::filesystem::temp_directory_path() / ("tryon-" + tag + "-" + std::to_string(gen() % 1000000000));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline Vec3 random_vec(std::mt19937_64& g, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return Vec3(u(g), u(g), u(g));
}

}  // namespace tryon::testing

namespace tryon::testing {

template <class F>
std::optional<Errc> error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace tryon::testing
