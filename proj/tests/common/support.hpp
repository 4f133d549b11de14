#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "meshplace/geometry.hpp"
#include "meshplace/image.hpp"
#include "meshplace/mesh.hpp"

namespace test {

using meshplace::CameraModel;
using meshplace::GrayImage;
using meshplace::Mat3;
using meshplace::MaskImage;
using meshplace::RigidTransform;
using meshplace::Vec3;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Vec3 random_vec(std::mt19937_64& rng, double range) {
  return {uniform(rng, -range, range), uniform(rng, -range, range), uniform(rng, -range, range)};
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline RigidTransform random_transform(std::mt19937_64& rng, double range = 2.0) {
  return RigidTransform::from_rotation_translation(random_rotation(rng), random_vec(rng, range));
}

inline CameraModel random_camera(std::mt19937_64& rng) {
  const int w = uniform_int(rng, 32, 800);
  const int h = uniform_int(rng, 32, 600);
  return CameraModel(uniform(rng, 50, 1000), uniform(rng, 50, 1000), uniform(rng, 0, w - 1), uniform(rng, 0, h - 1),
                     w, h, random_transform(rng));
}

inline GrayImage random_gray(std::mt19937_64& rng, int w, int h) {
  GrayImage img(w, h);
  for (auto& v : img.pixels()) v = static_cast<float>(uniform(rng, 0, 1));
  return img;
}

inline MaskImage rect_mask(int w, int h, int x0, int y0, int rw, int rh) {
  MaskImage m(w, h);
  for (int y = y0; y < y0 + rh; ++y) {
    for (int x = x0; x < x0 + rw; ++x) m(x, y) = 1;
  }
  return m;
}

inline meshplace::TriangleMesh unit_cube() {
  meshplace::TriangleMesh m;
  for (int i = 0; i < 8; ++i) m.vertices.emplace_back(i & 1 ? 0.5 : -0.5, i & 2 ? 0.5 : -0.5, i & 4 ? 0.5 : -0.5);
  m.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                 {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("meshplace_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace test
