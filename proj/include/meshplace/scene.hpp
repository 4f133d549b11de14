#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "meshplace/geometry.hpp"
#include "meshplace/image.hpp"
#include "meshplace/mesh.hpp"
#include "meshplace/metrics.hpp"
#include "meshplace/primitives.hpp"

namespace meshplace {

enum class CorruptionMode {
  kZero,        // object depth set to 0
  kNoise,       // Gaussian noise plus Bernoulli dropout
  kRefraction,  // support-plane depth seen through the object, plus noise
};

std::string_view to_string(CorruptionMode mode);
CorruptionMode parse_corruption_mode(std::string_view text);

struct CorruptionConfig {
  CorruptionMode mode = CorruptionMode::kRefraction;
  double sigma_m = 0.002;
  double dropout = 0.0;  // probability per mask pixel, noise mode only

  void validate() const;
};

struct SceneConfig {
  int width = 640;
  int height = 480;
  double focal_px = 615.0;
  double standoff_m = 0.6;  // camera to object center
  double min_elevation_deg = 25.0;
  double max_elevation_deg = 60.0;
  double min_scale_m = 0.12;  // canonical max extent maps to this many meters
  double max_scale_m = 0.24;
  double position_jitter_m = 0.05;
  double aim_jitter_m = 0.02;
  double plane_size_m = 2.0;
  double checker_m = 0.04;
  int frustum_margin_px = 12;
  int max_attempts = 25;
  /// Adds an opaque box without depth returns in front of the object's
  /// contact edge. Used for error-path tests.
  bool distractor = false;
  CorruptionConfig corruption;

  void validate() const;
};

struct ScenePackage {
  std::string scene_id;
  std::uint64_t seed = 0;
  GrayImage rgb;
  DepthImage depth_observed;
  DepthImage depth_clean;
  MaskImage mask;
  CameraModel camera;
  TriangleMesh mesh;  // canonical
  bool has_ground_truth = true;
  Mat3 gt_rotation = Mat3::Identity();
  Vec3 gt_translation = Vec3::Zero();
  double gt_scale = 1.0;
  SymmetryGroup symmetry;

  ScaledPlacement gt_placement() const;
};

/// Places `mesh` upright on the z = 0 plane with random yaw, position and
/// scale, aims a camera at it and renders clean and corrupted depth.
/// Throws kFrustum when no sampled pose keeps the object inside the frame.
ScenePackage make_scene(const TriangleMesh& mesh, const SymmetryGroup& symmetry, const SceneConfig& config,
                        std::uint64_t seed, std::string scene_id);

/// Random primitive kind and parameters (from `seed`), then make_scene.
ScenePackage make_random_scene(const SceneConfig& config, std::uint64_t seed, std::string scene_id);
ScenePackage make_primitive_scene(PrimitiveKind kind, const SceneConfig& config, std::uint64_t seed,
                                  std::string scene_id);

/// Checkerboard square of side `size` centered at (cx, cy) on z = 0.
TriangleMesh make_checker_plane(double cx, double cy, double size, double checker);

}  // namespace meshplace
