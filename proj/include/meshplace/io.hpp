#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "meshplace/fusion.hpp"
#include "meshplace/keypoints.hpp"
#include "meshplace/scene.hpp"
#include "meshplace/view_matching.hpp"

namespace meshplace::io {

namespace fs = std::filesystem;

// ---- PNG ----

/// 8-bit gray from [0, 1] luminance (rounded, clamped).
void write_gray_png(const fs::path& path, const GrayImage& image);
/// Gray or RGB(A) PNG, 8 or 16 bit, as luminance in [0, 1].
GrayImage read_gray_png(const fs::path& path);

/// 0 / 255 mask PNG.
void write_mask_png(const fs::path& path, const MaskImage& mask);
/// Any nonzero sample becomes 1.
MaskImage read_mask_png(const fs::path& path);

/// 16-bit millimeter depth. Returns the number of pixels that saturated at
/// 65535 mm.
std::size_t write_depth_png(const fs::path& path, const DepthImage& depth);
DepthImage read_depth_png(const fs::path& path);

void write_provenance_png(const fs::path& path, const Image<Provenance>& provenance);

// ---- raw float depth ----
// 16-byte header: "DPF1", uint32 width, uint32 height, uint32 reserved (0),
// then width * height little-endian float32 values, row-major.

void write_depth_f32(const fs::path& path, const DepthImage& depth);
DepthImage read_depth_f32(const fs::path& path);

/// Dispatches on extension: .f32 or .png.
DepthImage read_depth(const fs::path& path);

// ---- key-value text ----
// One "key = v1 v2 ..." per line; '#' starts a comment. Numbers are written
// in the shortest form that round-trips exactly.

class KeyValues {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::span<const double> values);
  void set_int(const std::string& key, long long value);

  bool has(const std::string& key) const;
  std::vector<std::string> keys() const;
  const std::string& text(const std::string& key) const;
  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::vector<double> numbers(const std::string& key, std::size_t expected) const;

  std::string serialize() const;
  static KeyValues parse(const std::string& content, const std::string& origin);
  static KeyValues read(const fs::path& path);
  void write(const fs::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
  std::string origin_;
};

std::string format_double(double value);

KeyValues camera_to_kv(const CameraModel& camera);
CameraModel camera_from_kv(const KeyValues& kv);
void write_camera(const fs::path& path, const CameraModel& camera);
CameraModel read_camera(const fs::path& path);

struct GroundTruth {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;
  SymmetryGroup symmetry;
};

void write_ground_truth(const fs::path& path, const GroundTruth& gt);
GroundTruth read_ground_truth(const fs::path& path);

void write_solution(const fs::path& path, const PlacementSolution& solution);
/// Restores rotation, translation, scale, transform, residual, degraded flag
/// and the view score fields.
PlacementSolution read_solution(const fs::path& path);

// ---- scene packages ----

/// rgb.png, depth_observed.png/.f32, depth_clean.png/.f32, mask.png,
/// camera.txt, mesh.ply, gt.txt, seed.txt.
void write_scene(const fs::path& dir, const ScenePackage& scene);
/// Scenes without gt.txt load with has_ground_truth = false. The mesh is
/// taken as-is (already canonical).
ScenePackage read_scene(const fs::path& dir);

// ---- reconstruction artifacts ----

void write_point_cloud(const fs::path& path, const std::vector<CloudPoint>& cloud);
/// view_index, roll_index, yaw_deg, pitch_deg, roll_deg, s_ssim, s_edge,
/// s_ratio, total; unscored terms are written as "nan".
void write_score_csv(const fs::path& path, const ViewMatchResult& match);

/// Creates parent directories; throws kIo on failure.
void write_text(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

}  // namespace meshplace::io
