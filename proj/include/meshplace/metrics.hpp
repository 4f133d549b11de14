#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "meshplace/geometry.hpp"
#include "meshplace/image.hpp"

namespace meshplace {

/// Treatment of predicted holes (depth 0) inside the evaluation region.
enum class HolePolicy {
  kPenalize,  // count the hole at the maximum valid ground-truth depth of the scene
  kExclude,   // drop the pixel from every mean
};

std::string_view to_string(HolePolicy policy);
HolePolicy parse_hole_policy(std::string_view text);

/// Pixels scored by the depth metrics.
enum class EvalRegion {
  kMask,       // object mask
  kFullImage,  // every pixel with ground truth
};

std::string_view to_string(EvalRegion region);
EvalRegion parse_eval_region(std::string_view text);

/// All-ones mask for kFullImage, otherwise `mask` itself.
MaskImage evaluation_region(EvalRegion region, const MaskImage& mask);

struct DepthMetrics {
  double rmse = 0;
  double rel = 0;
  double mae = 0;
  std::size_t evaluated_pixel_count = 0;
  std::size_t gt_invalid_excluded = 0;  // region pixels without ground truth
  std::size_t holes = 0;                // predicted-invalid pixels in the region
  HolePolicy policy = HolePolicy::kPenalize;
  double hole_depth = 0;                // depth substituted for holes under kPenalize
};

/// RMSE, mean absolute relative error and MAE over region pixels with valid
/// ground truth. Throws kSizeMismatch / kEmptyEvaluation.
DepthMetrics depth_metrics(const DepthImage& predicted, const DepthImage& ground_truth, const MaskImage& region,
                           HolePolicy policy = HolePolicy::kPenalize);

/// Rotational symmetries of an object about its canonical axes.
struct SymmetryGroup {
  bool continuous_z = false;  // any rotation about z
  int z_fold = 1;             // discrete rotations about z by 2 pi / z_fold
  bool flip = false;          // 180 degree rotation about x

  static SymmetryGroup none() { return {}; }
  std::string to_string() const;
  static SymmetryGroup parse(std::string_view text);
  bool operator==(const SymmetryGroup&) const = default;
};

/// Geodesic angle between estimate and truth minimized over the symmetry
/// group: min_g angle(R_est, R_gt * g). Degrees.
double symmetric_rotation_error_deg(const Mat3& estimate, const Mat3& truth, const SymmetryGroup& symmetry);

struct PlacementError {
  double rotation_deg = 0;
  double translation_m = 0;
  double scale_error = 0;  // |S / s* - 1|
};

PlacementError placement_error(const Mat3& rotation, const Vec3& translation, double scale,
                               const Mat3& gt_rotation, const Vec3& gt_translation, double gt_scale,
                               const SymmetryGroup& symmetry = {});

}  // namespace meshplace
