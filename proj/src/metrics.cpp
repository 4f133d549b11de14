#include "meshplace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "meshplace/error.hpp"

namespace meshplace {

std::string_view to_string(HolePolicy policy) {
  return policy == HolePolicy::kPenalize ? "penalize" : "exclude";
}

HolePolicy parse_hole_policy(std::string_view text) {
  if (text == "penalize") return HolePolicy::kPenalize;
  if (text == "exclude") return HolePolicy::kExclude;
  throw Error(ErrorCode::kInvalidParameter, "unknown hole policy '" + std::string(text) + "'");
}

std::string_view to_string(EvalRegion region) { return region == EvalRegion::kMask ? "mask" : "full"; }

EvalRegion parse_eval_region(std::string_view text) {
  if (text == "mask") return EvalRegion::kMask;
  if (text == "full") return EvalRegion::kFullImage;
  throw Error(ErrorCode::kInvalidParameter, "unknown evaluation region '" + std::string(text) + "'");
}

MaskImage evaluation_region(EvalRegion region, const MaskImage& mask) {
  if (region == EvalRegion::kMask) return mask;
  MaskImage all(mask.width(), mask.height());
  std::fill(all.pixels().begin(), all.pixels().end(), std::uint8_t{1});
  return all;
}

DepthMetrics depth_metrics(const DepthImage& predicted, const DepthImage& ground_truth, const MaskImage& region,
                           HolePolicy policy) {
  if (!predicted.same_size(ground_truth) || !predicted.same_size(region)) {
    throw Error(ErrorCode::kSizeMismatch, "depth_metrics: image sizes differ");
  }
  DepthMetrics m;
  m.policy = policy;
  if (policy == HolePolicy::kPenalize) {
    for (float d : ground_truth.pixels()) m.hole_depth = std::max(m.hole_depth, static_cast<double>(d));
  }
  double sq = 0, rel = 0, abs_sum = 0;
  for (int y = 0; y < predicted.height(); ++y) {
    for (int x = 0; x < predicted.width(); ++x) {
      if (!region(x, y)) continue;
      const double gt = ground_truth(x, y);
      if (!(gt > 0)) {
        ++m.gt_invalid_excluded;
        continue;
      }
      double pred = predicted(x, y);
      if (!(pred > 0)) {
        ++m.holes;
        if (policy == HolePolicy::kExclude) continue;
        pred = m.hole_depth;
      }
      const double err = pred - gt;
      sq += err * err;
      abs_sum += std::abs(err);
      rel += std::abs(err) / gt;
      ++m.evaluated_pixel_count;
    }
  }
  if (m.evaluated_pixel_count == 0) {
    throw Error(ErrorCode::kEmptyEvaluation, "no evaluable pixels in the region");
  }
  const auto n = static_cast<double>(m.evaluated_pixel_count);
  m.rmse = std::sqrt(sq / n);
  m.rel = rel / n;
  m.mae = abs_sum / n;
  return m;
}

std::string SymmetryGroup::to_string() const {
  std::string out;
  if (continuous_z) {
    out = "continuous_z";
  } else if (z_fold > 1) {
    out = "z" + std::to_string(z_fold);
  } else {
    out = "none";
  }
  if (flip) out += "+flip";
  return out;
}

SymmetryGroup SymmetryGroup::parse(std::string_view text) {
  SymmetryGroup g;
  const auto plus = text.find('+');
  std::string_view head = text.substr(0, plus);
  if (plus != std::string_view::npos) {
    if (text.substr(plus + 1) != "flip") {
      throw Error(ErrorCode::kFormat, "unknown symmetry suffix in '" + std::string(text) + "'");
    }
    g.flip = true;
  }
  if (head == "continuous_z") {
    g.continuous_z = true;
  } else if (head == "none") {
  } else if (head.size() > 1 && head[0] == 'z') {
    try {
      g.z_fold = std::stoi(std::string(head.substr(1)));
    } catch (...) {
      throw Error(ErrorCode::kFormat, "bad symmetry '" + std::string(text) + "'");
    }
    if (g.z_fold < 1) throw Error(ErrorCode::kFormat, "bad symmetry fold in '" + std::string(text) + "'");
  } else {
    throw Error(ErrorCode::kFormat, "unknown symmetry '" + std::string(text) + "'");
  }
  return g;
}

double symmetric_rotation_error_deg(const Mat3& estimate, const Mat3& truth, const SymmetryGroup& symmetry) {
  const Mat3 m = truth.transpose() * estimate;
  const auto angle_from_trace = [](double trace) {
    return std::acos(std::clamp((trace - 1.0) * 0.5, -1.0, 1.0));
  };
  double best = rotation_angle_between(truth, estimate);
  if (symmetry.continuous_z) {
    // max over theta of trace(Rz(theta)^T M), and with the x flip appended.
    best = std::min(best, angle_from_trace(std::hypot(m(0, 0) + m(1, 1), m(1, 0) - m(0, 1)) + m(2, 2)));
    if (symmetry.flip) {
      best = std::min(best, angle_from_trace(std::hypot(m(0, 0) - m(1, 1), m(1, 0) + m(0, 1)) - m(2, 2)));
    }
  } else {
    const Mat3 flip = Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitX()).toRotationMatrix();
    for (int k = 0; k < std::max(1, symmetry.z_fold); ++k) {
      const Mat3 g = Eigen::AngleAxisd(2.0 * std::numbers::pi * k / std::max(1, symmetry.z_fold), Vec3::UnitZ())
                         .toRotationMatrix();
      best = std::min(best, rotation_angle_between(truth * g, estimate));
      if (symmetry.flip) best = std::min(best, rotation_angle_between(truth * g * flip, estimate));
    }
  }
  return best * 180.0 / std::numbers::pi;
}

PlacementError placement_error(const Mat3& rotation, const Vec3& translation, double scale,
                               const Mat3& gt_rotation, const Vec3& gt_translation, double gt_scale,
                               const SymmetryGroup& symmetry) {
  PlacementError e;
  e.rotation_deg = symmetric_rotation_error_deg(rotation, gt_rotation, symmetry);
  e.translation_m = (translation - gt_translation).norm();
  e.scale_error = std::abs(scale / gt_scale - 1.0);
  return e;
}

}  // namespace meshplace
