#pragma once

#include <cstdint>
#include <filesystem>

#include "meshplace/fusion.hpp"
#include "meshplace/keypoints.hpp"
#include "meshplace/metrics.hpp"
#include "meshplace/scene.hpp"
#include "meshplace/view_matching.hpp"

namespace meshplace {

struct PipelineConfig {
  ViewMatchConfig view;
  KeypointConfig keypoint;
  HolePolicy hole_policy = HolePolicy::kPenalize;
  EvalRegion eval_region = EvalRegion::kMask;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  void validate() const;
  bool operator==(const PipelineConfig&) const = default;
};

struct ReconstructionInputs {
  GrayImage rgb;
  DepthImage depth;
  MaskImage mask;
  CameraModel camera;
  TriangleMesh mesh;  // canonical

  /// Throws kSizeMismatch / kEmptyMask / kEmptyGeometry before any compute.
  void validate() const;
};

struct Reconstruction {
  ViewMatchResult match;
  PlacementSolution solution;
  FusedDepth fused;
};

/// view matching -> keypoint matching -> fusion. Errors carry the stage name
/// ("view-matching", "keypoint-matching", "depth-fusion").
Reconstruction reconstruct(const ReconstructionInputs& inputs, const PipelineConfig& config);

struct PipelineResult {
  Reconstruction reconstruction;
  DepthMetrics fused_metrics;      // fused vs clean over the evaluation region
  DepthMetrics corrupted_metrics;  // observed vs clean over the same region
  PlacementError placement;
};

/// reconstruct plus evaluation against the package's ground truth
/// (stage "eval-metrics").
PipelineResult run_pipeline(const ScenePackage& scene, const PipelineConfig& config);

ReconstructionInputs inputs_from_scene(const ScenePackage& scene);

}  // namespace meshplace
