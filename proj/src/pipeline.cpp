#include "meshplace/pipeline.hpp"

#include "meshplace/error.hpp"
#include "meshplace/render.hpp"

namespace meshplace {

namespace {

template <typename Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

}  // namespace

void PipelineConfig::validate() const {
  view.validate();
  keypoint.validate();
}

void ReconstructionInputs::validate() const {
  const int w = camera.width(), h = camera.height();
  const auto check = [&](int iw, int ih, const char* what) {
    if (iw != w || ih != h) {
      throw Error(ErrorCode::kSizeMismatch, std::string(what) + " is " + std::to_string(iw) + "x" +
                                                std::to_string(ih) + ", camera is " + std::to_string(w) +
                                                "x" + std::to_string(h));
    }
  };
  check(rgb.width(), rgb.height(), "rgb image");
  check(depth.width(), depth.height(), "depth image");
  check(mask.width(), mask.height(), "mask");
  if (count_nonzero(mask) == 0) throw Error(ErrorCode::kEmptyMask, "mask has no pixels");
  if (mesh.empty()) throw Error(ErrorCode::kEmptyGeometry, "mesh has no triangles");
}

Reconstruction reconstruct(const ReconstructionInputs& inputs, const PipelineConfig& config) {
  staged("input", [&] {
    config.validate();
    inputs.validate();
  });
  Reconstruction out;
  out.match = staged("view-matching", [&] {
    const auto views = sample_view_sphere(config.view.view_count, config.view.sphere_radius);
    return match_view(inputs.rgb, inputs.mask, inputs.mesh, views, config.view);
  });
  out.solution = staged("keypoint-matching", [&] {
    return estimate_placement(out.match, inputs.mask, inputs.depth, inputs.camera, inputs.mesh, config.view,
                              config.keypoint);
  });
  out.fused = staged("depth-fusion", [&] {
    return fuse(inputs.depth, inputs.mask, inputs.mesh, out.solution, inputs.camera);
  });
  return out;
}

ReconstructionInputs inputs_from_scene(const ScenePackage& scene) {
  return {scene.rgb, scene.depth_observed, scene.mask, scene.camera, scene.mesh};
}

PipelineResult run_pipeline(const ScenePackage& scene, const PipelineConfig& config) {
  if (!scene.has_ground_truth) {
    throw Error(ErrorCode::kInput, "scene '" + scene.scene_id + "' has no ground truth", "eval-metrics");
  }
  PipelineResult out;
  out.reconstruction = reconstruct(inputs_from_scene(scene), config);
  staged("eval-metrics", [&] {
    const MaskImage region = evaluation_region(config.eval_region, scene.mask);
    out.fused_metrics = depth_metrics(out.reconstruction.fused.depth, scene.depth_clean, region, config.hole_policy);
    out.corrupted_metrics = depth_metrics(scene.depth_observed, scene.depth_clean, region, config.hole_policy);
    const auto& s = out.reconstruction.solution;
    out.placement = placement_error(s.rotation, s.translation, s.scale, scene.gt_rotation, scene.gt_translation,
                                    scene.gt_scale, scene.symmetry);
  });
  return out;
}

}  // namespace meshplace
