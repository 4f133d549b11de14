#include "meshplace/fusion.hpp"

#include "meshplace/render.hpp"

namespace meshplace {

FusedDepth fuse(const DepthImage& observed, const MaskImage& mask, const TriangleMesh& mesh,
                const ScaledPlacement& placement, const CameraModel& camera) {
  if (!observed.same_size(mask) || observed.width() != camera.width() || observed.height() != camera.height()) {
    throw Error(ErrorCode::kSizeMismatch, "fuse: depth, mask and camera sizes differ");
  }
  FusedDepth out;
  out.depth = observed;
  out.provenance = Image<Provenance>(observed.width(), observed.height(), Provenance::kOriginal);
  for (int y = 0; y < observed.height(); ++y) {
    for (int x = 0; x < observed.width(); ++x) {
      if (!(observed(x, y) > 0)) out.provenance(x, y) = Provenance::kInvalid;
    }
  }
  out.mask_pixels = count_nonzero(mask);
  if (out.mask_pixels == 0) return out;

  const auto rendered = render(mesh, camera, placement);
  for (int y = 0; y < observed.height(); ++y) {
    for (int x = 0; x < observed.width(); ++x) {
      if (!mask(x, y)) continue;
      if (rendered.silhouette(x, y)) {
        out.depth(x, y) = rendered.depth(x, y);
        out.provenance(x, y) = Provenance::kMesh;
        ++out.covered_pixels;
      } else {
        out.depth(x, y) = 0.0f;
        out.provenance(x, y) = Provenance::kInvalid;
      }
    }
  }
  out.poor_coverage = out.coverage() < kPoorCoverageFraction;
  return out;
}

FusedDepth fuse(const DepthImage& observed, const MaskImage& mask, const TriangleMesh& mesh,
                const PlacementSolution& placement, const CameraModel& camera) {
  return fuse(observed, mask, mesh, placement.placement(), camera);
}

std::vector<CloudPoint> to_point_cloud(const FusedDepth& fused, const CameraModel& camera) {
  std::vector<CloudPoint> cloud;
  for (int y = 0; y < fused.depth.height(); ++y) {
    for (int x = 0; x < fused.depth.width(); ++x) {
      const float d = fused.depth(x, y);
      if (!(d > 0)) continue;
      cloud.push_back({camera.unproject(x, y, d), fused.provenance(x, y)});
    }
  }
  return cloud;
}

}  // namespace meshplace
