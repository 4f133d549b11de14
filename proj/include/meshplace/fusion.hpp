#pragma once

#include <cstdint>
#include <vector>

#include "meshplace/geometry.hpp"
#include "meshplace/image.hpp"
#include "meshplace/keypoints.hpp"
#include "meshplace/mesh.hpp"

namespace meshplace {

/// Per-pixel origin of a fused depth value. Values double as the 8-bit
/// provenance PNG encoding.
enum class Provenance : std::uint8_t { kInvalid = 0, kOriginal = 128, kMesh = 255 };

struct FusedDepth {
  DepthImage depth;
  Image<Provenance> provenance;
  std::size_t mask_pixels = 0;
  std::size_t covered_pixels = 0;  // mask pixels filled from the mesh
  bool poor_coverage = false;      // covered < 25% of the mask

  double coverage() const {
    return mask_pixels == 0 ? 1.0 : static_cast<double>(covered_pixels) / mask_pixels;
  }
};

inline constexpr double kPoorCoverageFraction = 0.25;

/// Inside the mask: placed-mesh depth where the render covers the pixel,
/// otherwise invalid. Outside: observed depth passed through untouched.
FusedDepth fuse(const DepthImage& observed, const MaskImage& mask, const TriangleMesh& mesh,
                const ScaledPlacement& placement, const CameraModel& camera);
FusedDepth fuse(const DepthImage& observed, const MaskImage& mask, const TriangleMesh& mesh,
                const PlacementSolution& placement, const CameraModel& camera);

struct CloudPoint {
  Vec3 position;  // world, meters
  Provenance provenance;
};

/// Unprojects every pixel with depth > 0, row-major order.
std::vector<CloudPoint> to_point_cloud(const FusedDepth& fused, const CameraModel& camera);

}  // namespace meshplace
