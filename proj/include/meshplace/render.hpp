#pragma once

#include <vector>

#include "meshplace/geometry.hpp"
#include "meshplace/image.hpp"
#include "meshplace/mesh.hpp"

namespace meshplace {

struct RenderOptions {
  double near = 1e-3;
  double far = 1e3;
};

struct RenderedView {
  int view_index = -1;
  RigidTransform camera_pose;  // camera-from-world used for the render
  MaskImage silhouette;
  DepthImage depth;    // meters (or canonical units), 0 = background
  GrayImage shaded;    // flat Lambertian, headlight at the camera center
};

/// Z-buffered rasterization of `mesh` placed by `placement` and seen by
/// `camera`. Perspective-correct depth, top-left fill rule, near-plane
/// clipping. Ties in depth keep the earlier triangle, so output is a pure
/// function of the inputs.
RenderedView render(const TriangleMesh& mesh, const CameraModel& camera,
                    const ScaledPlacement& placement = {}, const RenderOptions& options = {});

/// `n` camera-from-object poses on a sphere of `radius` around the origin,
/// each looking at the origin. Fibonacci spiral ordering from +z toward -z;
/// n = 1 yields the +z pole. Up hint is object +z.
std::vector<RigidTransform> sample_view_sphere(int n, double radius);

/// Characteristic angular spacing (radians) of n near-uniform sphere samples:
/// sqrt(4 pi / n).
double view_sampling_cell(int n);

/// Square virtual camera whose focal length fits the canonical bounding sphere
/// (radius sqrt(3)/2) seen from `standoff` with a 5% margin.
CameraModel make_virtual_camera(int resolution, double standoff);

template <typename T>
struct CropResult {
  Image<T> image;
  BoundingBox box;
};

/// Tight crop of `image` around the silhouette. Throws kEmptyMask.
template <typename T>
CropResult<T> crop_to_object(const Image<T>& image, const MaskImage& silhouette) {
  if (!image.same_size(silhouette)) throw Error(ErrorCode::kSizeMismatch, "image/silhouette size mismatch");
  const auto box = mask_bounds(silhouette);
  if (!box) throw Error(ErrorCode::kEmptyMask, "silhouette has no pixels");
  return {crop(image, *box), *box};
}

}  // namespace meshplace
