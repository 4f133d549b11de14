#pragma once

#include <array>
#include <vector>

#include "meshplace/geometry.hpp"
#include "meshplace/image.hpp"
#include "meshplace/mesh.hpp"
#include "meshplace/view_matching.hpp"

namespace meshplace {

inline constexpr int kContactSamples = 30;
/// Positions of the left / center / right representatives among the samples.
inline constexpr std::array<int, 3> kRepresentativeSamples = {4, 14, 24};

struct KeypointConfig {
  int support_scan_px = 10;
  int snap_radius_px = 5;
  double residual_gate_m = 0.015;
  /// 1 = virtual-camera lift only; each further pass re-lifts the mesh
  /// keypoints in the observation camera at the previous estimate.
  int passes = 2;

  void validate() const;
  bool operator==(const KeypointConfig&) const = default;
};

using Pixel = Eigen::Vector2i;
using PointTriple = std::array<Vec3, 3>;

struct ContactKeypoints {
  std::vector<Pixel> sampled;             // left to right along the bottom edge
  std::array<Pixel, 3> representatives{};  // left, center, right
  PointTriple scene{};                     // support-surface points, world
  PointTriple mesh{};                      // mesh points at the nominal placement
};

/// Lowest mask pixel of every occupied column, evenly subsampled to 30.
/// Throws kEmptyMask / kDegenerateContact.
ContactKeypoints extract_contact_edge(const MaskImage& mask);

/// Unprojects each representative with the first valid depth found scanning
/// downward from the row below it (at most `scan_px` rows).
/// Throws kMissingSupportDepth.
PointTriple lift_scene_keypoints(const std::array<Pixel, 3>& representatives, const DepthImage& depth,
                                 const CameraModel& camera, int scan_px = 10);

/// How the mesh is rendered while lifting its keypoints.
struct MeshView {
  CameraModel camera;
  ScaledPlacement placement;
};

/// Renders the mesh under `view`, maps the observed keypoints onto the render
/// by aligning the two bounding boxes (translation + uniform scale), snaps
/// background hits to the nearest covered pixel within `snap_radius`, moves
/// down that column to the rendered contact edge, reads the depth there and
/// returns the points in object coordinates rotated by `object_rotation`,
/// i.e. at placement (R_v, 0, 1). Throws kKeypointOffMesh.
PointTriple lift_mesh_keypoints(const std::array<Pixel, 3>& representatives, const BoundingBox& observed_box,
                                const TriangleMesh& mesh, const Mat3& object_rotation, const MeshView& view,
                                int snap_radius = 5);

/// Ratio of summed pairwise distances. Throws kDegenerateKeypoints.
double solve_scale(const PointTriple& scene, const PointTriple& mesh);

/// Mean displacement scene - mesh over the three pairs.
Vec3 solve_translation(const PointTriple& scene, const PointTriple& mesh_scaled);

/// RMS of |scale * mesh + translation - scene|.
double alignment_residual(const PointTriple& scene, const PointTriple& mesh, double scale,
                          const Vec3& translation);

struct PlacementSolution {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;
  Mat4 transform = Mat4::Identity();
  ViewScore view_score;
  double residual_m = 0;
  bool degraded = false;
  ContactKeypoints keypoints;

  ScaledPlacement placement() const;
};

PlacementSolution assemble_placement(const Mat3& rotation, const Vec3& translation, double scale,
                                     const ViewScore& score, double residual, double residual_gate_m);

/// World-from-object rotation for a matched camera-from-object rotation whose
/// object center is seen along `direction` (camera frame) by `camera`.
Mat3 object_rotation(const Mat3& camera_from_object, const CameraModel& camera, const Vec3& direction);

/// Full keypoint stage: contact edge, scene lift, mesh lift, scale,
/// translation and assembly.
PlacementSolution estimate_placement(const ViewMatchResult& match, const MaskImage& mask,
                                     const DepthImage& depth, const CameraModel& camera,
                                     const TriangleMesh& mesh, const ViewMatchConfig& view_config,
                                     const KeypointConfig& config);

}  // namespace meshplace
