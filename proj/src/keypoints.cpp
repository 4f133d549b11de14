#include "meshplace/keypoints.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "meshplace/render.hpp"

namespace meshplace {

void KeypointConfig::validate() const {
  if (support_scan_px < 1) throw Error(ErrorCode::kInvalidParameter, "support scan must be >= 1 px");
  if (snap_radius_px < 0) throw Error(ErrorCode::kInvalidParameter, "snap radius must be >= 0");
  if (!(residual_gate_m > 0)) throw Error(ErrorCode::kInvalidParameter, "residual gate must be > 0");
  if (passes < 1) throw Error(ErrorCode::kInvalidParameter, "keypoint passes must be >= 1");
}

ContactKeypoints extract_contact_edge(const MaskImage& mask) {
  std::vector<Pixel> bottom;
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = mask.height() - 1; y >= 0; --y) {
      if (mask(x, y)) {
        bottom.emplace_back(x, y);
        break;
      }
    }
  }
  if (bottom.empty()) throw Error(ErrorCode::kEmptyMask, "object mask is empty");
  if (bottom.size() < 3) {
    throw Error(ErrorCode::kDegenerateContact,
                "contact edge spans " + std::to_string(bottom.size()) + " columns, need >= 3");
  }
  ContactKeypoints out;
  const double step = static_cast<double>(bottom.size() - 1) / (kContactSamples - 1);
  for (int j = 0; j < kContactSamples; ++j) {
    out.sampled.push_back(bottom[static_cast<std::size_t>(std::lround(j * step))]);
  }
  for (int k = 0; k < 3; ++k) out.representatives[k] = out.sampled[kRepresentativeSamples[k]];
  const auto& r = out.representatives;
  if (!(r[0].x() < r[1].x() && r[1].x() < r[2].x())) {
    throw Error(ErrorCode::kDegenerateContact, "representative keypoints are not strictly ordered");
  }
  return out;
}

PointTriple lift_scene_keypoints(const std::array<Pixel, 3>& representatives, const DepthImage& depth,
                                 const CameraModel& camera, int scan_px) {
  PointTriple out;
  static constexpr const char* kNames[] = {"left", "center", "right"};
  for (int k = 0; k < 3; ++k) {
    const Pixel& p = representatives[k];
    float d = 0;
    for (int j = 1; j <= scan_px; ++j) {
      const int y = p.y() + j;
      if (!depth.in_bounds(p.x(), y)) break;
      if (depth(p.x(), y) > 0) {
        d = depth(p.x(), y);
        break;
      }
    }
    if (!(d > 0)) {
      throw Error(ErrorCode::kMissingSupportDepth,
                  std::string("no valid support depth below the ") + kNames[k] + " contact keypoint at (" +
                      std::to_string(p.x()) + ", " + std::to_string(p.y()) + ")");
    }
    out[k] = camera.unproject(p.x(), p.y(), d);
  }
  return out;
}

namespace {

std::optional<Pixel> nearest_covered(const MaskImage& silhouette, int x, int y, int radius) {
  std::optional<Pixel> best;
  int best_d2 = radius * radius + 1;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const int d2 = dx * dx + dy * dy;
      if (d2 >= best_d2) continue;
      if (!silhouette.in_bounds(x + dx, y + dy) || !silhouette(x + dx, y + dy)) continue;
      best_d2 = d2;
      best = Pixel(x + dx, y + dy);
    }
  }
  return best;
}

// Moves a covered pixel down its column to the bottom silhouette pixel, so
// the lifted point lies on the rendered contact edge like the observed one.
Pixel column_bottom(const MaskImage& silhouette, Pixel p) {
  for (int row = silhouette.height() - 1; row > p.y(); --row) {
    if (silhouette(p.x(), row)) return Pixel(p.x(), row);
  }
  return p;
}

}  // namespace

PointTriple lift_mesh_keypoints(const std::array<Pixel, 3>& representatives, const BoundingBox& observed_box,
                                const TriangleMesh& mesh, const Mat3& object_rotation, const MeshView& view,
                                int snap_radius) {
  const auto rendered = render(mesh, view.camera, view.placement);
  const auto box = mask_bounds(rendered.silhouette);
  if (!box) throw Error(ErrorCode::kKeypointOffMesh, "mesh render is empty under the matched rotation");
  const double scale = 0.5 * (static_cast<double>(box->width) / observed_box.width +
                              static_cast<double>(box->height) / observed_box.height);
  PointTriple out;
  for (int k = 0; k < 3; ++k) {
    const double u = box->center_x() + scale * (representatives[k].x() - observed_box.center_x());
    const double v = box->center_y() + scale * (representatives[k].y() - observed_box.center_y());
    const int x = static_cast<int>(std::lround(u));
    const int y = static_cast<int>(std::lround(v));
    const auto covered = nearest_covered(rendered.silhouette, x, y, snap_radius);
    if (!covered) {
      throw Error(ErrorCode::kKeypointOffMesh, "keypoint maps to (" + std::to_string(x) + ", " +
                                                   std::to_string(y) + "), more than " +
                                                   std::to_string(snap_radius) + " px from the mesh render");
    }
    const Pixel hit = column_bottom(rendered.silhouette, *covered);
    const Vec3 world = view.camera.unproject(hit.x(), hit.y(), rendered.depth(hit.x(), hit.y()));
    out[k] = object_rotation * view.placement.inverse_apply(world);
  }
  return out;
}

double solve_scale(const PointTriple& scene, const PointTriple& mesh) {
  const auto perimeter = [](const PointTriple& k) {
    const double a = (k[0] - k[1]).norm();
    const double b = (k[0] - k[2]).norm();
    const double c = (k[1] - k[2]).norm();
    if (!(a > 1e-9 && b > 1e-9 && c > 1e-9)) {
      throw Error(ErrorCode::kDegenerateKeypoints, "keypoints coincide");
    }
    return a + b + c;
  };
  const double scene_sum = perimeter(scene);
  return scene_sum / perimeter(mesh);
}

Vec3 solve_translation(const PointTriple& scene, const PointTriple& mesh_scaled) {
  return ((scene[0] - mesh_scaled[0]) + (scene[1] - mesh_scaled[1]) + (scene[2] - mesh_scaled[2])) / 3.0;
}

double alignment_residual(const PointTriple& scene, const PointTriple& mesh, double scale,
                          const Vec3& translation) {
  double sum = 0;
  for (int k = 0; k < 3; ++k) sum += (scale * mesh[k] + translation - scene[k]).squaredNorm();
  return std::sqrt(sum / 3.0);
}

ScaledPlacement PlacementSolution::placement() const {
  return ScaledPlacement(RigidTransform::from_rotation_translation(rotation, translation), scale);
}

PlacementSolution assemble_placement(const Mat3& rotation, const Vec3& translation, double scale,
                                     const ViewScore& score, double residual, double residual_gate_m) {
  PlacementSolution s;
  s.rotation = rotation;
  s.translation = translation;
  s.scale = scale;
  s.transform = Mat4::Identity();
  s.transform.topLeftCorner<3, 3>() = rotation;
  s.transform.topRightCorner<3, 1>() = translation;
  s.view_score = score;
  s.residual_m = residual;
  s.degraded = residual > residual_gate_m;
  return s;
}

Mat3 object_rotation(const Mat3& camera_from_object, const CameraModel& camera, const Vec3& direction) {
  const Mat3 ray = Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), direction.normalized()).toRotationMatrix();
  return camera.extrinsic().rotation().transpose() * ray * camera_from_object;
}

PlacementSolution estimate_placement(const ViewMatchResult& match, const MaskImage& mask,
                                     const DepthImage& depth, const CameraModel& camera,
                                     const TriangleMesh& mesh, const ViewMatchConfig& view_config,
                                     const KeypointConfig& config) {
  config.validate();
  if (!mask.same_size(depth) || mask.width() != camera.width() || mask.height() != camera.height()) {
    throw Error(ErrorCode::kSizeMismatch, "mask, depth and camera sizes differ");
  }
  ContactKeypoints keypoints = extract_contact_edge(mask);
  keypoints.scene = lift_scene_keypoints(keypoints.representatives, depth, camera, config.support_scan_px);
  const BoundingBox observed_box = *mask_bounds(mask);
  const Mat3 matched = match.refined.rotation();

  // First pass: lift at the virtual camera used for matching; the object
  // center is assumed to lie on the ray through the mask box center.
  Mat3 rotation = object_rotation(
      matched, camera, camera.ray_direction(observed_box.center_x(), observed_box.center_y()));
  MeshView view{make_virtual_camera(view_config.render_resolution, view_config.sphere_radius),
                ScaledPlacement(RigidTransform::from_rotation_translation(
                                    matched, Vec3(0, 0, view_config.sphere_radius)),
                                1.0)};
  // The virtual camera only approximates the observation's perspective, so
  // when later passes re-lift in the observation camera the first snap is
  // looser.
  const int first_radius = config.passes > 1 ? 3 * config.snap_radius_px : config.snap_radius_px;
  keypoints.mesh = lift_mesh_keypoints(keypoints.representatives, observed_box, mesh, rotation, view, first_radius);
  double scale = solve_scale(keypoints.scene, keypoints.mesh);
  Vec3 translation = solve_translation(keypoints.scene,
                                       {scale * keypoints.mesh[0], scale * keypoints.mesh[1], scale * keypoints.mesh[2]});

  // Later passes: re-aim the rotation at the estimated object center and
  // re-lift in the observation camera at the current estimate.
  for (int pass = 1; pass < config.passes; ++pass) {
    const Vec3 center_cam = camera.extrinsic().apply(translation);
    if (!(center_cam.z() > 0)) break;
    const Mat3 aimed = object_rotation(matched, camera, center_cam);
    MeshView observed_view{camera, ScaledPlacement(RigidTransform::from_rotation_translation(aimed, translation), scale)};
    // A poor first estimate can leave keypoints just outside the strict
    // snap radius; the first-pass radius is the fallback.
    std::optional<PointTriple> lifted;
    for (const int radius : {config.snap_radius_px, first_radius}) {
      try {
        lifted = lift_mesh_keypoints(keypoints.representatives, observed_box, mesh, aimed, observed_view, radius);
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kKeypointOffMesh) throw;
      }
    }
    if (!lifted) break;  // keep the previous estimate
    rotation = aimed;
    keypoints.mesh = *lifted;
    scale = solve_scale(keypoints.scene, keypoints.mesh);
    translation = solve_translation(keypoints.scene,
                                    {scale * keypoints.mesh[0], scale * keypoints.mesh[1], scale * keypoints.mesh[2]});
  }

  const double residual = alignment_residual(keypoints.scene, keypoints.mesh, scale, translation);
  PlacementSolution solution =
      assemble_placement(rotation, translation, scale, match.best_score, residual, config.residual_gate_m);
  solution.keypoints = std::move(keypoints);
  return solution;
}

}  // namespace meshplace
