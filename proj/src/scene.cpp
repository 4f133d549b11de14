#include "meshplace/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "meshplace/error.hpp"
#include "meshplace/render.hpp"

namespace meshplace {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

float checker_albedo(int i, int j) { return ((i + j) % 2 == 0) ? 64.0f / 255.0f : 191.0f / 255.0f; }

// Thin opaque wall between the camera and the object's near side.
TriangleMesh make_distractor(const AxisAlignedBox& object_box, const Vec3& toward_camera) {
  const Vec3 size = object_box.extent();
  const double radius = 0.5 * std::max(size.x(), size.y());
  const double width = 3.0 * radius;
  const double thickness = 0.01;
  const double height = std::max(0.02, 0.35 * size.z());
  const Vec3 d = Vec3(toward_camera.x(), toward_camera.y(), 0.0).normalized();
  const Vec3 side(-d.y(), d.x(), 0.0);
  const Vec3 base = Vec3(object_box.center().x(), object_box.center().y(), 0.0) + d * (radius + 0.015);
  TriangleMesh box;
  for (int i = 0; i < 8; ++i) {
    box.vertices.push_back(base + side * ((i & 1) ? width / 2 : -width / 2) +
                           d * ((i & 2) ? thickness : 0.0) + Vec3(0, 0, (i & 4) ? height : 0.0));
  }
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    box.triangles.push_back({q[0], q[1], q[2]});
    box.triangles.push_back({q[0], q[2], q[3]});
  }
  box.albedo.assign(8, 0.2f);
  return box;
}

bool inside_frame(const MaskImage& silhouette, int margin) {
  const auto box = mask_bounds(silhouette);
  if (!box) return false;
  return box->x0 >= margin && box->y0 >= margin && box->x1() <= silhouette.width() - 1 - margin &&
         box->y1() <= silhouette.height() - 1 - margin;
}

}  // namespace

std::string_view to_string(CorruptionMode mode) {
  switch (mode) {
    case CorruptionMode::kZero: return "zero";
    case CorruptionMode::kNoise: return "noise";
    case CorruptionMode::kRefraction: return "refraction";
  }
  return "unknown";
}

CorruptionMode parse_corruption_mode(std::string_view text) {
  for (auto m : {CorruptionMode::kZero, CorruptionMode::kNoise, CorruptionMode::kRefraction}) {
    if (to_string(m) == text) return m;
  }
  throw Error(ErrorCode::kInvalidParameter, "unknown corruption mode '" + std::string(text) + "'");
}

void CorruptionConfig::validate() const {
  if (!(sigma_m >= 0)) throw Error(ErrorCode::kInvalidParameter, "corruption sigma must be >= 0");
  if (!(dropout >= 0 && dropout <= 1)) throw Error(ErrorCode::kInvalidParameter, "dropout must be in [0, 1]");
}

void SceneConfig::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidParameter, what);
  };
  require(width > 0 && height > 0, "scene image size must be > 0");
  require(focal_px > 0, "focal length must be > 0");
  require(standoff_m > 0, "standoff must be > 0");
  require(min_elevation_deg > 0 && min_elevation_deg <= max_elevation_deg && max_elevation_deg < 90,
          "elevation range must satisfy 0 < min <= max < 90");
  require(min_scale_m > 0 && min_scale_m <= max_scale_m, "scale range must satisfy 0 < min <= max");
  require(position_jitter_m >= 0 && aim_jitter_m >= 0, "jitter must be >= 0");
  require(plane_size_m > 0 && checker_m > 0, "plane size and checker must be > 0");
  require(frustum_margin_px >= 0, "frustum margin must be >= 0");
  require(max_attempts >= 1, "max attempts must be >= 1");
  corruption.validate();
}

ScaledPlacement ScenePackage::gt_placement() const {
  return ScaledPlacement(RigidTransform::from_rotation_translation(gt_rotation, gt_translation), gt_scale);
}

TriangleMesh make_checker_plane(double cx, double cy, double size, double checker) {
  const int n = std::max(1, static_cast<int>(std::ceil(size / checker)));
  const double x0 = cx - 0.5 * n * checker;
  const double y0 = cy - 0.5 * n * checker;
  TriangleMesh plane;
  plane.vertices.reserve(static_cast<std::size_t>(n) * n * 4);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int base = static_cast<int>(plane.vertices.size());
      const double xa = x0 + i * checker, xb = xa + checker;
      const double ya = y0 + j * checker, yb = ya + checker;
      plane.vertices.emplace_back(xa, ya, 0.0);
      plane.vertices.emplace_back(xb, ya, 0.0);
      plane.vertices.emplace_back(xb, yb, 0.0);
      plane.vertices.emplace_back(xa, yb, 0.0);
      plane.albedo.insert(plane.albedo.end(), 4, checker_albedo(i, j));
      plane.triangles.push_back({base, base + 1, base + 2});
      plane.triangles.push_back({base, base + 2, base + 3});
    }
  }
  return plane;
}

ScenePackage make_scene(const TriangleMesh& mesh, const SymmetryGroup& symmetry, const SceneConfig& config,
                        std::uint64_t seed, std::string scene_id) {
  config.validate();
  if (mesh.empty()) throw Error(ErrorCode::kEmptyGeometry, "scene mesh has no triangles");
  auto placement_rng = substream(seed, "placement");
  auto camera_rng = substream(seed, "camera");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto range = [&](std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double bottom = bounding_box(mesh).min.z();
  const CameraModel intrinsics(config.focal_px, config.focal_px, 0.5 * (config.width - 1),
                               0.5 * (config.height - 1), config.width, config.height);

  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    const double scale = range(placement_rng, config.min_scale_m, config.max_scale_m);
    const double yaw = range(placement_rng, 0.0, 2.0 * std::numbers::pi);
    const Mat3 rotation = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
    const Vec3 translation(range(placement_rng, -config.position_jitter_m, config.position_jitter_m),
                           range(placement_rng, -config.position_jitter_m, config.position_jitter_m),
                           -scale * bottom);
    const ScaledPlacement placement(RigidTransform::from_rotation_translation(rotation, translation), scale);

    const double elevation =
        range(camera_rng, config.min_elevation_deg, config.max_elevation_deg) * kDegToRad;
    const double azimuth = range(camera_rng, 0.0, 2.0 * std::numbers::pi);
    const Vec3 toward_camera(std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                             std::sin(elevation));
    const Vec3 eye = translation + config.standoff_m * toward_camera;
    const Vec3 aim = translation + Vec3(range(camera_rng, -config.aim_jitter_m, config.aim_jitter_m),
                                        range(camera_rng, -config.aim_jitter_m, config.aim_jitter_m),
                                        range(camera_rng, -config.aim_jitter_m, config.aim_jitter_m));
    const CameraModel camera = intrinsics.with_extrinsic(look_at(eye, aim, Vec3::UnitZ()));

    const RenderedView object = render(mesh, camera, placement);
    if (!inside_frame(object.silhouette, config.frustum_margin_px)) continue;

    const TriangleMesh world_object = transformed(mesh, [&](const Vec3& p) { return placement.apply(p); });
    const TriangleMesh plane =
        make_checker_plane(translation.x(), translation.y(), config.plane_size_m, config.checker_m);
    std::vector<TriangleMesh> parts = {world_object, plane};
    if (config.distractor) {
      parts.push_back(make_distractor(bounding_box(world_object), toward_camera));
    }
    const RenderedView scene = render(merge(parts), camera);

    ScenePackage pkg;
    pkg.scene_id = std::move(scene_id);
    pkg.seed = seed;
    pkg.camera = camera;
    pkg.mesh = mesh;
    pkg.gt_rotation = rotation;
    pkg.gt_translation = translation;
    pkg.gt_scale = scale;
    pkg.symmetry = symmetry;
    pkg.rgb = scene.shaded;
    pkg.depth_clean = scene.depth;
    pkg.mask = MaskImage(config.width, config.height, 0);
    for (int y = 0; y < config.height; ++y) {
      for (int x = 0; x < config.width; ++x) {
        // The object comes first in the merged mesh, so it wins depth ties.
        if (object.silhouette(x, y) && object.depth(x, y) == scene.depth(x, y)) pkg.mask(x, y) = 1;
      }
    }
    if (config.distractor) {
      // The wall returns no depth; render it alone to find its visible pixels.
      const RenderedView wall = render(parts.back(), camera);
      for (int y = 0; y < config.height; ++y) {
        for (int x = 0; x < config.width; ++x) {
          if (wall.silhouette(x, y) && wall.depth(x, y) == scene.depth(x, y)) pkg.depth_clean(x, y) = 0.0f;
        }
      }
    }
    if (count_nonzero(pkg.mask) == 0) continue;

    pkg.depth_observed = pkg.depth_clean;
    auto noise_rng = substream(seed, "corruption");
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto& cc = config.corruption;
    DepthImage plane_depth;
    if (cc.mode == CorruptionMode::kRefraction) plane_depth = render(plane, camera).depth;
    for (int y = 0; y < config.height; ++y) {
      for (int x = 0; x < config.width; ++x) {
        if (!pkg.mask(x, y)) continue;
        float& d = pkg.depth_observed(x, y);
        switch (cc.mode) {
          case CorruptionMode::kZero:
            d = 0.0f;
            break;
          case CorruptionMode::kNoise: {
            const bool drop = unit(noise_rng) < cc.dropout;
            const double n = noise(noise_rng);
            d = drop ? 0.0f : static_cast<float>(std::max(0.0, d + cc.sigma_m * n));
            break;
          }
          case CorruptionMode::kRefraction: {
            const double n = noise(noise_rng);
            const float p = plane_depth(x, y);
            d = p > 0 ? static_cast<float>(std::max(0.0, p + cc.sigma_m * n)) : 0.0f;
            break;
          }
        }
      }
    }
    return pkg;
  }
  throw Error(ErrorCode::kFrustum,
              "object left the frame in all " + std::to_string(config.max_attempts) + " sampled poses");
}

ScenePackage make_primitive_scene(PrimitiveKind kind, const SceneConfig& config, std::uint64_t seed,
                                  std::string scene_id) {
  auto shape_rng = substream(seed, "shape");
  const PrimitiveParams params = random_params(kind, shape_rng);
  const Primitive prim = make_primitive(kind, params, seed);
  return make_scene(prim.mesh, prim.symmetry, config, seed, std::move(scene_id));
}

ScenePackage make_random_scene(const SceneConfig& config, std::uint64_t seed, std::string scene_id) {
  auto kind_rng = substream(seed, "kind");
  const auto n = static_cast<int>(std::size(kAllPrimitiveKinds));
  const PrimitiveKind kind = kAllPrimitiveKinds[std::uniform_int_distribution<int>(0, n - 1)(kind_rng)];
  return make_primitive_scene(kind, config, seed, std::move(scene_id));
}

}  // namespace meshplace
