#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace meshplace {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Proper rigid motion p -> R p + t. The rotation block is kept orthonormal
/// with det +1; every constructor that accepts an arbitrary matrix validates it.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  /// Re-orthonormalizes `rotation` when it is within 1e-3 of SO(3) and
  /// rejects it otherwise (including reflections).
  static RigidTransform from_rotation_translation(const Mat3& rotation, const Vec3& translation);
  static RigidTransform from_matrix(const Mat4& matrix);
  static RigidTransform from_quaternion(const Eigen::Quaterniond& q, const Vec3& translation);
  static RigidTransform rotation_about(const Vec3& axis, double angle_rad);
  static RigidTransform translation_only(const Vec3& t);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  RigidTransform inverse() const;
  Mat4 matrix() const;

  bool operator==(const RigidTransform&) const = default;

 private:
  RigidTransform(const Mat3& r, const Vec3& t) : rotation_(r), translation_(t) {}
  friend RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

  Mat3 rotation_;
  Vec3 translation_;
};

/// a ∘ b: apply(compose(a, b), p) == a.apply(b.apply(p)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Geodesic angle (radians) between two rotations.
double rotation_angle_between(const Mat3& a, const Mat3& b);

/// Camera-from-world transform for a camera at `eye` looking at `target`.
/// Camera axes: x right, y down, z forward. `up` is a world-space hint; when it
/// is nearly parallel to the viewing direction the world y axis is used instead.
RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up);

/// Uniform scale followed by a rigid transform: p -> R (s p) + t.
class ScaledPlacement {
 public:
  ScaledPlacement() = default;
  ScaledPlacement(RigidTransform transform, double scale);

  const RigidTransform& transform() const { return transform_; }
  double scale() const { return scale_; }

  Vec3 apply(const Vec3& p) const {
    return transform_.rotation() * (scale_ * p) + transform_.translation();
  }
  Vec3 inverse_apply(const Vec3& p) const;

 private:
  RigidTransform transform_;
  double scale_ = 1.0;
};

struct Projection {
  double u = 0;
  double v = 0;
  double depth = 0;  // camera-frame z
};

/// Pinhole camera. Pixel (i, j) has its center at u = i, v = j. Depth is
/// z-depth along the viewing direction, not ray length.
class CameraModel {
 public:
  CameraModel() = default;
  CameraModel(double fx, double fy, double cx, double cy, int width, int height,
              RigidTransform camera_from_world = {});

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const RigidTransform& extrinsic() const { return extrinsic_; }

  CameraModel with_extrinsic(const RigidTransform& camera_from_world) const;

  /// World point to (u, v, z). Throws kBehindCamera when z <= 0.
  Projection project(const Vec3& world) const;
  /// Camera-frame point to (u, v, z). Throws kBehindCamera when z <= 0.
  Projection project_camera_frame(const Vec3& p) const;
  /// Throws kInvalidDepth when depth <= 0.
  Vec3 unproject(double u, double v, double depth) const;
  /// Same as unproject but returns the camera-frame point.
  Vec3 unproject_camera_frame(double u, double v, double depth) const;
  /// Unit direction in the camera frame through pixel (u, v).
  Vec3 ray_direction(double u, double v) const;
  Vec3 center_world() const;

  bool in_bounds(double u, double v) const {
    return u >= -0.5 && v >= -0.5 && u < width_ - 0.5 && v < height_ - 0.5;
  }

 private:
  double fx_ = 1, fy_ = 1, cx_ = 0, cy_ = 0;
  int width_ = 1, height_ = 1;
  RigidTransform extrinsic_;
};

}  // namespace meshplace
