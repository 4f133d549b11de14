#include "meshplace/geometry.hpp"

#include <algorithm>
#include <Eigen/SVD>
#include <cmath>

#include "meshplace/error.hpp"

namespace meshplace {

namespace {

constexpr double kOrthonormalTolerance = 1e-9;
constexpr double kRepairTolerance = 1e-3;

}  // namespace

RigidTransform RigidTransform::from_rotation_translation(const Mat3& rotation,
                                                         const Vec3& translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::kInvalidParameter, "rigid transform has non-finite entries");
  }
  const double ortho_err = (rotation.transpose() * rotation - Mat3::Identity()).norm();
  const double det = rotation.determinant();
  if (ortho_err <= kOrthonormalTolerance && std::abs(det - 1.0) <= kOrthonormalTolerance) {
    return RigidTransform(rotation, translation);
  }
  if (ortho_err > kRepairTolerance || det <= 0) {
    throw Error(ErrorCode::kInvalidParameter, "matrix is not a proper rotation");
  }
  // Nearest rotation in the Frobenius sense.
  Eigen::JacobiSVD<Mat3> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 repaired = svd.matrixU() * svd.matrixV().transpose();
  return RigidTransform(repaired, translation);
}

RigidTransform RigidTransform::from_matrix(const Mat4& m) {
  if (m.row(3).head<3>().norm() > kRepairTolerance || std::abs(m(3, 3) - 1.0) > kRepairTolerance) {
    throw Error(ErrorCode::kInvalidParameter, "4x4 matrix bottom row must be (0 0 0 1)");
  }
  return from_rotation_translation(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

RigidTransform RigidTransform::from_quaternion(const Eigen::Quaterniond& q, const Vec3& t) {
  if (q.norm() < 1e-12) throw Error(ErrorCode::kInvalidParameter, "zero quaternion");
  return RigidTransform(q.normalized().toRotationMatrix(), t);
}

RigidTransform RigidTransform::rotation_about(const Vec3& axis, double angle_rad) {
  if (axis.norm() < 1e-12) throw Error(ErrorCode::kInvalidParameter, "zero rotation axis");
  return RigidTransform(Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix(),
                        Vec3::Zero());
}

RigidTransform RigidTransform::translation_only(const Vec3& t) {
  return RigidTransform(Mat3::Identity(), t);
}

RigidTransform RigidTransform::inverse() const {
  Mat3 rt = rotation_.transpose();
  return RigidTransform(rt, -(rt * translation_));
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform(a.rotation_ * b.rotation_, a.rotation_ * b.translation_ + a.translation_);
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const Mat3 rel = a.transpose() * b;
  const double c = std::clamp((rel.trace() - 1.0) * 0.5, -1.0, 1.0);
  // acos loses precision near zero; use the skew part for small angles.
  const Vec3 skew(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  return std::atan2(0.5 * skew.norm(), c);
}

RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  Vec3 forward = target - eye;
  if (forward.norm() < 1e-12) {
    throw Error(ErrorCode::kInvalidParameter, "look_at eye and target coincide");
  }
  forward.normalize();
  Vec3 hint = up.normalized();
  if (std::abs(forward.dot(hint)) > 0.999) hint = Vec3::UnitY();
  const Vec3 right = forward.cross(hint).normalized();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  return RigidTransform::from_rotation_translation(r, -(r * eye));
}

ScaledPlacement::ScaledPlacement(RigidTransform transform, double scale)
    : transform_(std::move(transform)), scale_(scale) {
  if (!(scale > 0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidParameter, "placement scale must be positive");
  }
}

Vec3 ScaledPlacement::inverse_apply(const Vec3& p) const {
  return transform_.rotation().transpose() * (p - transform_.translation()) / scale_;
}

CameraModel::CameraModel(double fx, double fy, double cx, double cy, int width, int height,
                         RigidTransform camera_from_world)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(width), height_(height),
      extrinsic_(std::move(camera_from_world)) {
  if (!(fx > 0) || !(fy > 0)) throw Error(ErrorCode::kInvalidParameter, "focal lengths must be > 0");
  if (width < 1 || height < 1) throw Error(ErrorCode::kInvalidParameter, "image size must be >= 1");
  if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height)) {
    throw Error(ErrorCode::kInvalidParameter, "principal point outside the image");
  }
}

CameraModel CameraModel::with_extrinsic(const RigidTransform& camera_from_world) const {
  CameraModel out = *this;
  out.extrinsic_ = camera_from_world;
  return out;
}

Projection CameraModel::project_camera_frame(const Vec3& p) const {
  if (!(p.z() > 0)) throw Error(ErrorCode::kBehindCamera, "point at or behind the camera plane");
  return {fx_ * p.x() / p.z() + cx_, fy_ * p.y() / p.z() + cy_, p.z()};
}

Projection CameraModel::project(const Vec3& world) const {
  return project_camera_frame(extrinsic_.apply(world));
}

Vec3 CameraModel::unproject_camera_frame(double u, double v, double depth) const {
  if (!(depth > 0)) throw Error(ErrorCode::kInvalidDepth, "unproject requires depth > 0");
  return {(u - cx_) / fx_ * depth, (v - cy_) / fy_ * depth, depth};
}

Vec3 CameraModel::unproject(double u, double v, double depth) const {
  const Vec3 pc = unproject_camera_frame(u, v, depth);
  return extrinsic_.rotation().transpose() * (pc - extrinsic_.translation());
}

Vec3 CameraModel::ray_direction(double u, double v) const {
  return Vec3((u - cx_) / fx_, (v - cy_) / fy_, 1.0).normalized();
}

Vec3 CameraModel::center_world() const {
  return -(extrinsic_.rotation().transpose() * extrinsic_.translation());
}

}  // namespace meshplace
