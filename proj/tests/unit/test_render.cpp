#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "meshplace/render.hpp"
#include "support.hpp"

using namespace meshplace;

namespace {

CameraModel cube_camera(int res) {
  const double c = (res - 1) / 2.0;
  return CameraModel(res, res, c, c, res, res);
}

ScaledPlacement at_depth(double z) {
  return ScaledPlacement(RigidTransform::from_rotation_translation(Mat3::Identity(), Vec3(0, 0, z)), 1.0);
}

TriangleMesh quad(double x0, double y0, double x1, double y1, double z, float albedo) {
  TriangleMesh m;
  m.vertices = {Vec3(x0, y0, z), Vec3(x1, y0, z), Vec3(x1, y1, z), Vec3(x0, y1, z)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  m.albedo.assign(4, albedo);
  return m;
}

}  // namespace

TEST(Render, CubeAtTwoMetersFrontFaceDepth) {
  const auto v = render(test::unit_cube(), cube_camera(128), at_depth(2.0));
  ASSERT_TRUE(v.silhouette(64, 64));
  EXPECT_NEAR(v.depth(64, 64), 1.5, 1e-6);
  // flat shading: cosine between the face normal and the ray to the triangle centroid
  EXPECT_NEAR(v.shaded(64, 64), 1.5 / std::sqrt(1.5 * 1.5 + 2.0 / 36.0), 1e-6);
  EXPECT_FALSE(v.silhouette(0, 0));
  EXPECT_EQ(v.depth(0, 0), 0.0f);
  EXPECT_EQ(v.shaded(0, 0), 0.0f);
}

TEST(Render, FrontFaceHasConstantZDepth) {
  const auto v = render(test::unit_cube(), cube_camera(128), at_depth(2.0));
  int covered = 0;
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      if (!v.silhouette(x, y)) continue;
      ++covered;
      EXPECT_NEAR(v.depth(x, y), 1.5, 1e-5);
    }
  }
  // face spans 128 * 1 / 1.5 pixels, about 85.3
  EXPECT_GE(covered, 85 * 85);
  EXPECT_LE(covered, 86 * 86);
}

TEST(Render, SilhouetteAndDepthAgree) {
  std::mt19937_64 rng(41);
  const auto cam = make_virtual_camera(96, 2.5);
  for (int i = 0; i < 10; ++i) {
    const ScaledPlacement p(RigidTransform::from_rotation_translation(test::random_rotation(rng), Vec3(0, 0, 2.5)),
                            1.0);
    const auto v = render(test::unit_cube(), cam, p);
    for (int y = 0; y < 96; ++y) {
      for (int x = 0; x < 96; ++x) EXPECT_EQ(v.silhouette(x, y) != 0, v.depth(x, y) > 0);
    }
  }
}

TEST(Render, FillRuleLeavesNoGapsOrOverlaps) {
  const CameraModel cam(100, 100, 0, 0, 40, 40);
  const auto v = render(quad(0.1, 0.1, 0.2, 0.2, 1.0, 1.0f), cam);
  EXPECT_EQ(count_nonzero(v.silhouette), 100u);
}

TEST(Render, AdjacentQuadsShareEdgePixelsOnce) {
  const CameraModel cam(100, 100, 0, 0, 40, 40);
  const auto both = merge({quad(0.1, 0.1, 0.2, 0.2, 1.0, 1.0f), quad(0.2, 0.1, 0.3, 0.2, 1.0, 1.0f)});
  EXPECT_EQ(count_nonzero(render(both, cam).silhouette), 200u);
}

TEST(Render, EqualDepthTieKeepsEarlierTriangle) {
  const CameraModel cam(100, 100, 0, 0, 40, 40);
  const auto first = quad(0.05, 0.05, 0.3, 0.3, 1.0, 0.25f);
  const auto second = quad(0.05, 0.05, 0.3, 0.3, 1.0, 0.75f);
  EXPECT_EQ(render(merge({first, second}), cam).shaded, render(first, cam).shaded);
  EXPECT_EQ(render(merge({second, first}), cam).shaded, render(second, cam).shaded);
}

TEST(Render, NearerSurfaceWins) {
  const CameraModel cam(100, 100, 0, 0, 40, 40);
  const auto far = quad(0.05, 0.05, 0.3, 0.3, 2.0, 0.25f);
  const auto near = quad(0.05, 0.05, 0.3, 0.3, 1.0, 0.75f);
  const auto v = render(merge({far, near}), cam);
  EXPECT_NEAR(v.depth(15, 15), 1.0, 1e-6);
  const auto alone = render(near, cam);
  EXPECT_EQ(v.shaded(15, 15), alone.shaded(15, 15));
  EXPECT_EQ(v.shaded(25, 10), alone.shaded(25, 10));
}

TEST(Render, PlacementEqualsPretransformedMesh) {
  std::mt19937_64 rng(42);
  const auto cam = make_virtual_camera(128, 2.5);
  for (int i = 0; i < 20; ++i) {
    const ScaledPlacement p(
        RigidTransform::from_rotation_translation(test::random_rotation(rng),
                                                  test::random_vec(rng, 0.3) + Vec3(0, 0, 2.5)),
        test::uniform(rng, 0.5, 1.5));
    TriangleMesh moved = test::unit_cube();
    for (auto& v : moved.vertices) v = p.apply(v);
    const auto a = render(test::unit_cube(), cam, p);
    const auto b = render(moved, cam);
    EXPECT_EQ(a.silhouette, b.silhouette);
    EXPECT_EQ(a.depth, b.depth);
    EXPECT_EQ(a.shaded, b.shaded);
  }
}

TEST(Render, DoublingResolutionKeepsBoundingBox) {
  std::mt19937_64 rng(43);
  const auto views = sample_view_sphere(16, 2.5);
  for (const auto& pose : views) {
    const ScaledPlacement p(compose(pose, RigidTransform::from_rotation_translation(test::random_rotation(rng),
                                                                                   Vec3::Zero())),
                            1.0);
    const auto lo = mask_bounds(render(test::unit_cube(), make_virtual_camera(128, 2.5), p).silhouette);
    const auto hi = mask_bounds(render(test::unit_cube(), make_virtual_camera(256, 2.5), p).silhouette);
    ASSERT_TRUE(lo && hi);
    EXPECT_LT(std::abs(hi->x0 - 2 * lo->x0), 2);
    EXPECT_LT(std::abs(hi->y0 - 2 * lo->y0), 2);
    EXPECT_LT(std::abs((hi->x0 + hi->width) - 2 * (lo->x0 + lo->width)), 2);
    EXPECT_LT(std::abs((hi->y0 + hi->height) - 2 * (lo->y0 + lo->height)), 2);
  }
}

TEST(Render, BehindCameraIsEmptyAndStraddlingIsClipped) {
  const auto cam = cube_camera(64);
  EXPECT_EQ(count_nonzero(render(test::unit_cube(), cam, at_depth(-3.0)).silhouette), 0u);
  const auto v = render(test::unit_cube(), cam, at_depth(0.2));
  for (float d : v.depth.pixels()) {
    EXPECT_TRUE(d == 0.0f || d >= 1e-3f);
    EXPECT_TRUE(std::isfinite(d));
  }
  EXPECT_GT(count_nonzero(v.silhouette), 0u);
}

TEST(Render, IsDeterministic) {
  const auto cam = make_virtual_camera(128, 2.5);
  const ScaledPlacement p(sample_view_sphere(7, 2.5)[3], 1.0);
  const auto a = render(test::unit_cube(), cam, p);
  const auto b = render(test::unit_cube(), cam, p);
  EXPECT_EQ(a.depth, b.depth);
  EXPECT_EQ(a.shaded, b.shaded);
}

TEST(ViewSphere, PosesLookAtOriginFromRadius) {
  const auto views = sample_view_sphere(128, 2.5);
  ASSERT_EQ(views.size(), 128u);
  for (const auto& v : views) {
    EXPECT_LT((v.apply(Vec3::Zero()) - Vec3(0, 0, 2.5)).norm(), 1e-12);
    EXPECT_NEAR(v.inverse().translation().norm(), 2.5, 1e-12);
  }
  EXPECT_GT(views.front().inverse().translation().z(), 2.4);
  EXPECT_LT(views.back().inverse().translation().z(), -2.4);
}

TEST(ViewSphere, SingleViewIsPole) {
  const auto v = sample_view_sphere(1, 2.0);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_LT((v[0].inverse().translation() - Vec3(0, 0, 2)).norm(), 1e-12);
  EXPECT_THROW(sample_view_sphere(0, 2.0), Error);
  EXPECT_THROW(sample_view_sphere(10, 0.0), Error);
}

TEST(ViewSphere, HundredSamplesAreWellSpread) {
  const auto views = sample_view_sphere(100, 1.0);
  std::vector<Vec3> pts;
  for (const auto& v : views) pts.push_back(v.inverse().translation());
  double min_sep = 1e9;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) min_sep = std::min(min_sep, (pts[i] - pts[j]).norm());
  }
  EXPECT_GE(min_sep, 0.6 * std::sqrt(4 * std::numbers::pi / 100));
}

TEST(ViewSphere, SamplingCell) {
  EXPECT_NEAR(view_sampling_cell(128), std::sqrt(4 * std::numbers::pi / 128), 1e-15);
  EXPECT_NEAR(view_sampling_cell(128) * 180 / std::numbers::pi * 1.5, 26.9, 0.05);
}

TEST(VirtualCamera, CanonicalBoundsStayInFrame) {
  const auto cam = make_virtual_camera(128, 2.5);
  EXPECT_EQ(cam.width(), 128);
  EXPECT_DOUBLE_EQ(cam.cx(), 63.5);
  const double r = std::sqrt(3.0) / 2.0;
  for (const auto& pose : sample_view_sphere(64, 2.5)) {
    for (int i = 0; i < 8; ++i) {
      const Vec3 corner(i & 1 ? 0.5 : -0.5, i & 2 ? 0.5 : -0.5, i & 4 ? 0.5 : -0.5);
      const auto p = cam.project_camera_frame(pose.apply(corner));
      EXPECT_GT(p.u, 0);
      EXPECT_LT(p.u, 127);
      EXPECT_GT(p.v, 0);
      EXPECT_LT(p.v, 127);
    }
  }
  // bounding sphere tangent ray lands at 95% of the half width
  const double tan_half = r / std::sqrt(2.5 * 2.5 - r * r);
  EXPECT_NEAR(cam.fx() * tan_half, 0.95 * 64, 1e-9);
  EXPECT_THROW(make_virtual_camera(4, 2.5), Error);
  EXPECT_THROW(make_virtual_camera(128, 0.5), Error);
}
