#include <gtest/gtest.h>

#include "meshplace/fusion.hpp"
#include "support.hpp"

using namespace meshplace;

namespace {

const CameraModel kCamera(100, 100, 49.5, 39.5, 100, 80);

DepthImage random_depth(std::mt19937_64& rng, int w, int h) {
  DepthImage d(w, h);
  for (auto& v : d.pixels()) v = test::uniform(rng, 0, 1) < 0.1 ? 0.0f : static_cast<float>(test::uniform(rng, 0.5, 3));
  return d;
}

ScaledPlacement at(Vec3 t, double s = 0.5) {
  return ScaledPlacement(RigidTransform::from_rotation_translation(Mat3::Identity(), t), s);
}

}  // namespace

TEST(Fuse, EmptyMaskPassesThrough) {
  std::mt19937_64 rng(71);
  const auto d = random_depth(rng, 100, 80);
  const auto f = fuse(d, MaskImage(100, 80), test::unit_cube(), at({0, 0, 2}), kCamera);
  EXPECT_EQ(f.depth, d);
  EXPECT_EQ(f.mask_pixels, 0u);
  EXPECT_DOUBLE_EQ(f.coverage(), 1.0);
  EXPECT_FALSE(f.poor_coverage);
}

TEST(Fuse, OutsideMaskIsBitIdentical) {
  std::mt19937_64 rng(72);
  for (int i = 0; i < 20; ++i) {
    const auto d = random_depth(rng, 100, 80);
    const auto mask = test::rect_mask(100, 80, test::uniform_int(rng, 0, 60), test::uniform_int(rng, 0, 40), 30, 30);
    const auto f = fuse(d, mask, test::unit_cube(), at(test::random_vec(rng, 0.3) + Vec3(0, 0, 2)), kCamera);
    for (int y = 0; y < 80; ++y) {
      for (int x = 0; x < 100; ++x) {
        if (mask(x, y)) continue;
        EXPECT_EQ(std::bit_cast<std::uint32_t>(f.depth(x, y)), std::bit_cast<std::uint32_t>(d(x, y)));
        EXPECT_EQ(f.provenance(x, y), d(x, y) > 0 ? Provenance::kOriginal : Provenance::kInvalid);
      }
    }
  }
}

TEST(Fuse, InsideMaskTakesMeshOrInvalid) {
  const DepthImage d(100, 80, 5.0f);
  const auto mask = test::rect_mask(100, 80, 30, 20, 40, 40);
  const auto f = fuse(d, mask, test::unit_cube(), at({0, 0, 2}), kCamera);
  // cube face at z = 1.75 spans about 28.6 px around the principal point
  EXPECT_EQ(f.provenance(50, 40), Provenance::kMesh);
  EXPECT_NEAR(f.depth(50, 40), 1.75, 1e-6);
  EXPECT_EQ(f.provenance(31, 21), Provenance::kInvalid);
  EXPECT_EQ(f.depth(31, 21), 0.0f);
  EXPECT_EQ(f.mask_pixels, 1600u);
  EXPECT_GE(f.covered_pixels, 28u * 28u);
  EXPECT_LE(f.covered_pixels, 29u * 29u);
  EXPECT_FALSE(f.poor_coverage);

  const auto wide = fuse(d, test::rect_mask(100, 80, 0, 0, 100, 80), test::unit_cube(), at({0, 0, 2}), kCamera);
  EXPECT_EQ(wide.covered_pixels, f.covered_pixels);
  EXPECT_TRUE(wide.poor_coverage);
}

TEST(Fuse, MeshBehindCameraGivesPoorCoverage) {
  const DepthImage d(100, 80, 5.0f);
  const auto mask = test::rect_mask(100, 80, 20, 10, 60, 60);
  const auto f = fuse(d, mask, test::unit_cube(), at({0, 0, -2}), kCamera);
  EXPECT_EQ(f.covered_pixels, 0u);
  EXPECT_TRUE(f.poor_coverage);
  for (int y = 10; y < 70; ++y) {
    for (int x = 20; x < 80; ++x) EXPECT_EQ(f.provenance(x, y), Provenance::kInvalid);
  }
}

TEST(Fuse, IsIdempotent) {
  std::mt19937_64 rng(73);
  const auto d = random_depth(rng, 100, 80);
  const auto mask = test::rect_mask(100, 80, 30, 20, 40, 40);
  const auto p = at({0.05, -0.02, 2.2}, 0.7);
  const auto once = fuse(d, mask, test::unit_cube(), p, kCamera);
  const auto twice = fuse(once.depth, mask, test::unit_cube(), p, kCamera);
  EXPECT_EQ(once.depth, twice.depth);
  EXPECT_EQ(once.covered_pixels, twice.covered_pixels);
}

TEST(Fuse, SizeMismatchThrows) {
  EXPECT_THROW(fuse(DepthImage(100, 80), MaskImage(100, 81), test::unit_cube(), at({0, 0, 2}), kCamera), Error);
  EXPECT_THROW(fuse(DepthImage(10, 8), MaskImage(10, 8), test::unit_cube(), at({0, 0, 2}), kCamera), Error);
}

TEST(PointCloud, SinglePixel) {
  const CameraModel cam(100, 100, 50, 50, 101, 101);
  FusedDepth f;
  f.depth = DepthImage(101, 101);
  f.provenance = Image<Provenance>(101, 101, Provenance::kInvalid);
  f.depth(50, 50) = 2.0f;
  f.provenance(50, 50) = Provenance::kMesh;
  const auto cloud = to_point_cloud(f, cam);
  ASSERT_EQ(cloud.size(), 1u);
  EXPECT_LT((cloud[0].position - Vec3(0, 0, 2)).norm(), 1e-12);
  EXPECT_EQ(cloud[0].provenance, Provenance::kMesh);
}

TEST(PointCloud, RowMajorAndWorldFrame) {
  const auto ext = RigidTransform::from_rotation_translation(Mat3::Identity(), Vec3(0, 0, 1));
  const CameraModel cam(100, 100, 1, 1, 3, 3, ext);
  FusedDepth f;
  f.depth = DepthImage(3, 3, 2.0f);
  f.provenance = Image<Provenance>(3, 3, Provenance::kOriginal);
  f.depth(1, 1) = 0.0f;
  const auto cloud = to_point_cloud(f, cam);
  ASSERT_EQ(cloud.size(), 8u);
  EXPECT_LT((cloud[0].position - Vec3(-0.02, -0.02, 1)).norm(), 1e-12);
  EXPECT_LT((cloud[7].position - Vec3(0.02, 0.02, 1)).norm(), 1e-12);
}
