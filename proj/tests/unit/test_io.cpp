#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "meshplace/io.hpp"
#include "support.hpp"

using namespace meshplace;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInput;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Png, GrayRoundTripsToEightBits) {
  test::TempDir dir("png");
  std::mt19937_64 rng(1);
  const auto img = test::random_gray(rng, 37, 19);
  io::write_gray_png(dir / "g.png", img);
  const auto back = io::read_gray_png(dir / "g.png");
  ASSERT_TRUE(back.same_size(img));
  for (int y = 0; y < 19; ++y) {
    for (int x = 0; x < 37; ++x) EXPECT_NEAR(back(x, y), img(x, y), 0.5 / 255 + 1e-6);
  }
}

TEST(Png, MaskRoundTrip) {
  test::TempDir dir("mask");
  const auto m = test::rect_mask(20, 10, 3, 2, 5, 4);
  io::write_mask_png(dir / "m.png", m);
  EXPECT_EQ(io::read_mask_png(dir / "m.png"), m);
}

TEST(Png, DepthMillimetersAndSaturation) {
  test::TempDir dir("depth");
  DepthImage d(4, 1);
  d(0, 0) = 1.2344f;
  d(1, 0) = 0.0f;
  d(2, 0) = 70.0f;
  d(3, 0) = 0.0004f;
  EXPECT_EQ(io::write_depth_png(dir / "d.png", d), 1u);
  const auto back = io::read_depth_png(dir / "d.png");
  EXPECT_FLOAT_EQ(back(0, 0), 1.234f);
  EXPECT_EQ(back(1, 0), 0.0f);
  EXPECT_FLOAT_EQ(back(2, 0), 65.535f);
  EXPECT_EQ(back(3, 0), 0.0f);
}

TEST(Png, Errors) {
  test::TempDir dir("pngerr");
  EXPECT_EQ(code_of([&] { io::read_gray_png(dir / "missing.png"); }), ErrorCode::kInput);
  EXPECT_NE(message_of([&] { io::read_mask_png(dir / "missing.png"); }).find("missing.png"), std::string::npos);
  io::write_text(dir / "junk.png", "not a png");
  EXPECT_EQ(code_of([&] { io::read_gray_png(dir / "junk.png"); }), ErrorCode::kFormat);
}

TEST(DepthF32, BitExactRoundTrip) {
  test::TempDir dir("f32");
  std::mt19937_64 rng(2);
  DepthImage d(13, 7);
  for (auto& v : d.pixels()) v = static_cast<float>(test::uniform(rng, 0, 9));
  d(0, 0) = 0.0f;
  d(1, 0) = std::numeric_limits<float>::denorm_min();
  io::write_depth_f32(dir / "d.f32", d);
  EXPECT_EQ(io::read_depth_f32(dir / "d.f32"), d);
  EXPECT_EQ(io::read_depth(dir / "d.f32"), d);
  EXPECT_EQ(std::filesystem::file_size(dir / "d.f32"), 16u + 13u * 7u * 4u);
}

TEST(DepthF32, RejectsBadFiles) {
  test::TempDir dir("f32err");
  io::write_depth_f32(dir / "d.f32", DepthImage(4, 4, 1.0f));
  std::filesystem::resize_file(dir / "d.f32", 40);
  EXPECT_EQ(code_of([&] { io::read_depth_f32(dir / "d.f32"); }), ErrorCode::kFormat);
  io::write_text(dir / "e.f32", "XXXX000000000000");
  EXPECT_EQ(code_of([&] { io::read_depth_f32(dir / "e.f32"); }), ErrorCode::kFormat);
  io::write_text(dir / "d.tiff", "x");
  EXPECT_EQ(code_of([&] { io::read_depth(dir / "d.tiff"); }), ErrorCode::kFormat);
}

TEST(KeyValues, ParseAndSerialize) {
  const auto kv = io::KeyValues::parse("# comment\na = 1.5\n\nname = hello world  # trailing\nv = 1 2 3\nn = 7\n", "t");
  EXPECT_DOUBLE_EQ(kv.number("a"), 1.5);
  EXPECT_EQ(kv.text("name"), "hello world");
  EXPECT_EQ(kv.numbers("v", 3), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(kv.integer("n"), 7);
  EXPECT_EQ(kv.keys(), (std::vector<std::string>{"a", "name", "v", "n"}));
  const auto again = io::KeyValues::parse(kv.serialize(), "u");
  EXPECT_EQ(again.serialize(), kv.serialize());
}

TEST(KeyValues, Errors) {
  const auto kv = io::KeyValues::parse("a = x\nb = 1.5\nv = 1 2\n", "cfg.txt");
  EXPECT_EQ(code_of([&] { kv.number("a"); }), ErrorCode::kFormat);
  EXPECT_EQ(code_of([&] { kv.integer("b"); }), ErrorCode::kFormat);
  EXPECT_EQ(code_of([&] { kv.numbers("v", 3); }), ErrorCode::kFormat);
  EXPECT_NE(message_of([&] { kv.text("zz"); }).find("cfg.txt: missing key 'zz'"), std::string::npos);
  EXPECT_NE(message_of([] { io::KeyValues::parse("ok = 1\nnot a pair\n", "f"); }).find("f:2"), std::string::npos);
}

TEST(FormatDouble, ShortestExactRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const double v = std::ldexp(test::uniform(rng, -1, 1), test::uniform_int(rng, -40, 40));
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(2.0), "2");
}

TEST(Camera, RoundTripIsExact) {
  test::TempDir dir("cam");
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto cam = test::random_camera(rng);
    io::write_camera(dir / "c.txt", cam);
    const auto back = io::read_camera(dir / "c.txt");
    EXPECT_EQ(back.fx(), cam.fx());
    EXPECT_EQ(back.cy(), cam.cy());
    EXPECT_EQ(back.width(), cam.width());
    EXPECT_EQ(back.height(), cam.height());
    EXPECT_LT((back.extrinsic().matrix() - cam.extrinsic().matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Camera, RejectsInvalid) {
  auto kv = io::camera_to_kv(CameraModel(100, 100, 50, 50, 100, 100));
  kv.set("fx_px", -1.0);
  EXPECT_THROW(io::camera_from_kv(kv), Error);
  kv = io::camera_to_kv(CameraModel(100, 100, 50, 50, 100, 100));
  kv.set("width_px", "many");
  EXPECT_THROW(io::camera_from_kv(kv), Error);
}

TEST(GroundTruth, RoundTrip) {
  test::TempDir dir("gt");
  std::mt19937_64 rng(5);
  io::GroundTruth gt{test::random_rotation(rng), test::random_vec(rng, 1), 0.23, SymmetryGroup{false, 4, true}};
  io::write_ground_truth(dir / "gt.txt", gt);
  const auto back = io::read_ground_truth(dir / "gt.txt");
  EXPECT_EQ(back.rotation, gt.rotation);
  EXPECT_EQ(back.translation, gt.translation);
  EXPECT_EQ(back.scale, gt.scale);
  EXPECT_EQ(back.symmetry, gt.symmetry);
}

TEST(Solution, RoundTrip) {
  test::TempDir dir("sol");
  std::mt19937_64 rng(6);
  ViewScore score;
  score.candidate = 17;
  score.view_index = 4;
  score.roll_index = 1;
  score.rendered = score.fully_scored = true;
  score.s_ssim = 0.7;
  score.s_edge = 0.2;
  score.s_ratio = 0.9;
  score.total = 0.61;
  const auto s = assemble_placement(test::random_rotation(rng), test::random_vec(rng, 1), 0.31, score, 0.02, 0.01);
  io::write_solution(dir / "s.txt", s);
  const auto back = io::read_solution(dir / "s.txt");
  EXPECT_EQ(back.rotation, s.rotation);
  EXPECT_EQ(back.translation, s.translation);
  EXPECT_EQ(back.scale, s.scale);
  EXPECT_EQ(back.transform, s.transform);
  EXPECT_EQ(back.residual_m, s.residual_m);
  EXPECT_TRUE(back.degraded);
  EXPECT_EQ(back.view_score.candidate, 17);
  EXPECT_EQ(back.view_score.total, 0.61);
}

TEST(ScenePackage, RoundTrip) {
  test::TempDir dir("scene");
  SceneConfig cfg;
  cfg.width = 160;
  cfg.height = 120;
  cfg.focal_px = 150;
  const auto s = make_random_scene(cfg, 9, "scene_x");
  io::write_scene(dir.path(), s);
  const auto back = io::read_scene(dir.path());
  EXPECT_EQ(back.scene_id, "scene_x");
  EXPECT_EQ(back.seed, s.seed);
  EXPECT_EQ(back.depth_observed, s.depth_observed);
  EXPECT_EQ(back.depth_clean, s.depth_clean);
  EXPECT_EQ(back.mask, s.mask);
  EXPECT_EQ(back.mesh.triangles, s.mesh.triangles);
  EXPECT_EQ(back.mesh.vertices, s.mesh.vertices);
  EXPECT_EQ(back.gt_rotation, s.gt_rotation);
  EXPECT_EQ(back.symmetry, s.symmetry);
  EXPECT_TRUE(back.has_ground_truth);

  std::filesystem::remove(dir / "gt.txt");
  EXPECT_FALSE(io::read_scene(dir.path()).has_ground_truth);
  std::filesystem::remove(dir / "mask.png");
  EXPECT_NE(message_of([&] { io::read_scene(dir.path()); }).find("mask.png"), std::string::npos);
  EXPECT_EQ(code_of([&] { io::read_scene(dir / "nope"); }), ErrorCode::kInput);
}

TEST(Text, WriteCreatesParentsAndReportsIo) {
  test::TempDir dir("text");
  io::write_text(dir / "a/b/c.txt", "hi");
  EXPECT_EQ(io::read_text(dir / "a/b/c.txt"), "hi");
  io::write_text(dir / "file", "x");
  EXPECT_EQ(code_of([&] { io::write_text(dir / "file/child.txt", "y"); }), ErrorCode::kIo);
}
