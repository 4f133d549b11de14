#include <gtest/gtest.h>

#include <map>
#include <set>

#include "meshplace/primitives.hpp"
#include "support.hpp"

using namespace meshplace;

namespace {

// Directed edge counts: a closed, consistently oriented surface has every
// edge exactly once in each direction.
bool is_watertight(const TriangleMesh& m) {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) ++directed[{t[k], t[(k + 1) % 3]}];
  }
  for (const auto& [e, n] : directed) {
    if (n != 1) return false;
    const auto it = directed.find({e.second, e.first});
    if (it == directed.end() || it->second != 1) return false;
  }
  return true;
}

int euler_characteristic(const TriangleMesh& m) {
  std::set<std::pair<int, int>> edges;
  std::set<int> used;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      edges.insert(std::minmax(t[k], t[(k + 1) % 3]));
      used.insert(t[k]);
    }
  }
  return static_cast<int>(used.size()) - static_cast<int>(edges.size()) + static_cast<int>(m.triangles.size());
}

double signed_volume(const TriangleMesh& m) {
  double v = 0;
  for (const auto& t : m.triangles) {
    v += m.vertices[t[0]].dot(m.vertices[t[1]].cross(m.vertices[t[2]])) / 6.0;
  }
  return v;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInput;
}

}  // namespace

TEST(Primitive, BoxCounts) {
  const auto p = make_primitive(PrimitiveKind::kBox, {}, 1);
  EXPECT_EQ(p.mesh.vertices.size(), 8u);
  EXPECT_EQ(p.mesh.triangles.size(), 12u);
  EXPECT_EQ(p.symmetry, (SymmetryGroup{false, 4, true}));
  PrimitiveParams flat;
  flat.depth = 0.5;
  EXPECT_EQ(make_primitive(PrimitiveKind::kBox, flat, 1).symmetry, (SymmetryGroup{false, 2, true}));
}

TEST(Primitive, CylinderCounts) {
  PrimitiveParams p;
  p.segments = 64;
  const auto c = make_primitive(PrimitiveKind::kCylinder, p, 2);
  EXPECT_EQ(c.mesh.vertices.size(), 2u * 64u + 2u);
  EXPECT_EQ(euler_characteristic(c.mesh), 2);
  EXPECT_TRUE(c.symmetry.continuous_z);
  EXPECT_FALSE(c.symmetry.flip);
}

TEST(Primitive, AllKindsAreClosedOutwardAndCanonical) {
  std::mt19937_64 rng(91);
  for (const auto kind : kAllPrimitiveKinds) {
    for (int i = 0; i < 10; ++i) {
      auto params = random_params(kind, rng);
      params.profile_subdivisions = 1 + i % 3;
      const auto p = make_primitive(kind, params, static_cast<std::uint64_t>(i));
      SCOPED_TRACE(std::string(to_string(kind)));
      EXPECT_TRUE(is_watertight(p.mesh));
      EXPECT_EQ(euler_characteristic(p.mesh), 2);
      EXPECT_GT(signed_volume(p.mesh), 0);
      const auto box = bounding_box(p.mesh);
      EXPECT_NEAR(box.extent().maxCoeff(), 1.0, 1e-12);
      EXPECT_LT(box.center().norm(), 1e-12);
      ASSERT_EQ(p.mesh.albedo.size(), p.mesh.vertices.size());
      for (float a : p.mesh.albedo) {
        EXPECT_GE(a, 0.0f);
        EXPECT_LE(a, 1.0f);
      }
    }
  }
}

TEST(Primitive, RevolvedAlbedoDarkerAtBase) {
  std::mt19937_64 rng(92);
  for (const auto kind : {PrimitiveKind::kCylinder, PrimitiveKind::kBottle, PrimitiveKind::kGoblet}) {
    const auto p = make_primitive(kind, random_params(kind, rng), 5);
    EXPECT_LT(p.mesh.albedo.front(), p.mesh.albedo.back()) << to_string(kind);
  }
}

TEST(Primitive, ParameterErrors) {
  PrimitiveParams p;
  p.apex_angle_deg = 0;
  EXPECT_EQ(code_of([&] { make_primitive(PrimitiveKind::kCone, p, 1); }), ErrorCode::kInvalidParameter);
  p.apex_angle_deg = 180;
  EXPECT_EQ(code_of([&] { make_primitive(PrimitiveKind::kCone, p, 1); }), ErrorCode::kInvalidParameter);
  p = {};
  p.segments = 2;
  EXPECT_EQ(code_of([&] { make_primitive(PrimitiveKind::kCylinder, p, 1); }), ErrorCode::kInvalidParameter);
  p = {};
  p.width = 0;
  EXPECT_EQ(code_of([&] { make_primitive(PrimitiveKind::kBox, p, 1); }), ErrorCode::kInvalidParameter);
  p = {};
  p.stem_radius = 0.5;
  EXPECT_EQ(code_of([&] { make_primitive(PrimitiveKind::kGoblet, p, 1); }), ErrorCode::kInvalidParameter);
  p = {};
  p.neck_radius = 0.4;
  EXPECT_EQ(code_of([&] { make_primitive(PrimitiveKind::kBottle, p, 1); }), ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([&] { make_primitive(PrimitiveKind::kFlask, p, 1); }), ErrorCode::kInvalidParameter);
}

TEST(Primitive, DeterministicPerSeed) {
  for (const auto kind : kAllPrimitiveKinds) {
    auto r1 = substream(7, "shape"), r2 = substream(7, "shape");
    const auto a = make_primitive(kind, random_params(kind, r1), 7);
    const auto b = make_primitive(kind, random_params(kind, r2), 7);
    EXPECT_EQ(a.mesh.vertices, b.mesh.vertices);
    EXPECT_EQ(a.mesh.albedo, b.mesh.albedo);
  }
  const auto c = make_primitive(PrimitiveKind::kCylinder, {}, 1);
  const auto d = make_primitive(PrimitiveKind::kCylinder, {}, 2);
  EXPECT_EQ(c.mesh.vertices, d.mesh.vertices);
  EXPECT_NE(c.mesh.albedo, d.mesh.albedo);
}

TEST(Primitive, RandomParamsStayInRange) {
  std::mt19937_64 rng(93);
  for (int i = 0; i < 200; ++i) {
    const auto box = random_params(PrimitiveKind::kBox, rng);
    EXPECT_GE(box.width, 0.5);
    EXPECT_LE(box.width, 1.0);
    const auto cone = random_params(PrimitiveKind::kCone, rng);
    EXPECT_GE(cone.apex_angle_deg, 30);
    EXPECT_LE(cone.apex_angle_deg, 80);
    const auto goblet = random_params(PrimitiveKind::kGoblet, rng);
    EXPECT_GT(goblet.foot_radius, goblet.bowl_radius);
    EXPECT_LT(goblet.stem_radius, goblet.bowl_radius);
  }
}

TEST(Primitive, KindNames) {
  for (const auto kind : kAllPrimitiveKinds) EXPECT_EQ(parse_primitive_kind(to_string(kind)), kind);
  EXPECT_THROW(parse_primitive_kind("teapot"), Error);
}

TEST(Substream, IndependentByName) {
  auto a = substream(1, "a"), a2 = substream(1, "a"), b = substream(1, "b"), c = substream(2, "a");
  const auto x = a();
  EXPECT_EQ(x, a2());
  EXPECT_NE(x, b());
  EXPECT_NE(x, c());
}
