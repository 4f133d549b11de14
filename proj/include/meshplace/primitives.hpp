#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "meshplace/mesh.hpp"
#include "meshplace/metrics.hpp"

namespace meshplace {

enum class PrimitiveKind { kBox, kCylinder, kCone, kGoblet, kBottle, kFlask };

inline constexpr PrimitiveKind kAllPrimitiveKinds[] = {PrimitiveKind::kBox,    PrimitiveKind::kCylinder,
                                                       PrimitiveKind::kCone,   PrimitiveKind::kGoblet,
                                                       PrimitiveKind::kBottle, PrimitiveKind::kFlask};

std::string_view to_string(PrimitiveKind kind);
PrimitiveKind parse_primitive_kind(std::string_view text);

/// Shape parameters in arbitrary units (the mesh is normalized afterwards).
/// Each kind reads only its own fields.
struct PrimitiveParams {
  // box; `height` is also the body height of cylinder, cone and flask
  double width = 1.0;
  double depth = 1.0;
  double height = 1.0;
  // cylinder, bottle body, flask base
  double radius = 0.3;
  // cone: full opening angle at the apex, degrees, in (0, 180)
  double apex_angle_deg = 40.0;
  // goblet
  double bowl_radius = 0.35;
  double bowl_height = 0.45;
  double stem_radius = 0.05;
  double stem_height = 0.35;
  double foot_radius = 0.28;
  double foot_height = 0.04;
  // bottle / flask
  double neck_radius = 0.1;
  double neck_height = 0.25;
  double shoulder_height = 0.15;

  int segments = 48;              // around the z axis
  int profile_subdivisions = 1;   // extra rings per profile segment
};

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kBox;
  TriangleMesh mesh;  // canonical frame, +z up
  SymmetryGroup symmetry;
};

/// Watertight canonical mesh. Revolved shapes get an albedo ramp along z with
/// seed-dependent bands (z symmetry is kept, the flip is broken); boxes get a
/// uniform seeded albedo.
/// Throws kInvalidParameter for out-of-range parameters.
Primitive make_primitive(PrimitiveKind kind, const PrimitiveParams& params, std::uint64_t seed);

/// Parameters drawn from the documented ranges for `kind`.
PrimitiveParams random_params(PrimitiveKind kind, std::mt19937_64& rng);

/// Deterministic generator for a named sub-stream of a seed.
std::mt19937_64 substream(std::uint64_t seed, std::string_view name);

}  // namespace meshplace
