#include "meshplace/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "meshplace/error.hpp"

namespace meshplace {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

float quantized_albedo(double a) {
  return static_cast<float>(std::lround(std::clamp(a, 0.0, 1.0) * 255.0) / 255.0);
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidParameter, what);
}

struct ProfilePoint {
  double r;
  double z;
};

// Surface of revolution: bottom pole, one ring per profile point, top pole.
// Every profile radius must be > 0.
TriangleMesh revolve(std::vector<ProfilePoint> profile, double bottom_z, double top_z, int segments,
                     int subdivisions, std::mt19937_64& rng) {
  if (subdivisions > 1) {
    std::vector<ProfilePoint> fine;
    for (std::size_t i = 0; i + 1 < profile.size(); ++i) {
      for (int s = 0; s < subdivisions; ++s) {
        const double t = static_cast<double>(s) / subdivisions;
        fine.push_back({profile[i].r + t * (profile[i + 1].r - profile[i].r),
                        profile[i].z + t * (profile[i + 1].z - profile[i].z)});
      }
    }
    fine.push_back(profile.back());
    profile = std::move(fine);
  }
  TriangleMesh mesh;
  const int rings = static_cast<int>(profile.size());
  // Dark base to bright top plus seeded bands, so the two ends of the axis
  // look different and only rotations about z leave the appearance unchanged.
  std::uniform_real_distribution<double> band(-1.0, 1.0);
  const double z0 = profile.front().z, z1 = profile.back().z;
  std::vector<float> ring_albedo(rings);
  for (int k = 0; k < rings; ++k) {
    const double h = z1 > z0 ? (profile[k].z - z0) / (z1 - z0) : 0.0;
    ring_albedo[k] = quantized_albedo(0.3 + 0.5 * h + 0.08 * band(rng));
  }

  mesh.vertices.emplace_back(0.0, 0.0, bottom_z);
  mesh.albedo.push_back(ring_albedo.front());
  for (int k = 0; k < rings; ++k) {
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * std::numbers::pi * s / segments;
      mesh.vertices.emplace_back(profile[k].r * std::cos(phi), profile[k].r * std::sin(phi), profile[k].z);
      mesh.albedo.push_back(ring_albedo[k]);
    }
  }
  const int top = static_cast<int>(mesh.vertices.size());
  mesh.vertices.emplace_back(0.0, 0.0, top_z);
  mesh.albedo.push_back(ring_albedo.back());

  const auto ring_vertex = [&](int k, int s) { return 1 + k * segments + (s % segments); };
  for (int s = 0; s < segments; ++s) mesh.triangles.push_back({0, ring_vertex(0, s + 1), ring_vertex(0, s)});
  for (int k = 0; k + 1 < rings; ++k) {
    for (int s = 0; s < segments; ++s) {
      const int a = ring_vertex(k, s), b = ring_vertex(k, s + 1);
      const int c = ring_vertex(k + 1, s), d = ring_vertex(k + 1, s + 1);
      mesh.triangles.push_back({a, b, d});
      mesh.triangles.push_back({a, d, c});
    }
  }
  for (int s = 0; s < segments; ++s) {
    mesh.triangles.push_back({top, ring_vertex(rings - 1, s), ring_vertex(rings - 1, s + 1)});
  }
  return mesh;
}

TriangleMesh make_box(const PrimitiveParams& p, std::mt19937_64& rng) {
  require(p.width > 0 && p.depth > 0 && p.height > 0, "box dimensions must be > 0");
  TriangleMesh mesh;
  const double hx = p.width / 2, hy = p.depth / 2, hz = p.height / 2;
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.emplace_back((i & 1) ? hx : -hx, (i & 2) ? hy : -hy, (i & 4) ? hz : -hz);
  }
  // Outward-facing quads split into two triangles each.
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    mesh.triangles.push_back({q[0], q[1], q[2]});
    mesh.triangles.push_back({q[0], q[2], q[3]});
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  mesh.albedo.assign(8, quantized_albedo(0.5 + 0.35 * u(rng)));
  return mesh;
}

}  // namespace

std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(fnv1a(name))));
}

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::kBox: return "box";
    case PrimitiveKind::kCylinder: return "cylinder";
    case PrimitiveKind::kCone: return "cone";
    case PrimitiveKind::kGoblet: return "goblet";
    case PrimitiveKind::kBottle: return "bottle";
    case PrimitiveKind::kFlask: return "flask";
  }
  return "unknown";
}

PrimitiveKind parse_primitive_kind(std::string_view text) {
  for (auto k : kAllPrimitiveKinds) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::kInvalidParameter, "unknown primitive kind '" + std::string(text) + "'");
}

Primitive make_primitive(PrimitiveKind kind, const PrimitiveParams& p, std::uint64_t seed) {
  require(p.segments >= 3, "segments must be >= 3");
  require(p.profile_subdivisions >= 1, "profile subdivisions must be >= 1");
  auto rng = substream(seed, "albedo");
  Primitive out;
  out.kind = kind;
  out.symmetry.continuous_z = true;
  const int seg = p.segments;
  const int sub = p.profile_subdivisions;
  switch (kind) {
    case PrimitiveKind::kBox:
      out.mesh = make_box(p, rng);
      out.symmetry = {false, p.width == p.depth ? 4 : 2, true};
      break;
    case PrimitiveKind::kCylinder:
      require(p.radius > 0 && p.height > 0, "cylinder radius and height must be > 0");
      out.mesh = revolve({{p.radius, 0.0}, {p.radius, p.height}}, 0.0, p.height, seg, sub, rng);
      break;
    case PrimitiveKind::kCone: {
      require(p.apex_angle_deg > 0 && p.apex_angle_deg < 180, "cone apex angle must be in (0, 180) degrees");
      require(p.height > 0, "cone height must be > 0");
      const double r = p.height * std::tan(p.apex_angle_deg * std::numbers::pi / 360.0);
      require(r > 1e-6 * p.height, "cone apex angle too small");
      out.mesh = revolve({{r, 0.0}}, 0.0, p.height, seg, sub, rng);
      break;
    }
    case PrimitiveKind::kGoblet: {
      require(p.stem_radius > 0 && p.bowl_radius > 0 && p.foot_radius > 0, "goblet radii must be > 0");
      require(p.stem_radius < p.bowl_radius, "goblet stem radius must be < bowl radius");
      require(p.stem_radius < p.foot_radius, "goblet stem radius must be < foot radius");
      require(p.foot_height > 0 && p.stem_height > 0 && p.bowl_height > 0, "goblet heights must be > 0");
      std::vector<ProfilePoint> profile = {{p.foot_radius, 0.0}, {p.foot_radius, p.foot_height},
                                           {p.stem_radius, p.foot_height * 1.5}};
      const double stem_top = p.foot_height + p.stem_height;
      profile.push_back({p.stem_radius, stem_top});
      constexpr int kBowlSteps = 8;
      for (int i = 1; i <= kBowlSteps; ++i) {
        const double t = static_cast<double>(i) / kBowlSteps;
        profile.push_back({p.stem_radius + (p.bowl_radius - p.stem_radius) * std::sin(t * std::numbers::pi / 2),
                           stem_top + p.bowl_height * t});
      }
      out.mesh = revolve(profile, 0.0, stem_top + p.bowl_height, seg, sub, rng);
      break;
    }
    case PrimitiveKind::kBottle: {
      require(p.radius > 0 && p.neck_radius > 0 && p.neck_radius < p.radius, "bottle needs 0 < neck radius < radius");
      require(p.height > 0 && p.shoulder_height > 0 && p.neck_height > 0, "bottle heights must be > 0");
      std::vector<ProfilePoint> profile = {{p.radius, 0.0}, {p.radius, p.height}};
      constexpr int kShoulderSteps = 6;
      for (int i = 1; i <= kShoulderSteps; ++i) {
        const double t = static_cast<double>(i) / kShoulderSteps;
        profile.push_back({p.neck_radius + (p.radius - p.neck_radius) * 0.5 * (1 + std::cos(t * std::numbers::pi)),
                           p.height + p.shoulder_height * t});
      }
      const double top = p.height + p.shoulder_height + p.neck_height;
      profile.push_back({p.neck_radius, top});
      out.mesh = revolve(profile, 0.0, top, seg, sub, rng);
      break;
    }
    case PrimitiveKind::kFlask: {
      require(p.radius > 0 && p.neck_radius > 0 && p.neck_radius < p.radius, "flask needs 0 < neck radius < radius");
      require(p.height > 0 && p.neck_height > 0, "flask heights must be > 0");
      const double foot = 0.06 * p.height;
      std::vector<ProfilePoint> profile = {{p.radius, 0.0}, {p.radius, foot},
                                           {p.neck_radius, p.height}};
      const double top = p.height + p.neck_height;
      profile.push_back({p.neck_radius * 1.08, top});
      out.mesh = revolve(profile, 0.0, top, seg, sub, rng);
      break;
    }
  }
  out.mesh = normalize_to_canonical(std::move(out.mesh));
  return out;
}

PrimitiveParams random_params(PrimitiveKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto range = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  PrimitiveParams p;
  switch (kind) {
    case PrimitiveKind::kBox:
      p.width = range(0.5, 1.0);
      p.depth = range(0.3, 0.8);
      p.height = range(0.4, 1.2);
      break;
    case PrimitiveKind::kCylinder:
      p.radius = range(0.2, 0.45);
      p.height = range(0.5, 1.2);
      break;
    case PrimitiveKind::kCone:
      p.apex_angle_deg = range(30, 80);
      p.height = 1.0;
      break;
    case PrimitiveKind::kGoblet:
      p.bowl_radius = range(0.3, 0.4);
      p.bowl_height = range(0.35, 0.5);
      p.stem_radius = range(0.04, 0.08);
      p.stem_height = range(0.25, 0.45);
      // The bowl is nearer the camera and projects wider than the foot. The
      // contact edge has to come from the foot, so the foot is the wider part.
      p.foot_radius = p.bowl_radius * range(1.1, 1.3);
      p.foot_height = range(0.03, 0.06);
      break;
    case PrimitiveKind::kBottle:
      p.radius = range(0.25, 0.4);
      p.height = range(0.5, 0.9);
      p.neck_radius = range(0.07, 0.12);
      p.neck_height = range(0.2, 0.35);
      p.shoulder_height = range(0.1, 0.2);
      break;
    case PrimitiveKind::kFlask:
      p.radius = range(0.35, 0.5);
      p.height = range(0.6, 0.9);
      p.neck_radius = range(0.08, 0.13);
      p.neck_height = range(0.2, 0.35);
      break;
  }
  return p;
}

}  // namespace meshplace
