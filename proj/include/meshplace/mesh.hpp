#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "meshplace/geometry.hpp"

namespace meshplace {

/// Indexed triangle set. Meshes produced by load_mesh are in the canonical
/// object frame: bounding box centered at the origin, max extent 1.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  /// Optional per-vertex grayscale albedo in [0, 1]; empty means uniform 1.
  std::vector<float> albedo;

  bool empty() const { return triangles.empty(); }
  float vertex_albedo(int i) const { return albedo.empty() ? 1.0f : albedo[i]; }
};

enum class MeshFormat { kObj, kPly };

struct AxisAlignedBox {
  Vec3 min;
  Vec3 max;
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
};

AxisAlignedBox bounding_box(const TriangleMesh& mesh);

/// Centers the bounding box at the origin and scales the max extent to 1.
/// Throws kEmptyGeometry for meshes without extent.
TriangleMesh normalize_to_canonical(TriangleMesh mesh);

/// Drops triangles whose area is <= min_area; returns how many were dropped.
std::size_t remove_degenerate_triangles(TriangleMesh& mesh, double min_area = 1e-12);

/// Parses OBJ or PLY (ascii / binary little-endian) and normalizes to the
/// canonical frame. Polygonal faces are fan-triangulated. Parse failures throw
/// kFormat with the byte offset in the message; meshes without triangles throw
/// kEmptyGeometry.
TriangleMesh load_mesh(std::string_view bytes, MeshFormat format);
TriangleMesh load_mesh_file(const std::filesystem::path& path);

/// Parses without normalization (used for round-trip checks and scene meshes).
TriangleMesh parse_mesh(std::string_view bytes, MeshFormat format);

/// ASCII PLY with double-precision coordinates; albedo goes to red/green/blue.
void write_ply(const TriangleMesh& mesh, std::ostream& out);
void write_obj(const TriangleMesh& mesh, std::ostream& out);

/// Concatenates meshes; albedo defaults to 1 for parts without it.
TriangleMesh merge(const std::vector<TriangleMesh>& parts);

/// Applies p -> f(p) to every vertex.
template <typename F>
TriangleMesh transformed(TriangleMesh mesh, F&& f) {
  for (auto& v : mesh.vertices) v = f(v);
  return mesh;
}

}  // namespace meshplace
