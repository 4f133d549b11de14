#include "meshplace/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace meshplace {

namespace {

struct ScreenVertex {
  double x;   // u
  double y;   // v
  double iz;  // 1 / z
};

bool lex_less(const ScreenVertex& a, const ScreenVertex& b) {
  return a.x < b.x || (a.x == b.x && a.y < b.y);
}

// Edge function evaluated with a canonical endpoint order so that a shared edge
// yields exactly opposite values in its two triangles.
double edge_fn(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
  if (lex_less(b, a)) {
    return -((a.x - b.x) * (py - b.y) - (a.y - b.y) * (px - b.x));
  }
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

// Owner of pixels lying exactly on an edge: antisymmetric in (a, b).
bool owns_edge(const ScreenVertex& a, const ScreenVertex& b) {
  const double dy = b.y - a.y;
  const double dx = b.x - a.x;
  return dy > 0 || (dy == 0 && dx < 0);
}

bool covers(double w, const ScreenVertex& a, const ScreenVertex& b) {
  return w > 0 || (w == 0 && owns_edge(a, b));
}

struct Buffers {
  std::vector<double> zbuf;
  RenderedView* view;
  int width;
  int height;
};

void raster_triangle(ScreenVertex p0, ScreenVertex p1, ScreenVertex p2, float shade,
                     const RenderOptions& options, Buffers& buf) {
  double area = edge_fn(p0, p1, p2.x, p2.y);
  if (!(std::abs(area) > 0) || !std::isfinite(area)) return;
  if (area < 0) {
    std::swap(p1, p2);
    area = -area;
  }
  const double min_x = std::min({p0.x, p1.x, p2.x});
  const double max_x = std::max({p0.x, p1.x, p2.x});
  const double min_y = std::min({p0.y, p1.y, p2.y});
  const double max_y = std::max({p0.y, p1.y, p2.y});
  const int x_begin = std::max(0, static_cast<int>(std::ceil(min_x)));
  const int x_end = std::min(buf.width - 1, static_cast<int>(std::floor(max_x)));
  const int y_begin = std::max(0, static_cast<int>(std::ceil(min_y)));
  const int y_end = std::min(buf.height - 1, static_cast<int>(std::floor(max_y)));
  if (x_begin > x_end || y_begin > y_end) return;

  const double inv_area = 1.0 / area;
  for (int y = y_begin; y <= y_end; ++y) {
    for (int x = x_begin; x <= x_end; ++x) {
      const double w0 = edge_fn(p1, p2, x, y);
      if (!covers(w0, p1, p2)) continue;
      const double w1 = edge_fn(p2, p0, x, y);
      if (!covers(w1, p2, p0)) continue;
      const double w2 = edge_fn(p0, p1, x, y);
      if (!covers(w2, p0, p1)) continue;
      const double iz = (w0 * p0.iz + w1 * p1.iz + w2 * p2.iz) * inv_area;
      if (!(iz > 0)) continue;
      const double z = 1.0 / iz;
      if (z < options.near || z > options.far) continue;
      const std::size_t idx = static_cast<std::size_t>(y) * buf.width + x;
      if (z < buf.zbuf[idx]) {
        buf.zbuf[idx] = z;
        buf.view->depth(x, y) = static_cast<float>(z);
        buf.view->silhouette(x, y) = 1;
        buf.view->shaded(x, y) = shade;
      }
    }
  }
}

// Point on segment (a, b) with z == near, computed with canonical endpoint order.
Vec3 clip_point(const Vec3& a, const Vec3& b, double near) {
  const bool swap = b.x() < a.x() || (b.x() == a.x() && (b.y() < a.y() || (b.y() == a.y() && b.z() < a.z())));
  const Vec3& p = swap ? b : a;
  const Vec3& q = swap ? a : b;
  const double t = (near - p.z()) / (q.z() - p.z());
  Vec3 out = p + t * (q - p);
  out.z() = near;
  return out;
}

}  // namespace

RenderedView render(const TriangleMesh& mesh, const CameraModel& camera,
                    const ScaledPlacement& placement, const RenderOptions& options) {
  const int width = camera.width();
  const int height = camera.height();
  RenderedView view;
  view.camera_pose = camera.extrinsic();
  view.silhouette = MaskImage(width, height, 0);
  view.depth = DepthImage(width, height, 0.0f);
  view.shaded = GrayImage(width, height, 0.0f);

  std::vector<Vec3> cam(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    cam[i] = camera.extrinsic().apply(placement.apply(mesh.vertices[i]));
  }

  Buffers buf{std::vector<double>(static_cast<std::size_t>(width) * height,
                                  std::numeric_limits<double>::infinity()),
              &view, width, height};

  const auto to_screen = [&](const Vec3& p) {
    return ScreenVertex{camera.fx() * p.x() / p.z() + camera.cx(),
                        camera.fy() * p.y() / p.z() + camera.cy(), 1.0 / p.z()};
  };

  for (const auto& tri : mesh.triangles) {
    const std::array<Vec3, 3> v = {cam[tri[0]], cam[tri[1]], cam[tri[2]]};
    const bool all_behind = v[0].z() < options.near && v[1].z() < options.near && v[2].z() < options.near;
    const bool all_far = v[0].z() > options.far && v[1].z() > options.far && v[2].z() > options.far;
    if (all_behind || all_far) continue;

    const Vec3 normal = (v[1] - v[0]).cross(v[2] - v[0]);
    const double nlen = normal.norm();
    if (!(nlen > 0)) continue;
    const Vec3 centroid = (v[0] + v[1] + v[2]) / 3.0;
    const double cos_theta = std::abs(normal.dot(centroid)) / (nlen * centroid.norm());
    const double albedo = (mesh.vertex_albedo(tri[0]) + mesh.vertex_albedo(tri[1]) +
                           mesh.vertex_albedo(tri[2])) / 3.0;
    const auto shade = static_cast<float>(std::clamp(albedo * cos_theta, 0.0, 1.0));

    // Sutherland-Hodgman against z >= near.
    std::array<Vec3, 4> poly;
    int count = 0;
    for (int i = 0; i < 3; ++i) {
      const Vec3& a = v[i];
      const Vec3& b = v[(i + 1) % 3];
      const bool a_in = a.z() >= options.near;
      const bool b_in = b.z() >= options.near;
      if (a_in) poly[count++] = a;
      if (a_in != b_in) poly[count++] = clip_point(a, b, options.near);
    }
    if (count < 3) continue;
    std::array<ScreenVertex, 4> s;
    for (int i = 0; i < count; ++i) s[i] = to_screen(poly[i]);
    for (int i = 1; i + 1 < count; ++i) raster_triangle(s[0], s[i], s[i + 1], shade, options, buf);
  }
  return view;
}

std::vector<RigidTransform> sample_view_sphere(int n, double radius) {
  if (n < 1 || !(radius > 0)) throw Error(ErrorCode::kInvalidParameter, "view sphere needs n >= 1 and radius > 0");
  std::vector<RigidTransform> poses;
  poses.reserve(n);
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    Vec3 dir = Vec3::UnitZ();
    if (n > 1) {
      const double z = 1.0 - (2.0 * i + 1.0) / n;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden_angle * i;
      dir = Vec3(r * std::cos(phi), r * std::sin(phi), z);
    }
    poses.push_back(look_at(radius * dir, Vec3::Zero(), Vec3::UnitZ()));
  }
  return poses;
}

double view_sampling_cell(int n) { return std::sqrt(4.0 * std::numbers::pi / n); }

CameraModel make_virtual_camera(int resolution, double standoff) {
  const double rho = std::sqrt(3.0) / 2.0;
  if (resolution < 8 || !(standoff > rho)) {
    throw Error(ErrorCode::kInvalidParameter, "virtual camera needs resolution >= 8 and standoff > sqrt(3)/2");
  }
  const double tan_half = rho / std::sqrt(standoff * standoff - rho * rho);
  const double focal = 0.95 * (resolution / 2.0) / tan_half;
  const double c = (resolution - 1) / 2.0;
  return CameraModel(focal, focal, c, c, resolution, resolution);
}

}  // namespace meshplace
