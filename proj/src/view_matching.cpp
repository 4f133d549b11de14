#include "meshplace/view_matching.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "meshplace/parallel.hpp"
#include "meshplace/render.hpp"

namespace meshplace {

void SimilarityConfig::validate() const {
  if (!(alpha >= 0 && beta >= 0 && gamma >= 0) || !(alpha + beta + gamma > 0)) {
    throw Error(ErrorCode::kInvalidParameter, "similarity weights must be >= 0 with a positive sum");
  }
  if (patch_grid < 1) throw Error(ErrorCode::kInvalidParameter, "patch grid must be >= 1");
  if (!(ssim_c1 > 0) || !(ssim_c2 > 0)) throw Error(ErrorCode::kInvalidParameter, "SSIM constants must be > 0");
  if (comparison_size < patch_grid) {
    throw Error(ErrorCode::kInvalidParameter, "comparison size must be >= patch grid");
  }
  if (!(edge_threshold >= 0)) throw Error(ErrorCode::kInvalidParameter, "edge threshold must be >= 0");
}

void ViewMatchConfig::validate() const {
  similarity.validate();
  if (view_count < 1 || roll_steps < 1) {
    throw Error(ErrorCode::kInvalidParameter, "view count and roll steps must be >= 1");
  }
  if (!(prune_fraction > 0)) throw Error(ErrorCode::kInvalidParameter, "prune fraction must be > 0");
  if (render_resolution < 16) throw Error(ErrorCode::kInvalidParameter, "render resolution must be >= 16");
  if (!(sphere_radius > std::sqrt(3.0) / 2.0)) {
    throw Error(ErrorCode::kInvalidParameter, "sphere radius must exceed the canonical bounding sphere");
  }
  if (refine_seeds < 0) throw Error(ErrorCode::kInvalidParameter, "refine seeds must be >= 0");
  if (!(refine_min_step_deg > 0)) throw Error(ErrorCode::kInvalidParameter, "refine step must be > 0");
}

double ssim_score(const GrayImage& observed, const GrayImage& rendered, const SimilarityConfig& config) {
  if (!observed.same_size(rendered)) {
    throw Error(ErrorCode::kSizeMismatch, "ssim_score: images differ in size");
  }
  const int p = config.patch_grid;
  const int w = observed.width();
  const int h = observed.height();
  if (w < p || h < p) throw Error(ErrorCode::kSizeMismatch, "ssim_score: image smaller than patch grid");
  double sum = 0;
  for (int py = 0; py < p; ++py) {
    const int y0 = py * h / p;
    const int y1 = (py + 1) * h / p;
    for (int px = 0; px < p; ++px) {
      const int x0 = px * w / p;
      const int x1 = (px + 1) * w / p;
      const double n = static_cast<double>((x1 - x0) * (y1 - y0));
      double mu_i = 0, mu_r = 0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          mu_i += observed(x, y);
          mu_r += rendered(x, y);
        }
      }
      mu_i /= n;
      mu_r /= n;
      double var_i = 0, var_r = 0, cov = 0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          const double di = observed(x, y) - mu_i;
          const double dr = rendered(x, y) - mu_r;
          var_i += di * di;
          var_r += dr * dr;
          cov += di * dr;
        }
      }
      var_i /= n;
      var_r /= n;
      cov /= n;
      sum += ((2 * mu_i * mu_r + config.ssim_c1) * (2 * cov + config.ssim_c2)) /
             ((mu_i * mu_i + mu_r * mu_r + config.ssim_c1) * (var_i + var_r + config.ssim_c2));
    }
  }
  return sum / (p * p);
}

GrayImage edge_image(const GrayImage& image, double threshold) {
  const int w = image.width();
  const int h = image.height();
  GrayImage out(w, h, 0.0f);
  const auto at = [&](int x, int y) -> double { return image.in_bounds(x, y) ? image(x, y) : 0.0; };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double lap = at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1) - 4.0 * image(x, y);
      const double mag = std::abs(lap) / 4.0;
      out(x, y) = mag < threshold ? 0.0f : static_cast<float>(mag);
    }
  }
  return out;
}

double edge_correlation(const GrayImage& a, const GrayImage& b) {
  if (!a.same_size(b)) throw Error(ErrorCode::kSizeMismatch, "edge_score: images differ in size");
  double ab = 0, aa = 0, bb = 0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    ab += static_cast<double>(pa[i]) * pb[i];
    aa += static_cast<double>(pa[i]) * pa[i];
    bb += static_cast<double>(pb[i]) * pb[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

double edge_score(const GrayImage& observed, const GrayImage& rendered, const SimilarityConfig& config) {
  return edge_correlation(edge_image(observed, config.edge_threshold),
                          edge_image(rendered, config.edge_threshold));
}

double ratio_score(BoxSize observed, BoxSize rendered) {
  if (observed.width < 1 || observed.height < 1 || rendered.width < 1 || rendered.height < 1) {
    throw Error(ErrorCode::kDegenerateBox, "ratio_score needs boxes of at least 1x1 pixels");
  }
  const double ri = static_cast<double>(observed.width) / observed.height;
  const double rr = static_cast<double>(rendered.width) / rendered.height;
  return 1.0 - std::min(std::abs(ri - rr) / ri, 1.0);
}

std::vector<ViewCandidate> make_candidates(std::span<const RigidTransform> views, int roll_steps) {
  if (roll_steps < 1) throw Error(ErrorCode::kInvalidParameter, "roll steps must be >= 1");
  std::vector<ViewCandidate> out;
  out.reserve(views.size() * roll_steps);
  for (int v = 0; v < static_cast<int>(views.size()); ++v) {
    const Vec3 eye = views[v].inverse().translation();
    const double yaw = std::atan2(eye.y(), eye.x()) * 180.0 / std::numbers::pi;
    const double pitch = std::asin(std::clamp(eye.z() / eye.norm(), -1.0, 1.0)) * 180.0 / std::numbers::pi;
    for (int r = 0; r < roll_steps; ++r) {
      const double roll = 2.0 * std::numbers::pi * r / roll_steps;
      ViewCandidate c;
      c.index = v * roll_steps + r;
      c.view_index = v;
      c.roll_index = r;
      c.camera_from_object = r == 0 ? views[v] : compose(RigidTransform::rotation_about(Vec3::UnitZ(), roll), views[v]);
      c.yaw_deg = yaw;
      c.pitch_deg = pitch;
      c.roll_deg = 360.0 * r / roll_steps;
      out.push_back(c);
    }
  }
  return out;
}

ComparisonCrop prepare_comparison(const GrayImage& gray, const MaskImage& mask, const SimilarityConfig& config) {
  if (!gray.same_size(mask)) throw Error(ErrorCode::kSizeMismatch, "image and mask sizes differ");
  const auto box = mask_bounds(mask);
  if (!box) throw Error(ErrorCode::kEmptyMask, "object mask is empty");
  GrayImage cropped(box->width, box->height, 0.0f);
  for (int y = 0; y < box->height; ++y) {
    for (int x = 0; x < box->width; ++x) {
      if (mask(box->x0 + x, box->y0 + y)) cropped(x, y) = gray(box->x0 + x, box->y0 + y);
    }
  }
  ComparisonCrop out;
  out.image = resample_bilinear(cropped, config.comparison_size, config.comparison_size);
  out.edges = edge_image(out.image, config.edge_threshold);
  out.box_size = {box->width, box->height};
  out.box = *box;
  return out;
}

std::vector<int> select_for_rescoring(std::span<const ViewScore> scores, const SimilarityConfig& config,
                                      double prune_fraction) {
  std::vector<int> order;
  for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
    if (scores[i].rendered) order.push_back(i);
  }
  if (order.empty()) return order;
  std::size_t keep = order.size();
  if (prune_fraction < 1.0) {
    keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(prune_fraction * order.size())));
    const auto prescore = [&](int i) { return config.beta * scores[i].s_edge + config.gamma * scores[i].s_ratio; };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return prescore(a) > prescore(b); });
    order.resize(keep);
    std::sort(order.begin(), order.end());
  }
  return order;
}

int select_best(std::vector<ViewScore>& scores, const SimilarityConfig& config) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
    auto& s = scores[i];
    if (!s.fully_scored) continue;
    s.total = config.alpha * s.s_ssim + config.beta * s.s_edge + config.gamma * s.s_ratio;
    if (best < 0 || s.total > scores[best].total) best = i;
  }
  if (best < 0) throw Error(ErrorCode::kNoCandidate, "no candidate view produced a non-empty render");
  return best;
}

std::optional<ViewScore> score_pose(const ComparisonCrop& observed, const TriangleMesh& mesh,
                                    const RigidTransform& camera_from_object, const ViewMatchConfig& config) {
  const auto& sim = config.similarity;
  const auto camera = make_virtual_camera(config.render_resolution, config.sphere_radius);
  const auto view = render(mesh, camera.with_extrinsic(camera_from_object));
  if (!mask_bounds(view.silhouette)) return std::nullopt;
  const auto crop = prepare_comparison(view.shaded, view.silhouette, sim);
  ViewScore s;
  s.rendered = s.fully_scored = true;
  s.s_ssim = ssim_score(observed.image, crop.image, sim);
  s.s_edge = edge_correlation(observed.edges, crop.edges);
  s.s_ratio = ratio_score(observed.box_size, crop.box_size);
  s.total = sim.alpha * s.s_ssim + sim.beta * s.s_edge + sim.gamma * s.s_ratio;
  return s;
}

namespace {

struct RefinedPose {
  RigidTransform pose;
  double total = 0;
};

// Coordinate search over small rotations about the virtual camera axes
// through the object center. The step starts at half the sampling cell and
// halves once no neighbor improves the score.
RefinedPose refine_pose(const ComparisonCrop& observed, const TriangleMesh& mesh, RefinedPose start,
                        const ViewMatchConfig& config) {
  constexpr int kMaxMovesPerStep = 4;
  const double min_step = config.refine_min_step_deg * std::numbers::pi / 180.0;
  RefinedPose current = start;
  for (double step = view_sampling_cell(config.view_count) / 2; step >= min_step; step /= 2) {
    for (int move = 0; move < kMaxMovesPerStep; ++move) {
      RefinedPose next = current;
      for (int axis = 0; axis < 3; ++axis) {
        for (const double sign : {1.0, -1.0}) {
          const Mat3 r = Eigen::AngleAxisd(sign * step, Vec3::Unit(axis)).toRotationMatrix() *
                         current.pose.rotation();
          const auto pose = RigidTransform::from_rotation_translation(r, current.pose.translation());
          const auto s = score_pose(observed, mesh, pose, config);
          if (s && s->total > next.total) next = {pose, s->total};
        }
      }
      if (!(next.total > current.total)) break;
      current = next;
    }
  }
  return current;
}

}  // namespace

ViewMatchResult match_view(const GrayImage& observed, const MaskImage& mask, const TriangleMesh& mesh,
                           std::span<const RigidTransform> views, const ViewMatchConfig& config) {
  config.validate();
  if (views.empty()) throw Error(ErrorCode::kNoCandidate, "no candidate views");
  if (mesh.empty()) throw Error(ErrorCode::kEmptyGeometry, "mesh has no triangles");
  const auto& sim = config.similarity;
  const ComparisonCrop obs = prepare_comparison(observed, mask, sim);

  ViewMatchResult result;
  result.candidates = make_candidates(views, config.roll_steps);
  const int n = static_cast<int>(result.candidates.size());
  result.scores.resize(n);
  const CameraModel virtual_camera = make_virtual_camera(config.render_resolution, config.sphere_radius);

  const auto render_crop = [&](int i) -> std::optional<ComparisonCrop> {
    const auto view = render(mesh, virtual_camera.with_extrinsic(result.candidates[i].camera_from_object));
    if (!mask_bounds(view.silhouette)) return std::nullopt;
    return prepare_comparison(view.shaded, view.silhouette, sim);
  };

  parallel_for(n, config.threads, [&](int i) {
    auto& s = result.scores[i];
    s.candidate = i;
    s.view_index = result.candidates[i].view_index;
    s.roll_index = result.candidates[i].roll_index;
    const auto crop = render_crop(i);
    if (!crop) return;
    s.rendered = true;
    s.s_edge = edge_correlation(obs.edges, crop->edges);
    s.s_ratio = ratio_score(obs.box_size, crop->box_size);
  });

  const auto rescore = select_for_rescoring(result.scores, sim, config.prune_fraction);
  parallel_for(static_cast<int>(rescore.size()), config.threads, [&](int k) {
    const int i = rescore[k];
    const auto crop = render_crop(i);
    auto& s = result.scores[i];
    s.s_ssim = ssim_score(obs.image, crop->image, sim);
    s.fully_scored = true;
  });

  const int best = select_best(result.scores, sim);
  result.best = result.candidates[best];
  result.best_score = result.scores[best];
  result.refined = result.best.camera_from_object;
  result.refined_total = result.best_score.total;
  result.refined_seed = best;
  if (config.refine_seeds == 0) return result;

  std::vector<int> seeds;
  for (int i = 0; i < n; ++i) {
    if (result.scores[i].fully_scored) seeds.push_back(i);
  }
  std::stable_sort(seeds.begin(), seeds.end(),
                   [&](int a, int b) { return result.scores[a].total > result.scores[b].total; });
  seeds.resize(std::min<std::size_t>(seeds.size(), static_cast<std::size_t>(config.refine_seeds)));
  std::vector<RefinedPose> refined(seeds.size());
  parallel_for(static_cast<int>(seeds.size()), config.threads, [&](int k) {
    const int i = seeds[k];
    refined[k] = refine_pose(obs, mesh, {result.candidates[i].camera_from_object, result.scores[i].total}, config);
  });
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (refined[k].total > result.refined_total) {
      result.refined = refined[k].pose;
      result.refined_total = refined[k].total;
      result.refined_seed = seeds[k];
    }
  }
  return result;
}

}  // namespace meshplace
