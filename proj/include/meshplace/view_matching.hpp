#pragma once

#include <optional>
#include <span>
#include <vector>

#include "meshplace/geometry.hpp"
#include "meshplace/image.hpp"
#include "meshplace/mesh.hpp"

namespace meshplace {

/// Term weights and constants of the three-term view similarity.
struct SimilarityConfig {
  double alpha = 1.0 / 3.0;  // structural (patch SSIM)
  double beta = 1.0 / 3.0;   // Laplacian edge correlation
  double gamma = 1.0 / 3.0;  // aspect ratio agreement
  int patch_grid = 8;        // P x P patches
  double ssim_c1 = 1e-4;     // (0.01 L)^2, L = 1
  double ssim_c2 = 9e-4;     // (0.03 L)^2
  double edge_threshold = 0.05;
  int comparison_size = 128;  // crops are resampled to this square size

  void validate() const;
  bool operator==(const SimilarityConfig&) const = default;
};

struct ViewMatchConfig {
  SimilarityConfig similarity;
  int view_count = 128;
  int roll_steps = 12;
  double prune_fraction = 0.1;  // share of candidates rescored with SSIM
  int render_resolution = 256;
  double sphere_radius = 3.5;
  int threads = 0;
  /// Top fully scored candidates refined by a local rotation search on the
  /// same score; 0 keeps the discrete argmax.
  int refine_seeds = 3;
  double refine_min_step_deg = 0.5;

  void validate() const;
  bool operator==(const ViewMatchConfig&) const = default;
};

/// Mean over the P x P patch grid of the SSIM kernel. Both images must have
/// the same size, at least P x P.
double ssim_score(const GrayImage& observed, const GrayImage& rendered, const SimilarityConfig& config);

/// |4-neighbour Laplacian| / 4 with zero padding outside the image, values
/// below `threshold` set to zero.
GrayImage edge_image(const GrayImage& image, double threshold);

/// Normalized cross-correlation of two edge images; 0 if either is blank.
double edge_correlation(const GrayImage& observed_edges, const GrayImage& rendered_edges);

/// edge_correlation(edge_image(observed), edge_image(rendered)).
double edge_score(const GrayImage& observed, const GrayImage& rendered, const SimilarityConfig& config);

struct BoxSize {
  int width = 0;
  int height = 0;
};

/// 1 - min(|rI - rR| / rI, 1) with r = W / H; observed box in the I role.
double ratio_score(BoxSize observed, BoxSize rendered);

struct ViewCandidate {
  int index = 0;       // view_index * roll_steps + roll_index
  int view_index = 0;
  int roll_index = 0;
  RigidTransform camera_from_object;
  double yaw_deg = 0;    // azimuth of the camera position on the sphere
  double pitch_deg = 0;  // elevation of the camera position
  double roll_deg = 0;
};

/// Cross product of sphere views and in-plane rolls about the optical axis.
std::vector<ViewCandidate> make_candidates(std::span<const RigidTransform> views, int roll_steps);

struct ViewScore {
  int candidate = 0;
  int view_index = 0;
  int roll_index = 0;
  bool rendered = false;       // false when the render was empty
  bool fully_scored = false;   // SSIM computed (survived pruning)
  double s_ssim = 0;
  double s_edge = 0;
  double s_ratio = 0;
  double total = 0;
};

/// Observed object crop, masked and resampled for comparison.
struct ComparisonCrop {
  GrayImage image;   // comparison_size^2
  GrayImage edges;
  BoxSize box_size;
  BoundingBox box;
};

/// Crop `gray` to the mask's bounding box, zero pixels outside the mask and
/// resample. Throws kEmptyMask / kSizeMismatch.
ComparisonCrop prepare_comparison(const GrayImage& gray, const MaskImage& mask,
                                  const SimilarityConfig& config);

/// Indices of the candidates that get full scoring: the top prune_fraction
/// by beta * edge + gamma * ratio (ties by index), at least one.
std::vector<int> select_for_rescoring(std::span<const ViewScore> scores, const SimilarityConfig& config,
                                      double prune_fraction);

/// Fills `total` for fully scored entries and returns the argmax position;
/// ties go to the lowest candidate index. Throws kNoCandidate.
int select_best(std::vector<ViewScore>& scores, const SimilarityConfig& config);

struct ViewMatchResult {
  ViewCandidate best;
  ViewScore best_score;
  std::vector<ViewCandidate> candidates;
  std::vector<ViewScore> scores;  // one per candidate, candidate order
  /// Camera-from-object pose after local refinement; equals
  /// best.camera_from_object when refinement is off or finds nothing better.
  RigidTransform refined;
  double refined_total = 0;
  int refined_seed = 0;  // candidate the refined pose started from
};

/// Full three-term score of one camera-from-object pose rendered at the
/// virtual camera; nullopt when the render is empty.
std::optional<ViewScore> score_pose(const ComparisonCrop& observed, const TriangleMesh& mesh,
                                    const RigidTransform& camera_from_object, const ViewMatchConfig& config);

/// Renders every candidate at the virtual camera, scores it against the
/// observed crop and returns the best. Deterministic for any thread count.
ViewMatchResult match_view(const GrayImage& observed, const MaskImage& mask, const TriangleMesh& mesh,
                           std::span<const RigidTransform> views, const ViewMatchConfig& config);

}  // namespace meshplace
