#include "meshplace/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include "meshplace/config.hpp"
#include "meshplace/io.hpp"
#include "meshplace/parallel.hpp"
#include "meshplace/render.hpp"

namespace meshplace::cli {

namespace {

fs::path default_output_root() {
  if (const char* env = std::getenv(kOutputRootEnv); env != nullptr && *env != '\0') return env;
  return "meshplace_out";
}

fs::path output_dir_or_default(const fs::path& configured, const char* command) {
  return configured.empty() ? default_output_root() / command : configured;
}

std::string vec_text(const Vec3& v) {
  return io::format_double(v.x()) + "," + io::format_double(v.y()) + "," + io::format_double(v.z());
}

int report(const Error& e, std::ostream& err) {
  err << "error: " << e.describe() << "\n";
  return exit_code_for(e);
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return report(e, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

ReconstructionInputs load_inputs(const ReconstructArgs& args) {
  const auto pick = [&](const std::optional<fs::path>& explicit_path, const char* name) -> fs::path {
    if (explicit_path) return *explicit_path;
    if (!args.scene_dir) {
      throw Error(ErrorCode::kInput, std::string("no --") + name + " given and no scene directory");
    }
    return *args.scene_dir / name;
  };
  ReconstructionInputs in;
  in.rgb = io::read_gray_png(args.rgb ? *args.rgb : pick(std::nullopt, "rgb.png"));
  fs::path depth_path;
  if (args.depth) {
    depth_path = *args.depth;
  } else {
    const fs::path f32 = pick(std::nullopt, "depth_observed.f32");
    depth_path = fs::exists(f32) ? f32 : pick(std::nullopt, "depth_observed.png");
  }
  in.depth = io::read_depth(depth_path);
  const fs::path mask_path = args.mask ? *args.mask : pick(std::nullopt, "mask.png");
  in.mask = io::read_mask_png(mask_path);
  in.camera = io::read_camera(args.camera ? *args.camera : pick(std::nullopt, "camera.txt"));
  if (args.mesh) {
    in.mesh = load_mesh_file(*args.mesh);
  } else {
    const fs::path mesh_path = pick(std::nullopt, "mesh.ply");
    try {
      in.mesh = parse_mesh(io::read_text(mesh_path), MeshFormat::kPly);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInput) throw;
      throw Error(e.code(), mesh_path.string() + ": " + e.what());
    }
  }
  if (!in.mask.same_size(in.depth)) {
    throw Error(ErrorCode::kSizeMismatch, mask_path.string() + " is " + std::to_string(in.mask.width()) + "x" +
                                              std::to_string(in.mask.height()) + " but " + depth_path.string() +
                                              " is " + std::to_string(in.depth.width()) + "x" +
                                              std::to_string(in.depth.height()));
  }
  try {
    in.validate();
  } catch (const Error& e) {
    throw e.with_stage("input");
  }
  return in;
}

void warn_solution(const PlacementSolution& s, const FusedDepth& fused, std::ostream& err) {
  if (s.degraded) {
    err << "warning: keypoint residual " << io::format_double(s.residual_m) << " m exceeds the gate; solution is degraded\n";
  }
  if (fused.poor_coverage) {
    err << "warning: mesh covers only " << io::format_double(fused.coverage()) << " of the mask\n";
  }
}

GrayImage contact_sheet(const std::vector<GrayImage>& tiles) {
  if (tiles.empty()) return {};
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(tiles.size()))));
  const int rows = (static_cast<int>(tiles.size()) + cols - 1) / cols;
  const int tw = tiles.front().width(), th = tiles.front().height();
  GrayImage sheet(cols * tw, rows * th, 0.0f);
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const int ox = static_cast<int>(i % cols) * tw, oy = static_cast<int>(i / cols) * th;
    for (int y = 0; y < th; ++y) {
      for (int x = 0; x < tw; ++x) sheet(ox + x, oy + y) = tiles[i](x, y);
    }
  }
  return sheet;
}

}  // namespace

int exit_code_for(const Error& error) {
  switch (classify(error.code())) {
    case ErrorClass::kInput: return kExitInput;
    case ErrorClass::kMatching: return kExitMatching;
    case ErrorClass::kDegenerateGeometry: return kExitDegenerate;
    case ErrorClass::kIo: return kExitIo;
  }
  return kExitIo;
}

int cmd_reconstruct(const ReconstructArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ReconstructionInputs inputs = load_inputs(args);
    const fs::path dir = output_dir_or_default(args.config.output_dir, "reconstruct");
    const Reconstruction r = reconstruct(inputs, args.config);
    const auto& s = r.solution;
    warn_solution(s, r.fused, err);

    io::write_solution(dir / "solution.txt", s);
    if (const auto sat = io::write_depth_png(dir / "depth_fused.png", r.fused.depth); sat > 0) {
      err << "warning: " << sat << " fused depth pixels saturated at 65535 mm\n";
    }
    io::write_depth_f32(dir / "depth_fused.f32", r.fused.depth);
    io::write_provenance_png(dir / "provenance.png", r.fused.provenance);
    io::write_point_cloud(dir / "cloud.ply", to_point_cloud(r.fused, inputs.camera));
    io::write_score_csv(dir / "view_scores.csv", r.match);
    write_result_config(dir / "config.txt", args.config);

    out << "ok view=" << s.view_score.view_index << " roll=" << s.view_score.roll_index
        << " scale=" << io::format_double(s.scale) << " t_m=" << vec_text(s.translation)
        << " residual_m=" << io::format_double(s.residual_m) << " coverage=" << io::format_double(r.fused.coverage())
        << (s.degraded ? " degraded" : "") << " out=" << dir.string() << "\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.count < 0) throw Error(ErrorCode::kInvalidParameter, "count must be >= 0");
    args.scene.validate();
    const fs::path dir = args.out_dir.empty() ? default_output_root() / "synth" : args.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIo, dir.string() + ": cannot create directory: " + ec.message());

    std::vector<PrimitiveKind> shapes = args.shapes;
    if (shapes.empty()) shapes.assign(std::begin(kAllPrimitiveKinds), std::end(kAllPrimitiveKinds));
    struct Row {
      std::string id;
      PrimitiveKind kind;
      std::uint64_t seed;
      std::string symmetry;
    };
    std::vector<Row> rows(static_cast<std::size_t>(args.count));
    parallel_for(args.count, args.threads, [&](int i) {
      char id[32];
      std::snprintf(id, sizeof id, "scene_%04d", i);
      const std::uint64_t seed = substream(args.seed, "scene-" + std::to_string(i))();
      const PrimitiveKind kind = shapes[static_cast<std::size_t>(i) % shapes.size()];
      const ScenePackage scene = make_primitive_scene(kind, args.scene, seed, id);
      io::write_scene(dir / id, scene);
      rows[static_cast<std::size_t>(i)] = {id, kind, seed, scene.symmetry.to_string()};
    });

    std::string manifest = "scene_id,directory,kind,seed,corruption,symmetry\n";
    for (const auto& r : rows) {
      manifest += r.id + "," + r.id + "," + std::string(to_string(r.kind)) + "," + std::to_string(r.seed) + "," +
                  std::string(to_string(args.scene.corruption.mode)) + "," + r.symmetry + "\n";
    }
    io::write_text(dir / "manifest.csv", manifest);
    out << "ok scenes=" << args.count << " out=" << dir.string() << "\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.scenes.empty()) throw Error(ErrorCode::kEmptyEvaluation, "no scenes to evaluate");
    args.config.validate();
    const fs::path dir = output_dir_or_default(args.config.output_dir, "eval");

    struct Row {
      std::string id;
      std::string status = "ok";
      std::string message;
      PipelineResult result;
    };
    const int n = static_cast<int>(args.scenes.size());
    std::vector<Row> rows(static_cast<std::size_t>(n));
    PipelineConfig per_scene = args.config;
    per_scene.view.threads = 1;
    parallel_for(n, args.config.view.threads, [&](int i) {
      Row& row = rows[static_cast<std::size_t>(i)];
      row.id = args.scenes[static_cast<std::size_t>(i)].filename().string();
      try {
        const ScenePackage scene = io::read_scene(args.scenes[static_cast<std::size_t>(i)]);
        row.id = scene.scene_id;
        if (!scene.has_ground_truth) {
          row.status = "skipped";
          row.message = "no ground truth";
          return;
        }
        row.result = run_pipeline(scene, per_scene);
        io::write_solution(dir / row.id / "solution.txt", row.result.reconstruction.solution);
      } catch (const Error& e) {
        row.status = "error";
        row.message = e.describe();
      }
    });

    std::string csv =
        "scene_id,status,rmse,rel,mae,n_pixels,holes,hole_policy,eval_region,corrupted_rmse,ang_err_deg,trans_err_m,scale_err,"
        "residual_m,degraded,message\n";
    double sum_rmse = 0, sum_rel = 0, sum_mae = 0, sum_ang = 0, sum_trans = 0, sum_scale = 0;
    int ok = 0;
    for (const auto& row : rows) {
      if (row.status != "ok") {
        err << "warning: " << row.id << ": " << row.status << ": " << row.message << "\n";
        std::string msg = row.message;
        std::replace(msg.begin(), msg.end(), ',', ';');
        csv += row.id + "," + row.status + ",,,,,,,,,,,,,," + msg + "\n";
        continue;
      }
      const auto& m = row.result.fused_metrics;
      const auto& p = row.result.placement;
      const auto& s = row.result.reconstruction.solution;
      csv += row.id + ",ok," + io::format_double(m.rmse) + "," + io::format_double(m.rel) + "," +
             io::format_double(m.mae) + "," + std::to_string(m.evaluated_pixel_count) + "," +
             std::to_string(m.holes) + "," + std::string(to_string(m.policy)) + "," +
             std::string(to_string(args.config.eval_region)) + "," +
             io::format_double(row.result.corrupted_metrics.rmse) + "," + io::format_double(p.rotation_deg) + "," +
             io::format_double(p.translation_m) + "," + io::format_double(p.scale_error) + "," +
             io::format_double(s.residual_m) + "," + (s.degraded ? "1" : "0") + ",\n";
      sum_rmse += m.rmse;
      sum_rel += m.rel;
      sum_mae += m.mae;
      sum_ang += p.rotation_deg;
      sum_trans += p.translation_m;
      sum_scale += p.scale_error;
      ++ok;
    }
    if (ok > 0) {
      csv += "mean,summary," + io::format_double(sum_rmse / ok) + "," + io::format_double(sum_rel / ok) + "," +
             io::format_double(sum_mae / ok) + ",,," + std::string(to_string(args.config.hole_policy)) + "," +
             std::string(to_string(args.config.eval_region)) + ",," +
             io::format_double(sum_ang / ok) + "," + io::format_double(sum_trans / ok) + "," +
             io::format_double(sum_scale / ok) + ",,,evaluated " + std::to_string(ok) + " of " +
             std::to_string(n) + "\n";
    }
    io::write_text(dir / "metrics.csv", csv);
    if (ok == 0) throw Error(ErrorCode::kEmptyEvaluation, "no scene could be evaluated");
    out << "ok evaluated=" << ok << "/" << n << " rmse=" << io::format_double(sum_rmse / ok)
        << " rel=" << io::format_double(sum_rel / ok) << " mae=" << io::format_double(sum_mae / ok)
        << " out=" << dir.string() << "\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_render_views(const RenderViewsArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    args.config.validate();
    const TriangleMesh mesh = load_mesh_file(args.mesh);
    const fs::path dir = output_dir_or_default(args.config.output_dir, "render-views");
    const auto& vc = args.config.view;
    const auto views = sample_view_sphere(vc.view_count, vc.sphere_radius);
    const CameraModel camera = make_virtual_camera(vc.render_resolution, vc.sphere_radius);
    parallel_for(static_cast<int>(views.size()), vc.threads, [&](int i) {
      char name[32];
      std::snprintf(name, sizeof name, "view_%04d.png", i);
      io::write_gray_png(dir / "views" / name, render(mesh, camera.with_extrinsic(views[i])).shaded);
    });
    if (!args.scene_dir) {
      out << "ok views=" << views.size() << " out=" << dir.string() << "\n";
      return static_cast<int>(kExitOk);
    }
    const ScenePackage scene = io::read_scene(*args.scene_dir);
    ViewMatchResult match;
    try {
      match = match_view(scene.rgb, scene.mask, mesh, views, vc);
    } catch (const Error& e) {
      throw e.with_stage("view-matching");
    }
    io::write_score_csv(dir / "view_scores.csv", match);
    std::vector<int> order;
    for (std::size_t i = 0; i < match.scores.size(); ++i) {
      if (match.scores[i].fully_scored) order.push_back(static_cast<int>(i));
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return match.scores[a].total > match.scores[b].total; });
    if (static_cast<int>(order.size()) > args.top_k) order.resize(static_cast<std::size_t>(std::max(0, args.top_k)));
    std::vector<GrayImage> tiles;
    for (int i : order) tiles.push_back(render(mesh, camera.with_extrinsic(match.candidates[i].camera_from_object)).shaded);
    if (!tiles.empty()) io::write_gray_png(dir / "top_candidates.png", contact_sheet(tiles));
    err << "best candidate " << match.best.index << " (view " << match.best.view_index << ", roll "
        << match.best.roll_index << ")\n";
    out << "ok views=" << views.size() << " best_view=" << match.best.view_index
        << " best_roll=" << match.best.roll_index << " out=" << dir.string() << "\n";
    return static_cast<int>(kExitOk);
  });
}

// ---- argument parsing ----

namespace {

// Optional overrides applied on top of the config file.
struct ConfigFlags {
  std::optional<fs::path> config_file;
  std::optional<int> views, roll_steps, resolution, patch_grid, comparison_size, threads, scan_px, snap_px, passes,
      refine_seeds;
  std::optional<double> alpha, beta, gamma, c1, c2, edge_threshold, prune_fraction, residual_gate_m, sphere_radius,
      refine_step;
  std::optional<std::string> hole_policy, eval_region;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_file, "Key-value config file; flags override it");
    app.add_option("--views", views, "Number of sphere views");
    app.add_option("--roll-steps", roll_steps, "In-plane roll steps per view");
    app.add_option("--resolution", resolution, "Virtual render resolution (px)");
    app.add_option("--alpha", alpha, "SSIM weight");
    app.add_option("--beta", beta, "Edge weight");
    app.add_option("--gamma", gamma, "Aspect-ratio weight");
    app.add_option("--patch-grid", patch_grid, "SSIM patch grid P (P x P patches)");
    app.add_option("--ssim-c1", c1, "SSIM constant C1");
    app.add_option("--ssim-c2", c2, "SSIM constant C2");
    app.add_option("--edge-threshold", edge_threshold, "Laplacian edge threshold");
    app.add_option("--comparison-size", comparison_size, "Crop comparison size (px)");
    app.add_option("--prune-fraction", prune_fraction, "Share of candidates rescored with SSIM");
    app.add_option("--threads", threads, "Worker threads (0 = all cores)");
    app.add_option("--sphere-radius", sphere_radius, "View sphere radius (canonical units)");
    app.add_option("--refine-seeds", refine_seeds, "Top candidates refined locally (0 = off)");
    app.add_option("--refine-step-deg", refine_step, "Smallest refinement step (deg)");
    app.add_option("--scan-px", scan_px, "Support depth scan window below the contact edge (px)");
    app.add_option("--snap-px", snap_px, "Snap radius for mesh keypoints (px)");
    app.add_option("--residual-gate-m", residual_gate_m, "Keypoint residual above which a solution is degraded (m)");
    app.add_option("--keypoint-passes", passes, "Keypoint lift passes");
    app.add_option("--hole-policy", hole_policy, "penalize | exclude")->check(CLI::IsMember({"penalize", "exclude"}));
    app.add_option("--eval-region", eval_region, "mask | full")->check(CLI::IsMember({"mask", "full"}));
    app.add_option("--seed", seed, "Random seed");
    app.add_option("--out", out, "Output directory");
  }

  PipelineConfig resolve() const {
    PipelineConfig c;
    if (config_file) c = read_config(*config_file);
    auto& v = c.view;
    auto& s = c.view.similarity;
    auto& k = c.keypoint;
    if (views) v.view_count = *views;
    if (roll_steps) v.roll_steps = *roll_steps;
    if (resolution) v.render_resolution = *resolution;
    if (threads) v.threads = *threads;
    if (prune_fraction) v.prune_fraction = *prune_fraction;
    if (sphere_radius) v.sphere_radius = *sphere_radius;
    if (refine_seeds) v.refine_seeds = *refine_seeds;
    if (refine_step) v.refine_min_step_deg = *refine_step;
    if (alpha) s.alpha = *alpha;
    if (beta) s.beta = *beta;
    if (gamma) s.gamma = *gamma;
    if (patch_grid) s.patch_grid = *patch_grid;
    if (c1) s.ssim_c1 = *c1;
    if (c2) s.ssim_c2 = *c2;
    if (edge_threshold) s.edge_threshold = *edge_threshold;
    if (comparison_size) s.comparison_size = *comparison_size;
    if (scan_px) k.support_scan_px = *scan_px;
    if (snap_px) k.snap_radius_px = *snap_px;
    if (residual_gate_m) k.residual_gate_m = *residual_gate_m;
    if (passes) k.passes = *passes;
    if (hole_policy) c.hole_policy = parse_hole_policy(*hole_policy);
    if (eval_region) c.eval_region = parse_eval_region(*eval_region);
    if (seed) c.seed = *seed;
    if (out) c.output_dir = *out;
    c.validate();
    return c;
  }
};

std::vector<PrimitiveKind> parse_shapes(const std::string& list) {
  std::vector<PrimitiveKind> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(parse_primitive_kind(item));
  }
  return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Place a canonical object mesh into an RGB-D scene and repair its depth"};
  app.require_subcommand(1);

  ConfigFlags recon_flags, eval_flags, views_flags;
  ReconstructArgs recon;
  auto* recon_cmd = app.add_subcommand("reconstruct", "Estimate placement and fuse depth for one observation");
  recon_cmd->add_option("--scene", recon.scene_dir, "Scene directory (rgb.png, depth_observed, mask.png, camera.txt, mesh.ply)");
  recon_cmd->add_option("--rgb", recon.rgb, "RGB or gray PNG");
  recon_cmd->add_option("--depth", recon.depth, "Depth (16-bit mm PNG or .f32)");
  recon_cmd->add_option("--mask", recon.mask, "Object mask PNG");
  recon_cmd->add_option("--camera", recon.camera, "Camera key-value file");
  recon_cmd->add_option("--mesh", recon.mesh, "Canonical mesh (OBJ or PLY)");
  recon_flags.add_to(*recon_cmd);

  SynthArgs synth;
  std::string shapes, corruption = "refraction";
  std::optional<double> sigma;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic scene packages");
  synth_cmd->add_option("--count", synth.count, "Number of scenes");
  synth_cmd->add_option("--shapes", shapes, "Comma list of box,cylinder,cone,goblet,bottle,flask (default all)");
  synth_cmd->add_option("--corruption", corruption, "zero | noise | refraction")
      ->check(CLI::IsMember({"zero", "noise", "refraction"}));
  synth_cmd->add_option("--sigma-m", sigma, "Depth noise sigma (m)");
  synth_cmd->add_option("--dropout", synth.scene.corruption.dropout, "Dropout probability (noise mode)");
  synth_cmd->add_flag("--distractor", synth.scene.distractor, "Add an occluder without depth in front of the object");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--threads", synth.threads, "Worker threads (0 = all cores)");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Run the pipeline on scene packages and score it against ground truth");
  eval_cmd->add_option("scenes", eval.scenes, "Scene directories");
  eval_flags.add_to(*eval_cmd);

  RenderViewsArgs views;
  auto* views_cmd = app.add_subcommand("render-views", "Dump candidate renders and optionally their scores");
  views_cmd->add_option("--mesh", views.mesh, "Mesh (OBJ or PLY)")->required();
  views_cmd->add_option("--scene", views.scene_dir, "Scene directory to score against");
  views_cmd->add_option("--top-k", views.top_k, "Candidates in the contact sheet");
  views_flags.add_to(*views_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (recon_cmd->parsed()) {
      recon.config = recon_flags.resolve();
      return cmd_reconstruct(recon, out, err);
    }
    if (synth_cmd->parsed()) {
      synth.scene.corruption.mode = parse_corruption_mode(corruption);
      if (sigma) {
        synth.scene.corruption.sigma_m = *sigma;
      } else if (synth.scene.corruption.mode == CorruptionMode::kNoise) {
        synth.scene.corruption.sigma_m = 0.02;
      }
      try {
        synth.shapes = parse_shapes(shapes);
      } catch (const Error& e) {
        err << "usage error: --shapes: " << e.what() << "\n";
        return static_cast<int>(kExitUsage);
      }
      return cmd_synth(synth, out, err);
    }
    if (eval_cmd->parsed()) {
      eval.config = eval_flags.resolve();
      return cmd_eval(eval, out, err);
    }
    if (views_cmd->parsed()) {
      views.config = views_flags.resolve();
      return cmd_render_views(views, out, err);
    }
  } catch (const Error& e) {
    return report(e, err);
  }
  return kExitUsage;
}

}  // namespace meshplace::cli
