#include "meshplace/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <type_traits>

#include "meshplace/error.hpp"

namespace meshplace {

namespace {

struct Field {
  std::function<void(const PipelineConfig&, io::KeyValues&, const std::string&)> write;
  std::function<void(PipelineConfig&, const io::KeyValues&, const std::string&)> read;
};

template <typename Get>
Field real_at(Get get) {
  return {[get](PipelineConfig c, io::KeyValues& kv, const std::string& k) { kv.set(k, get(c)); },
          [get](PipelineConfig& c, const io::KeyValues& kv, const std::string& k) { get(c) = kv.number(k); }};
}

template <typename Get>
Field int_at(Get get) {
  return {[get](PipelineConfig c, io::KeyValues& kv, const std::string& k) { kv.set_int(k, get(c)); },
          [get](PipelineConfig& c, const io::KeyValues& kv, const std::string& k) {
            get(c) = static_cast<std::remove_reference_t<decltype(get(c))>>(kv.integer(k));
          }};
}

// Ordered as written to disk.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"view_count", int_at([](PipelineConfig& c) -> int& { return c.view.view_count; })},
      {"roll_steps", int_at([](PipelineConfig& c) -> int& { return c.view.roll_steps; })},
      {"prune_fraction", real_at([](PipelineConfig& c) -> double& { return c.view.prune_fraction; })},
      {"render_resolution_px", int_at([](PipelineConfig& c) -> int& { return c.view.render_resolution; })},
      {"sphere_radius", real_at([](PipelineConfig& c) -> double& { return c.view.sphere_radius; })},
      {"threads", int_at([](PipelineConfig& c) -> int& { return c.view.threads; })},
      {"refine_seeds", int_at([](PipelineConfig& c) -> int& { return c.view.refine_seeds; })},
      {"refine_min_step_deg", real_at([](PipelineConfig& c) -> double& { return c.view.refine_min_step_deg; })},
      {"alpha", real_at([](PipelineConfig& c) -> double& { return c.view.similarity.alpha; })},
      {"beta", real_at([](PipelineConfig& c) -> double& { return c.view.similarity.beta; })},
      {"gamma", real_at([](PipelineConfig& c) -> double& { return c.view.similarity.gamma; })},
      {"patch_grid", int_at([](PipelineConfig& c) -> int& { return c.view.similarity.patch_grid; })},
      {"ssim_c1", real_at([](PipelineConfig& c) -> double& { return c.view.similarity.ssim_c1; })},
      {"ssim_c2", real_at([](PipelineConfig& c) -> double& { return c.view.similarity.ssim_c2; })},
      {"edge_threshold", real_at([](PipelineConfig& c) -> double& { return c.view.similarity.edge_threshold; })},
      {"comparison_size_px", int_at([](PipelineConfig& c) -> int& { return c.view.similarity.comparison_size; })},
      {"support_scan_px", int_at([](PipelineConfig& c) -> int& { return c.keypoint.support_scan_px; })},
      {"snap_radius_px", int_at([](PipelineConfig& c) -> int& { return c.keypoint.snap_radius_px; })},
      {"residual_gate_m", real_at([](PipelineConfig& c) -> double& { return c.keypoint.residual_gate_m; })},
      {"keypoint_passes", int_at([](PipelineConfig& c) -> int& { return c.keypoint.passes; })},
      {"hole_policy",
       {[](const PipelineConfig& c, io::KeyValues& kv, const std::string& k) {
          kv.set(k, std::string(to_string(c.hole_policy)));
        },
        [](PipelineConfig& c, const io::KeyValues& kv, const std::string& k) {
          c.hole_policy = parse_hole_policy(kv.text(k));
        }}},
      {"eval_region",
       {[](const PipelineConfig& c, io::KeyValues& kv, const std::string& k) {
          kv.set(k, std::string(to_string(c.eval_region)));
        },
        [](PipelineConfig& c, const io::KeyValues& kv, const std::string& k) {
          c.eval_region = parse_eval_region(kv.text(k));
        }}},
      {"seed",
       {[](const PipelineConfig& c, io::KeyValues& kv, const std::string& k) { kv.set(k, std::to_string(c.seed)); },
        [](PipelineConfig& c, const io::KeyValues& kv, const std::string& k) {
          const std::string& text = kv.text(k);
          const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), c.seed);
          if (ec != std::errc{} || end != text.data() + text.size()) {
            throw Error(ErrorCode::kFormat, "config key 'seed' is not an unsigned integer");
          }
        }}},
      {"output_dir",
       {[](const PipelineConfig& c, io::KeyValues& kv, const std::string& k) { kv.set(k, c.output_dir.string()); },
        [](PipelineConfig& c, const io::KeyValues& kv, const std::string& k) { c.output_dir = kv.text(k); }}},
  };
  return table;
}

}  // namespace

io::KeyValues config_to_kv(const PipelineConfig& config) {
  io::KeyValues kv;
  for (const auto& [key, field] : fields()) field.write(config, kv, key);
  return kv;
}

PipelineConfig config_from_kv(const io::KeyValues& kv, PipelineConfig base) {
  for (const auto& key : kv.keys()) {
    const auto& table = fields();
    const bool known = std::any_of(table.begin(), table.end(), [&](const auto& f) { return f.first == key; });
    if (!known) throw Error(ErrorCode::kFormat, "unknown config key '" + key + "'");
  }
  for (const auto& [key, field] : fields()) {
    if (kv.has(key)) field.read(base, kv, key);
  }
  return base;
}

void write_config(const std::filesystem::path& path, const PipelineConfig& config) {
  config_to_kv(config).write(path);
}

void write_result_config(const std::filesystem::path& path, const PipelineConfig& config) {
  io::KeyValues kv;
  for (const auto& [key, field] : fields()) {
    if (key != "threads" && key != "output_dir") field.write(config, kv, key);
  }
  kv.write(path);
}

PipelineConfig read_config(const std::filesystem::path& path, PipelineConfig base) {
  return config_from_kv(io::KeyValues::read(path), std::move(base));
}

}  // namespace meshplace
