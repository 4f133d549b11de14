#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "meshplace/error.hpp"
#include "meshplace/pipeline.hpp"
#include "meshplace/primitives.hpp"
#include "meshplace/scene.hpp"

namespace meshplace::cli {

namespace fs = std::filesystem;

/// Process exit status. Stable; documented in the README.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitMatching = 3,
  kExitDegenerate = 4,
  kExitIo = 5,
};

int exit_code_for(const Error& error);

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "MESHPLACE_OUTPUT_ROOT";

struct ReconstructArgs {
  std::optional<fs::path> scene_dir;
  std::optional<fs::path> rgb, depth, mask, camera, mesh;  // override scene_dir files
  PipelineConfig config;
};

struct SynthArgs {
  int count = 10;
  std::vector<PrimitiveKind> shapes;  // empty = all kinds; cycled in order
  SceneConfig scene;
  std::uint64_t seed = 0;
  fs::path out_dir;
  int threads = 0;
};

struct EvalArgs {
  std::vector<fs::path> scenes;
  PipelineConfig config;  // config.view.threads sets the scene-level parallelism
};

struct RenderViewsArgs {
  fs::path mesh;
  std::optional<fs::path> scene_dir;  // score candidates against this observation
  int top_k = 8;
  PipelineConfig config;
};

// Each command writes artifacts under its output directory, prints one
// summary line to `out` and diagnostics to `err`, and returns an exit code.
int cmd_reconstruct(const ReconstructArgs& args, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_render_views(const RenderViewsArgs& args, std::ostream& out, std::ostream& err);

/// Argument parsing and dispatch for the meshplace executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace meshplace::cli
