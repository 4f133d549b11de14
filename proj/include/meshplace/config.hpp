#pragma once

#include <filesystem>
#include <string>

#include "meshplace/io.hpp"
#include "meshplace/pipeline.hpp"

namespace meshplace {

/// Every PipelineConfig field as key-value text.
io::KeyValues config_to_kv(const PipelineConfig& config);

/// Starts from `base` and overrides the keys present in `kv`. Unknown keys
/// are rejected with kFormat.
PipelineConfig config_from_kv(const io::KeyValues& kv, PipelineConfig base = {});

void write_config(const std::filesystem::path& path, const PipelineConfig& config);
/// Like write_config without `threads` and `output_dir`, which do not affect
/// results, so run directories compare byte-for-byte across machines.
void write_result_config(const std::filesystem::path& path, const PipelineConfig& config);

PipelineConfig read_config(const std::filesystem::path& path, PipelineConfig base = {});

}  // namespace meshplace
