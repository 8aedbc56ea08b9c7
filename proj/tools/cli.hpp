#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthforge/dataset.hpp"
#include "synthforge/fractal2d.hpp"
#include "synthforge/image.hpp"
#include "synthforge/morphgen.hpp"
#include "synthforge/parallel.hpp"
#include "synthforge/procgen.hpp"
#include "synthforge/renderer.hpp"

namespace synthforge::cli {

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// Entry point shared by the binary and the tests. argv[0] is the program name.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

// Effective options of each subcommand, as echoed into spec.json under
// "options". Keys are the long flag names.
ProcGenConfig proc_config(const nlohmann::json& options);
GpDeformParams morph_params(const nlohmann::json& options);
FractalGenConfig fractal_config(const nlohmann::json& options);
RenderPlanConfig render_plan_config(const nlohmann::json& options);

/// Seed of render class `class_index` under a render run seeded with `seed`.
std::uint64_t render_class_seed(std::uint64_t seed, std::size_t class_index);

/// Regenerates one image from its manifest entry and the spec.json of the
/// database that produced it (entry.origin, or `source_root` if given).
Image replay_entry(const ManifestEntry& entry, const std::filesystem::path& source_root = {});

/// Grid of the first n classes (rows) by their first 4 images (columns),
/// each resampled to tile x tile. n larger than the class count is clamped.
Image contact_sheet(const std::filesystem::path& root, std::size_t n, int tile = 128,
                    const WorkerPool& pool = WorkerPool{});

}  // namespace synthforge::cli
