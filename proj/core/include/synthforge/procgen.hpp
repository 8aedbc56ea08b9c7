#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "synthforge/geometry.hpp"
#include "synthforge/parallel.hpp"

namespace synthforge {

/// Knobs for procedural class-mesh generation. Defaults reproduce the
/// reference protocol (v = 3, w = 5, max size 10).
struct ProcGenConfig {
  std::size_t n = 1000;
  /// Upper bound of the outer repetition draw p ~ U{1..v}.
  int v = 3;
  /// Upper bound of the per-type instance draw U{0..w}.
  int w = 5;
  /// Quality-control bound on the largest bounding-box extent.
  double max_size = 10.0;
  std::uint64_t seed = 0;

  /// Translations are uniform in [-translation_range, translation_range]^3.
  double translation_range = 3.0;
  Interval scale{0.3, 2.0};
  Interval size{0.5, 2.0};
  /// Torus tube radius as a fraction of the major radius.
  Interval torus_tube_ratio{0.2, 0.5};
  /// false disables rotations (identity orientation).
  bool random_rotation = true;
  Interval wireframe_thickness{0.02, 0.15};
  int max_subdivision_level = 2;

  int sphere_segments = 24;
  int sphere_rings = 16;
  int torus_segments = 24;
  int torus_tube_segments = 12;
  int round_segments = 24;  ///< cone and cylinder
  int round_stacks = 3;     ///< cone and cylinder

  /// Consecutive quality-control rejections before giving up.
  std::size_t max_rejections = 1000;
};

/// Throws ParameterError.
void validate(const ProcGenConfig& config);

struct PrimitiveInstance {
  PrimitiveSpec spec;
  std::optional<ModifierSpec> modifier;
  friend bool operator==(const PrimitiveInstance&, const PrimitiveInstance&) = default;
};

/// Every sampled parameter of the accepted candidate, enough to rebuild the
/// mesh without the generator.
struct GenerationRecord {
  std::size_t class_index = 0;
  std::uint64_t seed = 0;
  int repetitions = 0;
  /// instance_counts[j][k]: instances of kAllPrimitiveKinds[k] in repetition j.
  std::vector<std::array<int, 5>> instance_counts;
  std::vector<PrimitiveInstance> instances;
  std::size_t rejections = 0;
  double max_extent = 0.0;

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

struct ClassMesh {
  std::size_t class_index = 0;
  Mesh mesh;
  GenerationRecord record;
  GeometryWarnings warnings;
};

/// Zero-padded class id, e.g. "class_0007".
std::string class_id(std::size_t index);

/// Builds the assembly described by a record: each instance is tessellated,
/// modified, then all are merged.
Mesh build_mesh(const GenerationRecord& record, GeometryWarnings* warnings = nullptr);

/// Samples candidates from the (seed, class_index) stream until one passes the
/// max-extent check. Throws GenerationExhaustedError after
/// config.max_rejections consecutive rejections.
ClassMesh generate_class_mesh(const ProcGenConfig& config, std::size_t class_index);

/// One mesh per class, ordered by class index under any worker count.
std::vector<ClassMesh> generate_db(const ProcGenConfig& config, const WorkerPool& pool = WorkerPool{});

void to_json(nlohmann::json& j, const GenerationRecord& record);
void from_json(const nlohmann::json& j, GenerationRecord& record);
void to_json(nlohmann::json& j, const ProcGenConfig& config);
void from_json(const nlohmann::json& j, ProcGenConfig& config);

}  // namespace synthforge
