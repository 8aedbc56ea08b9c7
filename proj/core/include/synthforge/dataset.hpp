#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthforge/parallel.hpp"

namespace synthforge {

enum class SourceDb { fractal, proc, morph, flat };

/// "FractalDB", "ProcSynthDB", "MorphSynthDB", "FlatWorldDB".
std::string to_string(SourceDb source);
/// Throws ParameterError for unknown names.
SourceDb source_db_from_string(const std::string& name);

inline constexpr const char* kManifestName = "manifest.jsonl";

/// One image of a dataset. Serialized as one JSON object per manifest line.
struct ManifestEntry {
  std::size_t class_id = 0;
  std::string source;
  std::size_t source_class = 0;
  std::size_t image_index = 0;
  /// Relative to the dataset root.
  std::string path;
  int width = 0;
  int height = 0;
  /// Mesh file or IFS identifier the image was made from.
  std::string reference;
  /// Seeds and indices that regenerate the image, e.g. {"seed", "class", "image"}.
  nlohmann::json seed_chain = nlohmann::json::object();
  /// Root of the source database for entries copied into a combination.
  std::string origin;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

void to_json(nlohmann::json& j, const ManifestEntry& entry);
void from_json(const nlohmann::json& j, ManifestEntry& entry);

/// Writes root/manifest.jsonl sorted by (class id, image index). Keys are
/// emitted in sorted order, so equal entry sets give equal bytes.
void write_manifest(const std::filesystem::path& root, std::vector<ManifestEntry> entries);

/// Throws FormatError when the manifest is missing or malformed.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& root);

struct DatasetComponent {
  SourceDb source = SourceDb::proc;
  std::size_t classes = 0;
  /// Directory of the generated source database (holds its manifest).
  std::filesystem::path root;
};

struct DatasetSpec {
  std::vector<DatasetComponent> components;
  std::size_t images_per_class = 1000;
  std::uint64_t seed = 0;
  std::filesystem::path output;
  /// Raises the total class count by taking extra classes round-robin.
  std::optional<std::size_t> pad_to;
};

/// Throws ParameterError.
void validate(const DatasetSpec& spec);

/// Classes taken from each component after padding.
std::vector<std::size_t> resolved_class_counts(const DatasetSpec& spec);

void to_json(nlohmann::json& j, const DatasetSpec& spec);
/// Relative component roots are resolved against `base`.
DatasetSpec dataset_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base = {});

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
  std::size_t classes = 0;
};

/// Takes the first k classes (and first images_per_class images) of every
/// source, interleaves them round-robin into dense global ids, hard-links or
/// copies the images to root/class_%04d/img_%04d.png and writes the manifest
/// plus spec.json. Throws CapacityError naming a source that is too small.
DatasetManifest build_combination(const DatasetSpec& spec, const WorkerPool& pool = WorkerPool{});

struct Finding {
  enum class Kind { missing_file, unreadable_image, dimension_mismatch, class_gap, nonuniform_count, duplicate_entry, empty_dataset };
  Kind kind;
  std::string message;
};

std::string to_string(Finding::Kind kind);

struct ValidationReport {
  std::size_t entries = 0;
  std::size_t classes = 0;
  std::vector<Finding> findings;
  bool ok() const { return findings.empty(); }
  std::size_t count(Finding::Kind kind) const;
};

/// Checks file existence, PNG dimensions, dense class ids, uniform per-class
/// counts and duplicates. Throws FormatError for a missing or malformed manifest.
ValidationReport validate_manifest(const std::filesystem::path& root, const WorkerPool& pool = WorkerPool{});

struct SourceStats {
  std::size_t classes = 0;
  std::size_t images = 0;
  double mean_foreground_fraction = 0.0;
};

struct DatasetStats {
  std::size_t classes = 0;
  std::size_t images_per_class = 0;
  std::size_t images = 0;
  std::uintmax_t bytes = 0;
  std::map<std::string, SourceStats> sources;
};

/// Requires a manifest that validates cleanly: an empty dataset throws
/// EmptyInputError, any other finding ContractViolation.
DatasetStats dataset_stats(const std::filesystem::path& root, const WorkerPool& pool = WorkerPool{});

void to_json(nlohmann::json& j, const ValidationReport& report);
void to_json(nlohmann::json& j, const DatasetStats& stats);

/// "class_0007/img_0003.png"
std::string image_relative_path(std::size_t class_index, std::size_t image_index);

}  // namespace synthforge
