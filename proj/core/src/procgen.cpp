#include "synthforge/procgen.hpp"

#include <cstdio>
#include <string>

#include "synthforge/errors.hpp"
#include "synthforge/json_types.hpp"
#include "synthforge/rng.hpp"

namespace synthforge {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ParameterError(what);
}

bool valid_interval(const Interval& r) { return std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi; }

PrimitiveInstance sample_instance(const ProcGenConfig& config, PrimitiveKind kind, RngStream& rng) {
  PrimitiveInstance inst;
  PrimitiveSpec& spec = inst.spec;
  spec.kind = kind;
  spec.size_a = rng.uniform(config.size.lo, config.size.hi);
  switch (kind) {
    case PrimitiveKind::cube:
      spec.size_b = spec.size_a;
      spec.radial_segments = 3;
      spec.axial_segments = 3;
      break;
    case PrimitiveKind::sphere:
      spec.size_b = spec.size_a;
      spec.radial_segments = config.sphere_segments;
      spec.axial_segments = config.sphere_rings;
      break;
    case PrimitiveKind::cone:
    case PrimitiveKind::cylinder:
      spec.size_b = rng.uniform(config.size.lo, config.size.hi);
      spec.radial_segments = config.round_segments;
      spec.axial_segments = config.round_stacks;
      break;
    case PrimitiveKind::torus:
      spec.size_b = spec.size_a * rng.uniform(config.torus_tube_ratio.lo, config.torus_tube_ratio.hi);
      spec.radial_segments = config.torus_segments;
      spec.axial_segments = config.torus_tube_segments;
      break;
  }
  const double t = config.translation_range;
  spec.placement.translation = {rng.uniform(-t, t), rng.uniform(-t, t), rng.uniform(-t, t)};
  spec.placement.scale = rng.uniform(config.scale.lo, config.scale.hi);
  if (config.random_rotation) spec.placement.rotation = rng.rotation();

  // Three-way choice: wireframe, subdivide, or leave as is.
  switch (rng.uniform_int(0, 2)) {
    case 0:
      inst.modifier = Wireframe{rng.uniform(config.wireframe_thickness.lo, config.wireframe_thickness.hi)};
      break;
    case 1:
      inst.modifier = Subdivide{static_cast<int>(rng.uniform_int(1, config.max_subdivision_level))};
      break;
    default:
      break;
  }
  return inst;
}

}  // namespace

void validate(const ProcGenConfig& config) {
  require(config.n >= 1, "n must be >= 1");
  require(config.v >= 1, "v must be >= 1");
  require(config.w >= 1, "w must be >= 1");
  require(std::isfinite(config.max_size) && config.max_size > 0.0, "max_size must be > 0");
  require(std::isfinite(config.translation_range) && config.translation_range >= 0.0,
          "translation_range must be >= 0");
  require(valid_interval(config.scale) && config.scale.lo > 0.0, "scale range must be positive");
  require(valid_interval(config.size) && config.size.lo > 0.0, "size range must be positive");
  require(valid_interval(config.torus_tube_ratio) && config.torus_tube_ratio.lo > 0.0 &&
              config.torus_tube_ratio.hi < 1.0,
          "torus tube ratio must lie in (0, 1)");
  require(valid_interval(config.wireframe_thickness) && config.wireframe_thickness.lo > 0.0,
          "wireframe thickness range must be positive");
  require(config.max_subdivision_level >= 1 && config.max_subdivision_level <= 3,
          "max_subdivision_level must be in [1, 3]");
  require(config.max_rejections >= 1, "max_rejections must be >= 1");
}

std::string class_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "class_%04zu", index);
  return buf;
}

Mesh build_mesh(const GenerationRecord& record, GeometryWarnings* warnings) {
  std::vector<Mesh> parts;
  parts.reserve(record.instances.size());
  for (const PrimitiveInstance& inst : record.instances) {
    Mesh part = make_primitive(inst.spec);
    if (inst.modifier) part = apply_modifier(part, *inst.modifier, warnings);
    parts.push_back(std::move(part));
  }
  return merge(parts, warnings);
}

ClassMesh generate_class_mesh(const ProcGenConfig& config, std::size_t class_index) {
  validate(config);
  if (class_index >= config.n) throw ParameterError("class_index must be < n");
  RngStream rng(config.seed, class_index);
  std::size_t rejections = 0;

  while (true) {
    GenerationRecord record;
    record.class_index = class_index;
    record.seed = config.seed;
    record.repetitions = static_cast<int>(rng.uniform_int(1, config.v));
    for (int j = 0; j < record.repetitions; ++j) {
      std::array<int, 5> counts{};
      for (std::size_t k = 0; k < counts.size(); ++k) {
        counts[k] = static_cast<int>(rng.uniform_int(0, config.w));
        for (int l = 0; l < counts[k]; ++l) {
          record.instances.push_back(sample_instance(config, kAllPrimitiveKinds[k], rng));
        }
      }
      record.instance_counts.push_back(counts);
    }

    if (!record.instances.empty()) {
      GeometryWarnings warnings;
      Mesh mesh = build_mesh(record, &warnings);
      if (!mesh.empty()) {
        const double extent = bounding_box(mesh).max_extent();
        if (extent <= config.max_size) {
          record.rejections = rejections;
          record.max_extent = extent;
          return {class_index, std::move(mesh), std::move(record), warnings};
        }
      }
    }
    // An empty scene counts as a rejection like an oversized one.
    if (++rejections >= config.max_rejections) {
      throw GenerationExhaustedError("class " + std::to_string(class_index) + ": " +
                                     std::to_string(rejections) + " consecutive quality-control rejections");
    }
  }
}

std::vector<ClassMesh> generate_db(const ProcGenConfig& config, const WorkerPool& pool) {
  validate(config);
  return pool.map(config.n, [&](std::size_t i) { return generate_class_mesh(config, i); });
}

void to_json(nlohmann::json& j, const GenerationRecord& record) {
  nlohmann::json instances = nlohmann::json::array();
  for (const auto& inst : record.instances) {
    nlohmann::json item = {{"primitive", inst.spec}};
    item["modifier"] = inst.modifier ? nlohmann::json(*inst.modifier) : nlohmann::json(nullptr);
    instances.push_back(std::move(item));
  }
  j = {{"class_index", record.class_index},
       {"class_id", class_id(record.class_index)},
       {"seed", record.seed},
       {"p", record.repetitions},
       {"instance_counts", record.instance_counts},
       {"instances", std::move(instances)},
       {"rejections", record.rejections},
       {"max_extent", record.max_extent}};
}

void from_json(const nlohmann::json& j, GenerationRecord& record) {
  record.class_index = j.at("class_index").get<std::size_t>();
  record.seed = j.at("seed").get<std::uint64_t>();
  record.repetitions = j.at("p").get<int>();
  record.instance_counts = j.at("instance_counts").get<std::vector<std::array<int, 5>>>();
  record.instances.clear();
  for (const auto& item : j.at("instances")) {
    PrimitiveInstance inst;
    inst.spec = item.at("primitive").get<PrimitiveSpec>();
    if (!item.at("modifier").is_null()) inst.modifier = item.at("modifier").get<ModifierSpec>();
    record.instances.push_back(std::move(inst));
  }
  record.rejections = j.at("rejections").get<std::size_t>();
  record.max_extent = j.at("max_extent").get<double>();
}

void to_json(nlohmann::json& j, const ProcGenConfig& c) {
  j = {{"n", c.n},
       {"v", c.v},
       {"w", c.w},
       {"max_size", c.max_size},
       {"seed", c.seed},
       {"translation_range", c.translation_range},
       {"scale", {c.scale.lo, c.scale.hi}},
       {"size", {c.size.lo, c.size.hi}},
       {"torus_tube_ratio", {c.torus_tube_ratio.lo, c.torus_tube_ratio.hi}},
       {"random_rotation", c.random_rotation},
       {"wireframe_thickness", {c.wireframe_thickness.lo, c.wireframe_thickness.hi}},
       {"max_subdivision_level", c.max_subdivision_level},
       {"sphere_segments", c.sphere_segments},
       {"sphere_rings", c.sphere_rings},
       {"torus_segments", c.torus_segments},
       {"torus_tube_segments", c.torus_tube_segments},
       {"round_segments", c.round_segments},
       {"round_stacks", c.round_stacks},
       {"max_rejections", c.max_rejections}};
}

void from_json(const nlohmann::json& j, ProcGenConfig& c) {
  const auto interval = [&](const char* key, Interval& out) {
    if (j.contains(key)) {
      const auto& v = j.at(key);
      out = {v.at(0).get<double>(), v.at(1).get<double>()};
    }
  };
  c.n = j.value("n", c.n);
  c.v = j.value("v", c.v);
  c.w = j.value("w", c.w);
  c.max_size = j.value("max_size", c.max_size);
  c.seed = j.value("seed", c.seed);
  c.translation_range = j.value("translation_range", c.translation_range);
  interval("scale", c.scale);
  interval("size", c.size);
  interval("torus_tube_ratio", c.torus_tube_ratio);
  c.random_rotation = j.value("random_rotation", c.random_rotation);
  interval("wireframe_thickness", c.wireframe_thickness);
  c.max_subdivision_level = j.value("max_subdivision_level", c.max_subdivision_level);
  c.sphere_segments = j.value("sphere_segments", c.sphere_segments);
  c.sphere_rings = j.value("sphere_rings", c.sphere_rings);
  c.torus_segments = j.value("torus_segments", c.torus_segments);
  c.torus_tube_segments = j.value("torus_tube_segments", c.torus_tube_segments);
  c.round_segments = j.value("round_segments", c.round_segments);
  c.round_stacks = j.value("round_stacks", c.round_stacks);
  c.max_rejections = j.value("max_rejections", c.max_rejections);
}

}  // namespace synthforge
