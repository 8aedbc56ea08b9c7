#include "synthforge/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "synthforge/errors.hpp"
#include "synthforge/image.hpp"

namespace fs = std::filesystem;

namespace synthforge {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

void link_or_copy(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::remove(to, ec);
  fs::create_hard_link(from, to, ec);
  if (!ec) return;
  fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

bool entry_order(const ManifestEntry& a, const ManifestEntry& b) {
  return std::tie(a.class_id, a.image_index) < std::tie(b.class_id, b.image_index);
}

}  // namespace

std::string to_string(SourceDb source) {
  switch (source) {
    case SourceDb::fractal: return "FractalDB";
    case SourceDb::proc: return "ProcSynthDB";
    case SourceDb::morph: return "MorphSynthDB";
    case SourceDb::flat: return "FlatWorldDB";
  }
  return "ProcSynthDB";
}

SourceDb source_db_from_string(const std::string& name) {
  for (SourceDb s : {SourceDb::fractal, SourceDb::proc, SourceDb::morph, SourceDb::flat}) {
    if (to_string(s) == name) return s;
  }
  throw ParameterError("unknown source database: " + name);
}

std::string image_relative_path(std::size_t class_index, std::size_t image_index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "class_%04zu/img_%04zu.png", class_index, image_index);
  return buf;
}

void to_json(nlohmann::json& j, const ManifestEntry& e) {
  j = {{"class_id", e.class_id},   {"source", e.source},       {"source_class", e.source_class},
       {"image_index", e.image_index}, {"path", e.path},        {"width", e.width},
       {"height", e.height},       {"reference", e.reference}, {"seed_chain", e.seed_chain}};
  if (!e.origin.empty()) j["origin"] = e.origin;
}

void from_json(const nlohmann::json& j, ManifestEntry& e) {
  e.class_id = j.at("class_id").get<std::size_t>();
  e.source = j.at("source").get<std::string>();
  e.source_class = j.at("source_class").get<std::size_t>();
  e.image_index = j.at("image_index").get<std::size_t>();
  e.path = j.at("path").get<std::string>();
  e.width = j.at("width").get<int>();
  e.height = j.at("height").get<int>();
  e.reference = j.value("reference", std::string{});
  e.seed_chain = j.value("seed_chain", nlohmann::json::object());
  e.origin = j.value("origin", std::string{});
}

void write_manifest(const fs::path& root, std::vector<ManifestEntry> entries) {
  std::stable_sort(entries.begin(), entries.end(), entry_order);
  fs::create_directories(root);
  const fs::path file = root / kManifestName;
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + file.string());
  for (const auto& e : entries) out << nlohmann::json(e).dump() << '\n';
  if (!out) throw FormatError("write failed: " + file.string());
}

std::vector<ManifestEntry> read_manifest(const fs::path& root) {
  const fs::path file = root / kManifestName;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot read manifest " + file.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      entries.push_back(nlohmann::json::parse(line).get<ManifestEntry>());
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return entries;
}

void validate(const DatasetSpec& spec) {
  require(!spec.components.empty(), "a dataset needs at least one component");
  require(spec.images_per_class >= 1, "images_per_class must be >= 1");
  std::size_t total = 0;
  for (const auto& c : spec.components) {
    require(c.classes >= 1, "component class counts must be >= 1 (" + to_string(c.source) + ")");
    require(!c.root.empty(), "component root missing for " + to_string(c.source));
    total += c.classes;
  }
  if (spec.pad_to) require(*spec.pad_to >= total, "pad_to is smaller than the summed class counts");
}

std::vector<std::size_t> resolved_class_counts(const DatasetSpec& spec) {
  validate(spec);
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  for (const auto& c : spec.components) {
    counts.push_back(c.classes);
    total += c.classes;
  }
  for (std::size_t j = 0; spec.pad_to && total < *spec.pad_to; ++j, ++total) ++counts[j % counts.size()];
  return counts;
}

void to_json(nlohmann::json& j, const DatasetSpec& spec) {
  nlohmann::json components = nlohmann::json::array();
  for (const auto& c : spec.components) {
    components.push_back({{"source", to_string(c.source)}, {"classes", c.classes}, {"root", c.root.string()}});
  }
  j = {{"components", std::move(components)},
       {"images_per_class", spec.images_per_class},
       {"seed", spec.seed},
       {"output", spec.output.string()}};
  j["pad_to"] = spec.pad_to ? nlohmann::json(*spec.pad_to) : nlohmann::json(nullptr);
}

DatasetSpec dataset_spec_from_json(const nlohmann::json& j, const fs::path& base) {
  DatasetSpec spec;
  try {
    for (const auto& c : j.at("components")) {
      DatasetComponent comp;
      comp.source = source_db_from_string(c.at("source").get<std::string>());
      comp.classes = c.at("classes").get<std::size_t>();
      fs::path root = c.at("root").get<std::string>();
      comp.root = root.is_relative() && !base.empty() ? base / root : root;
      spec.components.push_back(std::move(comp));
    }
    spec.images_per_class = j.value("images_per_class", spec.images_per_class);
    spec.seed = j.value("seed", spec.seed);
    spec.output = j.value("output", std::string{});
    if (j.contains("pad_to") && !j["pad_to"].is_null()) spec.pad_to = j["pad_to"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed dataset spec: ") + e.what());
  }
  return spec;
}

DatasetManifest build_combination(const DatasetSpec& spec, const WorkerPool& pool) {
  const auto counts = resolved_class_counts(spec);
  require(!spec.output.empty(), "dataset output root missing");

  // Per source: entries grouped by source class, ordered by image index.
  std::vector<std::map<std::size_t, std::vector<ManifestEntry>>> sources(spec.components.size());
  for (std::size_t s = 0; s < spec.components.size(); ++s) {
    const auto& comp = spec.components[s];
    const std::string name = to_string(comp.source);
    for (auto& e : read_manifest(comp.root)) sources[s][e.class_id].push_back(std::move(e));
    for (std::size_t c = 0; c < counts[s]; ++c) {
      auto it = sources[s].find(c);
      if (it == sources[s].end()) {
        throw CapacityError(name + " at " + comp.root.string() + " has fewer than " + std::to_string(counts[s]) +
                            " classes");
      }
      if (it->second.size() < spec.images_per_class) {
        throw CapacityError(name + " class " + std::to_string(c) + " has " + std::to_string(it->second.size()) +
                            " images, " + std::to_string(spec.images_per_class) + " requested");
      }
      std::sort(it->second.begin(), it->second.end(), entry_order);
    }
  }

  // Round-robin interleave: global id g draws from source g mod n until a
  // source runs out.
  std::vector<std::pair<std::size_t, std::size_t>> assignment;  // (source, source class)
  const std::size_t max_count = *std::max_element(counts.begin(), counts.end());
  for (std::size_t round = 0; round < max_count; ++round) {
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (round < counts[s]) assignment.emplace_back(s, round);
    }
  }

  fs::create_directories(spec.output);
  const auto per_class = pool.map(assignment.size(), [&](std::size_t g) {
    const auto [s, c] = assignment[g];
    const auto& comp = spec.components[s];
    const auto& source_entries = sources[s].at(c);
    std::vector<ManifestEntry> out;
    out.reserve(spec.images_per_class);
    for (std::size_t i = 0; i < spec.images_per_class; ++i) {
      const ManifestEntry& src = source_entries[i];
      ManifestEntry e = src;
      e.class_id = g;
      e.source = to_string(comp.source);
      e.source_class = c;
      e.image_index = i;
      e.path = image_relative_path(g, i);
      e.origin = fs::absolute(comp.root).lexically_normal().string();
      const fs::path dest = spec.output / e.path;
      fs::create_directories(dest.parent_path());
      link_or_copy(comp.root / src.path, dest);
      out.push_back(std::move(e));
    }
    return out;
  });

  DatasetManifest manifest;
  manifest.root = spec.output;
  manifest.classes = assignment.size();
  for (const auto& cls : per_class) manifest.entries.insert(manifest.entries.end(), cls.begin(), cls.end());
  write_manifest(spec.output, manifest.entries);

  DatasetSpec resolved = spec;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    resolved.components[s].classes = counts[s];
    resolved.components[s].root = fs::absolute(resolved.components[s].root).lexically_normal();
  }
  resolved.pad_to.reset();
  // The output root is left out so a replay elsewhere gives identical bytes.
  nlohmann::json echoed = resolved;
  echoed.erase("output");
  std::ofstream(spec.output / "spec.json", std::ios::binary | std::ios::trunc) << echoed.dump(2) << '\n';
  return manifest;
}

std::string to_string(Finding::Kind kind) {
  switch (kind) {
    case Finding::Kind::missing_file: return "missing_file";
    case Finding::Kind::unreadable_image: return "unreadable_image";
    case Finding::Kind::dimension_mismatch: return "dimension_mismatch";
    case Finding::Kind::class_gap: return "class_gap";
    case Finding::Kind::nonuniform_count: return "nonuniform_count";
    case Finding::Kind::duplicate_entry: return "duplicate_entry";
    case Finding::Kind::empty_dataset: return "empty_dataset";
  }
  return "unknown";
}

std::size_t ValidationReport::count(Finding::Kind kind) const {
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [kind](const Finding& f) { return f.kind == kind; }));
}

ValidationReport validate_manifest(const fs::path& root, const WorkerPool& pool) {
  const auto entries = read_manifest(root);
  ValidationReport report;
  report.entries = entries.size();
  if (entries.empty()) {
    report.findings.push_back({Finding::Kind::empty_dataset, "manifest has no entries"});
    return report;
  }

  const auto file_findings = pool.map(entries.size(), [&](std::size_t i) -> std::optional<Finding> {
    const auto& e = entries[i];
    const fs::path file = root / e.path;
    if (!fs::exists(file)) return Finding{Finding::Kind::missing_file, "missing file " + e.path};
    try {
      const ImageHeader h = read_png_header(file);
      if (h.width != e.width || h.height != e.height) {
        return Finding{Finding::Kind::dimension_mismatch,
                       e.path + " is " + std::to_string(h.width) + "x" + std::to_string(h.height) + ", manifest says " +
                           std::to_string(e.width) + "x" + std::to_string(e.height)};
      }
    } catch (const Error& err) {
      return Finding{Finding::Kind::unreadable_image, e.path + ": " + err.what()};
    }
    return std::nullopt;
  });
  for (const auto& f : file_findings) {
    if (f) report.findings.push_back(*f);
  }

  std::map<std::size_t, std::size_t> per_class;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : entries) {
    ++per_class[e.class_id];
    if (!seen.emplace(e.class_id, e.image_index).second) {
      report.findings.push_back({Finding::Kind::duplicate_entry, "duplicate entry for class " +
                                                                     std::to_string(e.class_id) + " image " +
                                                                     std::to_string(e.image_index)});
    }
  }
  report.classes = per_class.size();

  const std::size_t max_id = per_class.rbegin()->first;
  for (std::size_t id = 0; id <= max_id; ++id) {
    if (!per_class.count(id)) {
      report.findings.push_back({Finding::Kind::class_gap, "class id " + std::to_string(id) + " is missing"});
    }
  }

  // The most common per-class count is taken as the intended budget.
  std::map<std::size_t, std::size_t> histogram;
  for (const auto& [id, n] : per_class) ++histogram[n];
  const auto mode = std::max_element(histogram.begin(), histogram.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; })->first;
  for (const auto& [id, n] : per_class) {
    if (n != mode) {
      report.findings.push_back({Finding::Kind::nonuniform_count, "class " + std::to_string(id) + " has " +
                                                                      std::to_string(n) + " images, expected " +
                                                                      std::to_string(mode)});
    }
  }
  return report;
}

DatasetStats dataset_stats(const fs::path& root, const WorkerPool& pool) {
  const ValidationReport report = validate_manifest(root, pool);
  if (report.count(Finding::Kind::empty_dataset)) throw EmptyInputError("dataset at " + root.string() + " is empty");
  if (!report.ok()) {
    throw ContractViolation("dataset at " + root.string() + " does not validate: " + report.findings.front().message);
  }
  const auto entries = read_manifest(root);

  struct PerImage {
    double foreground = 0.0;
    std::uintmax_t bytes = 0;
  };
  const auto measured = pool.map(entries.size(), [&](std::size_t i) {
    const fs::path file = root / entries[i].path;
    return PerImage{read_png(file).foreground_fraction(), fs::file_size(file)};
  });

  DatasetStats stats;
  stats.classes = report.classes;
  stats.images = entries.size();
  stats.images_per_class = entries.size() / report.classes;
  std::map<std::string, std::set<std::size_t>> classes_by_source;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& s = stats.sources[entries[i].source];
    ++s.images;
    s.mean_foreground_fraction += measured[i].foreground;
    stats.bytes += measured[i].bytes;
    classes_by_source[entries[i].source].insert(entries[i].class_id);
  }
  for (auto& [name, s] : stats.sources) {
    s.classes = classes_by_source[name].size();
    s.mean_foreground_fraction /= static_cast<double>(s.images);
  }
  return stats;
}

void to_json(nlohmann::json& j, const ValidationReport& report) {
  nlohmann::json findings = nlohmann::json::array();
  for (const auto& f : report.findings) findings.push_back({{"kind", to_string(f.kind)}, {"message", f.message}});
  j = {{"entries", report.entries}, {"classes", report.classes}, {"ok", report.ok()}, {"findings", std::move(findings)}};
}

void to_json(nlohmann::json& j, const DatasetStats& stats) {
  nlohmann::json sources = nlohmann::json::object();
  for (const auto& [name, s] : stats.sources) {
    sources[name] = {{"classes", s.classes}, {"images", s.images}, {"mean_foreground_fraction", s.mean_foreground_fraction}};
  }
  j = {{"classes", stats.classes},
       {"images_per_class", stats.images_per_class},
       {"images", stats.images},
       {"bytes", stats.bytes},
       {"sources", std::move(sources)}};
}

}  // namespace synthforge
