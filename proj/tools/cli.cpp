#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "synthforge/errors.hpp"
#include "synthforge/obj_io.hpp"
#include "synthforge/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace synthforge::cli {

namespace {

struct Runtime {
  WorkerPool pool{1};
  bool progress_json = false;
};

/// Counts finished work items; optionally emits one JSON line per item on stdout.
class Progress {
 public:
  Progress(std::string command, std::size_t total, bool json_lines)
      : command_(std::move(command)), total_(total), json_lines_(json_lines) {}

  void tick() {
    std::lock_guard lock(mutex_);
    ++done_;
    if (json_lines_) {
      std::cout << json{{"command", command_}, {"done", done_}, {"total", total_}}.dump() << '\n' << std::flush;
    }
    spdlog::debug("{}: {}/{}", command_, done_, total_);
  }

 private:
  std::string command_;
  std::size_t total_;
  bool json_lines_;
  std::size_t done_ = 0;
  std::mutex mutex_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed: " + path.string());
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& line : lines) {
    text += line;
    text += '\n';
  }
  return text;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("file not found: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_spec(const fs::path& out, const std::string& command, const json& options) {
  write_text(out / "spec.json", json{{"command", command}, {"options", options}}.dump(2) + "\n");
}

std::string absolute_string(const fs::path& p) { return fs::absolute(p).lexically_normal().string(); }

std::string mesh_file_name(std::size_t class_index) { return class_id(class_index) + ".obj"; }

/// The meshes/ subdirectory of a database root, or the directory itself.
fs::path mesh_directory(const fs::path& root) {
  const fs::path sub = root / "meshes";
  return fs::is_directory(sub) ? sub : root;
}

/// class_%04d.obj files sorted by class index.
std::vector<std::pair<std::size_t, fs::path>> list_class_meshes(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError("mesh directory not found: " + dir.string());
  std::vector<std::pair<std::size_t, fs::path>> meshes;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() < 11 || name.rfind("class_", 0) != 0 || entry.path().extension() != ".obj") continue;
    const std::string digits = name.substr(6, name.size() - 10);
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) continue;
    meshes.emplace_back(index, entry.path());
  }
  std::sort(meshes.begin(), meshes.end());
  return meshes;
}

std::uint64_t resolve_seed(const CLI::Option* option, std::uint64_t value) {
  if (option->count() > 0) return value;
  if (const char* env = std::getenv("SYNTHFORGE_SEED")) {
    std::uint64_t seed = 0;
    const std::string text = env;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ParameterError("SYNTHFORGE_SEED is not an unsigned integer: " + text);
    }
    return seed;
  }
  return 0;
}

/// Turns the "options" object of a spec.json into flag tokens.
std::vector<std::string> option_tokens(const json& options) {
  std::vector<std::string> tokens;
  for (const auto& [key, value] : options.items()) {
    if (value.is_null() || (value.is_boolean() && !value.get<bool>())) continue;
    tokens.push_back("--" + key);
    if (value.is_boolean()) continue;
    tokens.push_back(value.is_string() ? value.get<std::string>() : value.dump());
  }
  return tokens;
}

/// Splices the options of `--config <file>` in front of the explicit flags so
/// that explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
  }
  if (!file) return args;
  const json spec = read_json_file(*file);
  if (spec.is_object() && spec.contains("components") && !spec.contains("command")) {
    // A dataset spec, as written by mix.
    std::vector<std::string> out(args.begin(), args.end());
    auto pos = std::find(out.begin() + 1, out.end(), std::string("mix"));
    if (pos == out.end()) pos = out.insert(out.begin() + 1, "mix");
    out.insert(pos + 1, {"--spec", *file});
    return out;
  }
  if (!spec.is_object() || !spec.contains("command") || !spec.contains("options")) {
    throw FormatError(*file + ": expected {\"command\": ..., \"options\": {...}}");
  }
  const std::string command = spec["command"].get<std::string>();
  std::vector<std::string> out(args.begin(), args.end());
  auto pos = std::find(out.begin() + 1, out.end(), command);
  if (pos == out.end()) pos = out.insert(out.begin() + 1, command);
  const auto tokens = option_tokens(spec["options"]);
  out.insert(pos + 1, tokens.begin(), tokens.end());
  return out;
}

// ---------------------------------------------------------------------------

struct GenProc {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  int v = 3;
  int w = 5;
  double max_size = 10.0;
  double translation_range = 3.0;
  std::size_t max_rejections = 1000;
  std::string out;
  CLI::Option* seed_opt = nullptr;

  void setup(CLI::App& app) {
    app.add_option("--n", n, "number of classes")->check(CLI::PositiveNumber);
    seed_opt = app.add_option("--seed", seed, "master seed (falls back to SYNTHFORGE_SEED)");
    app.add_option("--v", v, "max outer repetitions")->check(CLI::PositiveNumber);
    app.add_option("--w", w, "max instances per primitive type")->check(CLI::NonNegativeNumber);
    app.add_option("--max-size", max_size, "max bounding-box extent")->check(CLI::PositiveNumber);
    app.add_option("--translation-range", translation_range, "half-width of the translation cube");
    app.add_option("--max-rejections", max_rejections, "rejections per class before failing");
    app.add_option("--out", out, "output directory")->required();
  }

  json options() const {
    return {{"n", n}, {"seed", seed}, {"v", v}, {"w", w}, {"max-size", max_size},
            {"translation-range", translation_range}, {"max-rejections", max_rejections}};
  }

  int execute(Runtime& rt) {
    seed = resolve_seed(seed_opt, seed);
    const json opts = options();
    const ProcGenConfig config = proc_config(opts);
    validate(config);
    const fs::path root = out;
    fs::create_directories(root / "meshes");

    Progress progress("gen-proc", config.n, rt.progress_json);
    std::vector<std::string> log(config.n);
    std::vector<std::size_t> warnings(config.n);
    rt.pool.parallel_for(config.n, [&](std::size_t i) {
      const ClassMesh cm = generate_class_mesh(config, i);
      save_obj(root / "meshes" / mesh_file_name(i), cm.mesh);
      json rec = cm.record;
      rec["vertices"] = cm.mesh.vertices.size();
      rec["faces"] = cm.mesh.faces.size();
      rec["warnings"] = {{"degenerate_edges", cm.warnings.degenerate_edges},
                         {"non_manifold_edges", cm.warnings.non_manifold_edges},
                         {"degenerate_faces", cm.warnings.degenerate_faces}};
      log[i] = rec.dump();
      warnings[i] = cm.warnings.total();
      progress.tick();
    });
    write_text(root / "genlog.jsonl", join_lines(log));
    write_spec(root, "gen-proc", opts);
    std::size_t total_warnings = 0;
    for (auto w_count : warnings) total_warnings += w_count;
    if (total_warnings) spdlog::warn("gen-proc: {} geometry warnings (see genlog.jsonl)", total_warnings);
    spdlog::info("gen-proc: wrote {} meshes to {}", config.n, (root / "meshes").string());
    return kExitOk;
  }
};

struct GenMorph {
  std::string base;
  std::size_t n_base = 100;
  std::size_t variants = 10;
  std::uint64_t seed = 0;
  GpDeformParams params;
  std::string out;
  CLI::Option* seed_opt = nullptr;

  void setup(CLI::App& app) {
    app.add_option("--base", base, "procedural database (or mesh directory) with the base meshes")->required();
    app.add_option("--n-base", n_base, "number of base meshes")->check(CLI::PositiveNumber);
    app.add_option("--variants", variants, "deformed variants per base")->check(CLI::PositiveNumber);
    seed_opt = app.add_option("--seed", seed, "master seed (falls back to SYNTHFORGE_SEED)");
    app.add_option("--b-s", params.shape_magnitude, "shape kernel magnitude");
    app.add_option("--c-s", params.shape_bandwidth, "shape kernel bandwidth");
    app.add_option("--b-a", params.albedo_magnitude, "albedo kernel magnitude");
    app.add_option("--c-a", params.albedo_bandwidth, "albedo kernel bandwidth");
    app.add_option("--rank", params.rank, "eigenpairs kept per kernel")->check(CLI::PositiveNumber);
    app.add_option("--downsample", params.downsample_target, "max control points")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "output directory")->required();
  }

  json options() const {
    return {{"base", absolute_string(base)},   {"n-base", n_base},
            {"variants", variants},            {"seed", seed},
            {"b-s", params.shape_magnitude},   {"c-s", params.shape_bandwidth},
            {"b-a", params.albedo_magnitude},  {"c-a", params.albedo_bandwidth},
            {"rank", params.rank},             {"downsample", params.downsample_target}};
  }

  int execute(Runtime& rt) {
    seed = resolve_seed(seed_opt, seed);
    const json opts = options();
    const GpDeformParams p = morph_params(opts);
    validate(p);
    const fs::path mesh_dir = mesh_directory(base);
    std::vector<fs::path> bases;
    for (std::size_t i = 0; i < n_base; ++i) {
      fs::path file = mesh_dir / mesh_file_name(i);
      if (!fs::exists(file)) {
        throw CapacityError("base mesh directory " + mesh_dir.string() + " has no " + file.filename().string());
      }
      bases.push_back(std::move(file));
    }
    const fs::path root = out;
    fs::create_directories(root / "meshes");

    Progress progress("gen-morph", n_base, rt.progress_json);
    std::vector<std::string> log(n_base * variants);
    rt.pool.parallel_for(n_base, [&](std::size_t i) {
      const Mesh mesh = load_obj(bases[i]);
      for (const MorphClass& c : generate_morph_classes(mesh, i, p, variants)) {
        save_obj(root / "meshes" / mesh_file_name(c.class_index), c.mesh);
        log[c.class_index] = json{{"class_index", c.class_index},
                                  {"class_id", class_id(c.class_index)},
                                  {"base_index", c.base_index},
                                  {"variant_index", c.variant_index},
                                  {"base_mesh", absolute_string(bases[i])},
                                  {"control_points", c.control_points},
                                  {"vertices", c.mesh.vertices.size()},
                                  {"seed", p.seed}}
                                 .dump();
      }
      progress.tick();
    });
    write_text(root / "genlog.jsonl", join_lines(log));
    write_spec(root, "gen-morph", opts);
    spdlog::info("gen-morph: wrote {} meshes to {}", log.size(), (root / "meshes").string());
    return kExitOk;
  }
};

struct GenFractal {
  std::size_t classes = 1000;
  std::size_t images = 1000;
  std::uint64_t seed = 0;
  double min_fill = 0.2;
  std::size_t points = 100000;
  int res = 256;
  std::size_t max_attempts = 20000;
  std::string out;
  CLI::Option* seed_opt = nullptr;

  void setup(CLI::App& app) {
    app.add_option("--classes", classes, "number of classes")->check(CLI::PositiveNumber);
    app.add_option("--images", images, "images per class")->check(CLI::PositiveNumber);
    seed_opt = app.add_option("--seed", seed, "master seed (falls back to SYNTHFORGE_SEED)");
    app.add_option("--min-fill", min_fill, "minimum fill rate of an accepted system")->check(CLI::Range(0.0, 1.0));
    app.add_option("--points", points, "chaos-game points per image")->check(CLI::Range(1000, 100000000));
    app.add_option("--res", res, "image resolution")->check(CLI::Range(32, 16384));
    app.add_option("--max-attempts", max_attempts, "systems tried per class")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "output directory")->required();
  }

  json options() const {
    return {{"classes", classes}, {"images", images}, {"seed", seed},  {"min-fill", min_fill},
            {"points", points},   {"res", res},       {"max-attempts", max_attempts}};
  }

  int execute(Runtime& rt) {
    seed = resolve_seed(seed_opt, seed);
    const json opts = options();
    const FractalGenConfig config = fractal_config(opts);
    validate(config);
    const fs::path root = out;
    fs::create_directories(root);

    Progress progress("gen-fractal", classes, rt.progress_json);
    std::vector<std::string> log(classes);
    std::vector<std::vector<ManifestEntry>> entries(classes);
    rt.pool.parallel_for(classes, [&](std::size_t c) {
      const FractalClass fc = generate_fractal_class(config, c);
      fs::create_directories(root / class_id(c));
      std::vector<double> fills;
      for (std::size_t i = 0; i < fc.images.size(); ++i) {
        const std::string rel = image_relative_path(c, i);
        write_png(root / rel, fc.images[i].image);
        fills.push_back(fc.images[i].fill_rate);
        ManifestEntry e;
        e.class_id = c;
        e.source = to_string(SourceDb::fractal);
        e.source_class = c;
        e.image_index = i;
        e.path = rel;
        e.width = e.height = config.augment.resolution;
        e.reference = "ifs:" + class_id(c);
        e.seed_chain = {{"seed", config.seed}, {"class", c}, {"image", i}};
        entries[c].push_back(std::move(e));
      }
      log[c] = json{{"class_index", c},      {"class_id", class_id(c)}, {"attempt", fc.attempt},
                    {"fill_rate", fc.fill_rate}, {"system", fc.system},   {"image_fill_rates", fills}}
                   .dump();
      progress.tick();
    });
    std::vector<ManifestEntry> all;
    for (auto& group : entries) all.insert(all.end(), group.begin(), group.end());
    write_manifest(root, std::move(all));
    write_text(root / "genlog.jsonl", join_lines(log));
    write_spec(root, "gen-fractal", opts);
    spdlog::info("gen-fractal: wrote {} classes x {} images to {}", classes, images, root.string());
    return kExitOk;
  }
};

struct Render {
  std::string meshes;
  std::size_t images_per_class = 1000;
  std::uint64_t seed = 0;
  bool flat = false;
  int res = 256;
  std::string color = "auto";
  std::string aniso_mode = "uniform-range";
  std::string db_name = "auto";
  std::size_t classes = 0;
  double fov = 40.0;
  std::string out;
  CLI::Option* seed_opt = nullptr;

  void setup(CLI::App& app) {
    app.add_option("--meshes", meshes, "mesh database (or directory of class_%04d.obj)")->required();
    app.add_option("--images-per-class", images_per_class, "renders per mesh")->check(CLI::PositiveNumber);
    seed_opt = app.add_option("--seed", seed, "master seed (falls back to SYNTHFORGE_SEED)");
    app.add_flag("--flat", flat, "canonical pose and fixed light; only 2D augmentation varies");
    app.add_option("--res", res, "image resolution")->check(CLI::Range(32, 16384));
    app.add_option("--color", color, "color mode")->check(CLI::IsMember({"auto", "gray", "rgb"}));
    app.add_option("--aniso-mode", aniso_mode, "anisotropic scale factor rule")
        ->check(CLI::IsMember({"uniform-range", "factor2"}));
    app.add_option("--db-name", db_name, "source name written to the manifest")
        ->check(CLI::IsMember({"auto", "ProcSynthDB", "MorphSynthDB", "FlatWorldDB"}));
    app.add_option("--classes", classes, "render only the first N classes (0 = all)");
    app.add_option("--fov", fov, "vertical field of view in degrees")->check(CLI::Range(1.0, 179.0));
    app.add_option("--out", out, "output directory")->required();
  }

  int execute(Runtime& rt) {
    seed = resolve_seed(seed_opt, seed);
    auto files = list_class_meshes(mesh_directory(meshes));
    if (files.empty()) throw EmptyInputError("no class_*.obj meshes under " + meshes);
    if (classes > 0) {
      if (files.size() < classes) {
        throw CapacityError(meshes + " holds " + std::to_string(files.size()) + " meshes, " +
                            std::to_string(classes) + " requested");
      }
      files.resize(classes);
    }
    const bool colored = load_obj(files.front().second).has_albedo();
    if (color == "auto") color = colored ? "rgb" : "gray";
    if (db_name == "auto") {
      db_name = to_string(flat ? SourceDb::flat : (colored ? SourceDb::morph : SourceDb::proc));
    }

    const json opts = {{"meshes", absolute_string(meshes)},
                       {"images-per-class", images_per_class},
                       {"seed", seed},
                       {"flat", flat},
                       {"res", res},
                       {"color", color},
                       {"aniso-mode", aniso_mode},
                       {"db-name", db_name},
                       {"classes", files.size()},
                       {"fov", fov}};
    const RenderPlanConfig plan = render_plan_config(opts);
    const fs::path root = out;
    fs::create_directories(root);

    Progress progress("render", files.size(), rt.progress_json);
    std::vector<std::vector<std::string>> log(files.size());
    std::vector<std::vector<ManifestEntry>> entries(files.size());
    rt.pool.parallel_for(files.size(), [&](std::size_t k) {
      const auto& [c, file] = files[k];
      const std::string mesh_ref = absolute_string(file);
      auto mesh = std::make_shared<const Mesh>(load_obj(file));
      fs::create_directories(root / class_id(c));
      for (RenderJob& job : sample_render_plan(render_class_seed(seed, c), images_per_class, flat, plan)) {
        job.mesh = mesh;
        job.mesh_ref = mesh_ref;
        job.class_index = c;
        const RenderedImage img = rasterize(job);
        const std::string rel = image_relative_path(c, job.image_index);
        write_png(root / rel, img.image);
        log[k].push_back(json(job).dump());
        ManifestEntry e;
        e.class_id = c;
        e.source = db_name;
        e.source_class = c;
        e.image_index = job.image_index;
        e.path = rel;
        e.width = img.image.width;
        e.height = img.image.height;
        e.reference = mesh_ref;
        e.seed_chain = {{"seed", seed}, {"class", c}, {"image", job.image_index}};
        entries[k].push_back(std::move(e));
      }
      progress.tick();
    });
    std::vector<std::string> lines;
    std::vector<ManifestEntry> all;
    for (std::size_t k = 0; k < files.size(); ++k) {
      lines.insert(lines.end(), log[k].begin(), log[k].end());
      all.insert(all.end(), entries[k].begin(), entries[k].end());
    }
    write_manifest(root, std::move(all));
    write_text(root / "renderlog.jsonl", join_lines(lines));
    write_spec(root, "render", opts);
    spdlog::info("render: wrote {} classes x {} images ({}) to {}", files.size(), images_per_class, db_name,
                 root.string());
    return kExitOk;
  }
};

struct Mix {
  std::string spec_file;
  std::string out;
  std::size_t pad_to = 0;

  void setup(CLI::App& app) {
    app.add_option("--spec", spec_file, "dataset spec (JSON)")->required();
    app.add_option("--out", out, "output directory (overrides the spec)");
    app.add_option("--pad-to", pad_to, "raise the total class count round-robin (0 = off)");
  }

  int execute(Runtime& rt) {
    const fs::path file = spec_file;
    DatasetSpec spec = dataset_spec_from_json(read_json_file(file), file.parent_path());
    if (!out.empty()) spec.output = out;
    if (pad_to > 0) spec.pad_to = pad_to;
    if (spec.output.empty()) throw ParameterError("no output directory: pass --out or set \"output\" in the spec");
    const DatasetManifest manifest = build_combination(spec, rt.pool);
    const ValidationReport report = validate_manifest(spec.output, rt.pool);
    for (const auto& f : report.findings) spdlog::error("mix: {}: {}", to_string(f.kind), f.message);
    spdlog::info("mix: {} classes, {} images in {}", manifest.classes, manifest.entries.size(), spec.output.string());
    std::cout << json{{"root", spec.output.string()}, {"classes", manifest.classes},
                      {"entries", manifest.entries.size()}, {"ok", report.ok()}}
                     .dump()
              << '\n';
    return report.ok() ? kExitOk : kExitFailure;
  }
};

struct Validate {
  std::string root;
  void setup(CLI::App& app) { app.add_option("root", root, "dataset root")->required(); }
  int execute(Runtime& rt) {
    const ValidationReport report = validate_manifest(root, rt.pool);
    for (const auto& f : report.findings) spdlog::error("validate: {}: {}", to_string(f.kind), f.message);
    std::cout << json(report).dump(2) << '\n';
    return report.ok() ? kExitOk : kExitFailure;
  }
};

struct Stats {
  std::string root;
  void setup(CLI::App& app) { app.add_option("root", root, "dataset root")->required(); }
  int execute(Runtime& rt) {
    std::cout << json(dataset_stats(root, rt.pool)).dump(2) << '\n';
    return kExitOk;
  }
};

struct Preview {
  std::string root;
  std::size_t n = 4;
  int tile = 128;
  std::string out;

  void setup(CLI::App& app) {
    app.add_option("root", root, "dataset root")->required();
    app.add_option("--n", n, "number of classes (rows)")->check(CLI::PositiveNumber);
    app.add_option("--tile", tile, "tile size in pixels")->check(CLI::Range(8, 1024));
    app.add_option("--out", out, "output PNG (default <root>/preview.png)");
  }

  int execute(Runtime& rt) {
    const ValidationReport report = validate_manifest(root, rt.pool);
    if (!report.ok()) {
      throw ContractViolation("dataset at " + root + " does not validate: " + report.findings.front().message);
    }
    if (n > report.classes) {
      spdlog::warn("preview: n = {} exceeds the class count, clamped to {}", n, report.classes);
    }
    const fs::path target = out.empty() ? fs::path(root) / "preview.png" : fs::path(out);
    write_png(target, contact_sheet(root, n, tile, rt.pool));
    spdlog::info("preview: wrote {}", target.string());
    return kExitOk;
  }
};

std::size_t parse_workers(const std::string& text) {
  if (text == "auto") return 0;
  std::size_t n = 0;
  std::from_chars(text.data(), text.data() + text.size(), n);
  return n;
}

const CLI::App* failing_app(const CLI::App& app) {
  const auto subs = app.get_subcommands();
  return subs.empty() ? &app : subs.front();
}

}  // namespace

ProcGenConfig proc_config(const json& o) {
  ProcGenConfig c;
  c.n = o.value("n", c.n);
  c.seed = o.value("seed", c.seed);
  c.v = o.value("v", c.v);
  c.w = o.value("w", c.w);
  c.max_size = o.value("max-size", c.max_size);
  c.translation_range = o.value("translation-range", c.translation_range);
  c.max_rejections = o.value("max-rejections", c.max_rejections);
  return c;
}

GpDeformParams morph_params(const json& o) {
  GpDeformParams p;
  p.shape_magnitude = o.value("b-s", p.shape_magnitude);
  p.shape_bandwidth = o.value("c-s", p.shape_bandwidth);
  p.albedo_magnitude = o.value("b-a", p.albedo_magnitude);
  p.albedo_bandwidth = o.value("c-a", p.albedo_bandwidth);
  p.rank = o.value("rank", p.rank);
  p.downsample_target = o.value("downsample", p.downsample_target);
  p.seed = o.value("seed", p.seed);
  return p;
}

FractalGenConfig fractal_config(const json& o) {
  FractalGenConfig c;
  c.classes = o.value("classes", c.classes);
  c.images_per_class = o.value("images", c.images_per_class);
  c.seed = o.value("seed", c.seed);
  c.min_fill = o.value("min-fill", c.min_fill);
  c.augment.points = o.value("points", c.augment.points);
  c.augment.resolution = o.value("res", c.augment.resolution);
  c.max_attempts = o.value("max-attempts", c.max_attempts);
  return c;
}

RenderPlanConfig render_plan_config(const json& o) {
  RenderPlanConfig c;
  c.resolution = o.value("res", c.resolution);
  c.color = color_mode_from_string(o.value("color", std::string("gray")));
  c.aniso_mode = aniso_mode_from_string(o.value("aniso-mode", std::string("uniform-range")));
  c.fov_deg = o.value("fov", c.fov_deg);
  return c;
}

std::uint64_t render_class_seed(std::uint64_t seed, std::size_t class_index) { return derive_seed(seed, class_index); }

int run(const std::vector<std::string>& raw_args) {
  auto logger = std::make_shared<spdlog::logger>("synthforge", std::make_shared<spdlog::sinks::stderr_sink_mt>());
  logger->set_pattern("%l: %v");
  spdlog::set_default_logger(logger);

  CLI::App app{"Synthetic image dataset generator: procedural meshes, GP morphs, IFS fractals, rendering, mixing.",
               "synthforge"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  std::string workers = "auto";
  std::string log_level = "info";
  bool progress_json = false;
  std::string config;
  app.add_option("--workers", workers, "worker threads, or auto")
      ->check([](const std::string& v) -> std::string {
        if (v == "auto") return {};
        std::size_t n = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
        return (ec == std::errc{} && ptr == v.data() + v.size() && n >= 1) ? "" : "expected a positive integer or auto";
      });
  app.add_option("--log-level", log_level, "stderr verbosity")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.add_flag("--progress-json", progress_json, "emit JSON-lines progress on stdout");
  app.add_option("--config", config, "replay a spec.json written by a previous run; explicit flags override it");

  GenProc gen_proc;
  GenMorph gen_morph;
  GenFractal gen_fractal;
  Render render;
  Mix mix;
  Validate validate_cmd;
  Stats stats;
  Preview preview;
  struct Entry {
    CLI::App* app;
    std::function<int(Runtime&)> execute;
  };
  std::vector<Entry> commands;
  const auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    cmd.setup(*sub);
    commands.push_back({sub, [&cmd](Runtime& rt) { return cmd.execute(rt); }});
  };
  add("gen-proc", "generate procedural class meshes", gen_proc);
  add("gen-morph", "deform base meshes with Gaussian-process fields", gen_morph);
  add("gen-fractal", "generate IFS fractal image classes", gen_fractal);
  add("render", "render a mesh database to images", render);
  add("mix", "assemble a dataset combination from source databases", mix);
  add("validate", "check a dataset manifest", validate_cmd);
  add("stats", "summarize a dataset", stats);
  add("preview", "write a contact sheet of a dataset", preview);

  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--workers" || a == "--log-level" || a == "--config") {
      ++i;
      continue;
    }
    if (a.empty() || a[0] == '-') continue;
    const bool known = std::any_of(commands.begin(), commands.end(), [&](const Entry& c) { return c.app->get_name() == a; });
    if (!known) {
      std::cerr << "error: unknown subcommand '" << a << "'\n\n" << app.help();
      return kExitUsage;
    }
    break;
  }
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::cout << failing_app(app)->help();
      return kExitOk;
    }
    std::cerr << "error: " << e.what() << "\n\n" << failing_app(app)->help();
    return kExitUsage;
  }

  spdlog::set_level(spdlog::level::from_str(log_level));
  Runtime rt{WorkerPool(parse_workers(workers)), progress_json};
  for (const auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      return cmd.execute(rt);
    } catch (const Error& e) {
      spdlog::error("{}: {}", cmd.app->get_name(), e.what());
    } catch (const fs::filesystem_error& e) {
      spdlog::error("{}: {}", cmd.app->get_name(), e.what());
    } catch (const json::exception& e) {
      spdlog::error("{}: malformed JSON: {}", cmd.app->get_name(), e.what());
    } catch (const std::exception& e) {
      spdlog::error("{}: {}", cmd.app->get_name(), e.what());
    }
    return kExitFailure;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 0; i < argc; ++i) args.emplace_back(argv[i]);
  if (args.empty()) args.emplace_back("synthforge");
  return run(args);
}

}  // namespace synthforge::cli
