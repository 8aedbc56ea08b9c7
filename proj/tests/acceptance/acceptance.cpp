// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "support.hpp"
#include "synthforge/errors.hpp"
#include "synthforge/obj_io.hpp"

using namespace synthforge;
using namespace synthforge::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void check(bool condition, const std::string& what) {
    if (!condition && ok) detail << what << "; ";
    ok = ok && condition;
  }
};

/// Runs the CLI with its logging limited to errors.
int cli_quiet(std::vector<std::string> args) {
  args.insert(args.begin(), {"--log-level", "error"});
  return run_cli(args);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void proc_generation(Outcome& out) {
  TempDir dir("accept_proc");
  const auto start = std::chrono::steady_clock::now();
  const int rc = cli_quiet({"gen-proc", "--n", "50", "--seed", "7", "--out", (dir / "a").string()});
  const double elapsed = seconds_since(start);
  out.check(rc == 0, "gen-proc exit " + std::to_string(rc));
  out.check(elapsed < 60.0, "took " + std::to_string(elapsed) + " s");
  if (rc != 0) return;

  double worst = 0.0;
  for (std::size_t c = 0; c < 50; ++c) {
    const Mesh m = load_obj(dir / "a" / "meshes" / (class_id(c) + ".obj"));
    worst = std::max(worst, bounding_box(m).max_extent());
  }
  // OBJ coordinates carry six decimals.
  out.check(worst <= 10.0 + 1e-6, "max extent " + std::to_string(worst));

  std::ifstream log(dir / "a" / "genlog.jsonl");
  std::size_t lines = 0;
  for (std::string line; std::getline(log, line); ++lines) {
    const json j = json::parse(line);
    const int p = j.at("p").get<int>();
    out.check(p >= 1 && p <= 3, "p out of range");
    const auto& counts = j.at("instance_counts");
    out.check(counts.size() == static_cast<std::size_t>(p), "count rows != p");
    for (const auto& row : counts) {
      out.check(row.size() == 5, "five primitive types per repetition");
      for (const auto& n : row) out.check(n.get<int>() >= 0 && n.get<int>() <= 5, "count out of range");
    }
  }
  out.check(lines == 50, "genlog has " + std::to_string(lines) + " lines");

  out.check(cli_quiet({"gen-proc", "--n", "50", "--seed", "7", "--out", (dir / "b").string()}) == 0, "rerun failed");
  std::string diff;
  out.check(same_tree(dir / "a", dir / "b", &diff), "rerun differs at " + diff);
  out.detail << "gen-proc " << elapsed << " s, max extent " << worst;
}

void geometry_suite(Outcome& out) {
  RngStream rng(11, 0);
  std::size_t euler_failures = 0;
  for (int i = 0; i < 200; ++i) {
    const PrimitiveSpec spec = random_primitive(rng);
    if (euler_characteristic(make_primitive(spec)) != expected_euler(spec.kind)) ++euler_failures;
  }
  out.check(euler_failures == 0, std::to_string(euler_failures) + " Euler failures");

  PrimitiveSpec cube;
  cube.kind = PrimitiveKind::cube;
  const Mesh cc = apply_subdivide(make_primitive(cube), 1);
  out.check(cc.vertices.size() == 26 && cc.faces.size() == 24, "subdivided cube is not 26/24");

  RngStream law_rng(12, 0);
  std::size_t law_failures = 0;
  for (int i = 0; i < 100; ++i) {
    PrimitiveSpec spec = random_primitive(law_rng);
    spec.radial_segments = std::min(spec.radial_segments, 16);
    spec.axial_segments = std::min(spec.axial_segments, 12);
    const Mesh m = make_primitive(spec);
    const Mesh s = apply_subdivide(m, 1);
    const bool ok = s.faces.size() == face_corner_count(m) &&
                    s.vertices.size() == m.vertices.size() + unique_edges(m).size() + m.faces.size();
    law_failures += !ok;
  }
  out.check(law_failures == 0, std::to_string(law_failures) + " face-count law failures");
  out.detail << "200 Euler checks, cube 26/24, 100 subdivisions";
}

void gp_statistics(Outcome& out) {
  const auto start = std::chrono::steady_clock::now();
  GpDeformParams params;
  params.seed = 11;
  params.rank = 50;
  const auto variance = gp_monte_carlo(random_cloud(200, 40.0, 21), params, 10000);
  std::vector<Vec3> line;
  for (int i = 0; i < 12; ++i) line.push_back({3.5 * i, 0.0, 0.0});
  const auto correlation = gp_monte_carlo(line, params, 10000);
  const double elapsed = seconds_since(start);
  out.check(variance.max_variance_error < 0.05, "variance error " + std::to_string(variance.max_variance_error));
  out.check(correlation.max_correlation_error < 0.05,
            "correlation error " + std::to_string(correlation.max_correlation_error));
  out.check(elapsed < 300.0, "took " + std::to_string(elapsed) + " s");
  out.detail << "variance err " << variance.max_variance_error << ", correlation err "
             << correlation.max_correlation_error << ", " << elapsed << " s";
}

void renderer_suite(Outcome& out) {
  const int lit = rasterize(analytic_job(facing_triangle(), {0.0, 0.0, 1.0})).image.at(32, 32);
  const int ambient = rasterize(analytic_job(facing_triangle(), {1.0, 0.0, 0.0})).image.at(32, 32);
  out.check(lit == 255, "normal incidence gave " + std::to_string(lit));
  out.check(ambient == 26, "ambient only gave " + std::to_string(ambient));
  const auto depth = depth_test_against_ray_cast(96);
  out.check(depth.mismatches == 0 && depth.far_hits > 0, std::to_string(depth.mismatches) + " depth mismatches");

  ProcGenConfig pc;
  pc.n = 3;
  pc.seed = 3;
  RngStream rng(8, 0);
  for (std::size_t c = 0; c < pc.n; ++c) {
    RenderJob job = analytic_job(generate_class_mesh(pc, c).mesh, {0.0, 1.0, 0.0}, 128);
    job.pose = {40.0, 15.0, 5.0, 40.0};
    const Image reference = rasterize(job).image;
    for (int k = 0; k < 4; ++k) {
      Vec3 l = rng.unit_vector();
      l.y = std::abs(l.y);
      job.light = {l, rng.uniform(0.5, 0.9), 0.1};
      const Image img = rasterize(job).image;
      bool same = true;
      for (std::size_t p = 0; p < img.pixels.size(); ++p) same = same && (img.pixels[p] != 0) == (reference.pixels[p] != 0);
      out.check(same, "silhouette changed with the light");
    }
  }

  const auto mesh = std::make_shared<const Mesh>(generate_class_mesh(pc, 1).mesh);
  std::optional<Image> first;
  std::size_t differing = 0;
  for (RenderJob job : sample_render_plan(99, 100, true)) {
    job.mesh = mesh;
    job.resolution = 64;
    job.augment = {12.0, 0.02, -0.01};
    const Image img = rasterize(job).image;
    if (!first) first = img;
    differing += img != *first;
  }
  out.check(differing == 0, std::to_string(differing) + " flat renders differ");
  out.detail << "255/26 exact, " << depth.checked << " ray-cast pixels, 100 flat renders identical";
}

void fractal_suite(Outcome& out) {
  const double oracle = sierpinski_enumeration_fill(12, 256);
  out.check(oracle == kSierpinskiFill256, "oracle drifted");
  RngStream rng(0, 0);
  const double fill = chaos_game(sierpinski(), 100000, 256, rng).fill_rate;
  out.check(std::abs(fill - kSierpinskiFill256) <= 0.05, "Sierpinski fill " + std::to_string(fill));

  RngStream systems(2024, 0);
  std::size_t violations = 0;
  for (int i = 0; i < 500; ++i) {
    const IfsSystem s = sample_ifs(systems);
    RngStream orbit = systems.child(static_cast<std::uint64_t>(i));
    FractalImage img;
    try {
      img = chaos_game(s, 5000, 64, orbit);
    } catch (const DivergenceError&) {
      continue;
    }
    bool accepted = false;
    for (int k = 100; k >= 0; --k) {
      const bool ok = accept_system(img, k / 100.0);
      violations += accepted && !ok;
      accepted = accepted || ok;
    }
  }
  out.check(violations == 0, std::to_string(violations) + " monotonicity violations");

  TempDir dir("accept_fractal");
  const std::vector<std::string> args{"--classes", "3",       "--images", "3",  "--seed",     "5",
                                      "--points",  "20000",   "--res",    "64", "--min-fill", "0.1"};
  auto a = args;
  a.insert(a.begin(), {"gen-fractal", "--out", (dir / "a").string()});
  auto b = args;
  b.insert(b.begin(), {"--workers", "2", "gen-fractal", "--out", (dir / "b").string()});
  out.check(cli_quiet(a) == 0 && cli_quiet(b) == 0, "gen-fractal failed");
  std::string diff;
  out.check(same_tree(dir / "a", dir / "b", &diff), "rerun differs at " + diff);
  out.detail << "fill " << fill << " vs oracle " << kSierpinskiFill256 << ", 500 systems monotone";
}

void desk_build(Outcome& out) {
  const auto start = std::chrono::steady_clock::now();
  TempDir dir("accept_desk");
  const auto path = [&](const char* name) { return (dir / name).string(); };
  const auto step = [&](const std::vector<std::string>& args, const std::string& what) {
    const int rc = cli_quiet(args);
    out.check(rc == 0, what + " exit " + std::to_string(rc));
    return rc == 0;
  };
  if (!step({"gen-proc", "--n", "10", "--seed", "1", "--out", path("proc_meshes")}, "gen-proc") ||
      !step({"gen-morph", "--base", path("proc_meshes"), "--n-base", "2", "--variants", "5", "--seed", "2", "--out",
             path("morph_meshes")},
            "gen-morph") ||
      !step({"render", "--meshes", path("proc_meshes"), "--images-per-class", "10", "--seed", "3", "--out",
             path("ProcSynthDB")},
            "render proc") ||
      !step({"render", "--meshes", path("morph_meshes"), "--images-per-class", "10", "--seed", "4", "--out",
             path("MorphSynthDB")},
            "render morph") ||
      !step({"gen-fractal", "--classes", "10", "--images", "10", "--seed", "5", "--out", path("FractalDB")},
            "gen-fractal")) {
    return;
  }

  struct Combination {
    const char* name;
    std::vector<std::pair<const char*, int>> parts;
  };
  const std::vector<Combination> combos{
      {"fractal", {{"FractalDB", 10}}},
      {"proc", {{"ProcSynthDB", 10}}},
      {"morph", {{"MorphSynthDB", 10}}},
      {"proc_fractal", {{"ProcSynthDB", 5}, {"FractalDB", 5}}},
      {"proc_morph", {{"ProcSynthDB", 5}, {"MorphSynthDB", 5}}},
      {"proc_morph_fractal", {{"ProcSynthDB", 3}, {"MorphSynthDB", 3}, {"FractalDB", 3}}},
  };
  std::size_t clean = 0;
  for (const auto& combo : combos) {
    json components = json::array();
    std::size_t classes = 0;
    for (const auto& [source, n] : combo.parts) {
      components.push_back({{"source", source}, {"classes", n}, {"root", path(source)}});
      classes += static_cast<std::size_t>(n);
    }
    const fs::path spec = dir / (std::string(combo.name) + ".json");
    std::ofstream(spec) << json{{"components", components}, {"images_per_class", 10}}.dump(2);
    const fs::path root = dir / "mixed" / combo.name;
    if (!step({"mix", "--spec", spec.string(), "--out", root.string()}, std::string("mix ") + combo.name)) continue;
    const ValidationReport report = validate_manifest(root);
    out.check(report.ok() && report.classes == classes && report.entries == classes * 10,
              std::string(combo.name) + " has findings");
    clean += report.ok();
  }

  const fs::path damaged = dir / "mixed" / "proc_morph_fractal";
  fs::remove(damaged / image_relative_path(4, 7));
  out.check(validate_manifest(damaged).count(Finding::Kind::missing_file) == 1, "missing file not reported");
  out.check(cli_quiet({"validate", damaged.string()}) == cli::kExitFailure, "validate exit status on missing file");

  const fs::path gapped = dir / "mixed" / "proc_fractal";
  auto entries = read_manifest(gapped);
  std::erase_if(entries, [](const ManifestEntry& e) { return e.class_id == 6; });
  write_manifest(gapped, entries);
  const auto gap = validate_manifest(gapped);
  out.check(gap.count(Finding::Kind::class_gap) == 1, "class gap not reported");

  const double elapsed = seconds_since(start);
  out.check(elapsed < 600.0, "took " + std::to_string(elapsed) + " s");
  out.detail << clean << "/6 combinations clean, damage detected, " << elapsed << " s";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"procedural generation (gen-proc --n 50 --seed 7)", proc_generation},
      {"geometry suite", geometry_suite},
      {"GP deformation statistics", gp_statistics},
      {"renderer analytic suite", renderer_suite},
      {"fractal suite", fractal_suite},
      {"desk-scale dataset build", desk_build},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome out;
    try {
      run(out);
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    std::printf("%s %s: %s\n", out.ok ? "PASS" : "FAIL", name, out.detail.str().c_str());
    std::fflush(stdout);
    failures += !out.ok;
  }
  return failures == 0 ? 0 : 1;
}
