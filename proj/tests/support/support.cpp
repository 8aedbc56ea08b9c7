#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace synthforge::testing {

TempDir::TempDir(std::string_view tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("synthforge_" + std::string(tag) + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

namespace {

std::vector<fs::path> relative_files(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

bool same_tree(const fs::path& a, const fs::path& b, std::string* diff) {
  const auto fa = relative_files(a);
  const auto fb = relative_files(b);
  if (fa != fb) {
    if (diff) *diff = "file lists differ";
    return false;
  }
  for (const auto& rel : fa) {
    if (read_file(a / rel) != read_file(b / rel)) {
      if (diff) *diff = rel.string();
      return false;
    }
  }
  return true;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> full{"synthforge"};
  full.insert(full.end(), args.begin(), args.end());
  return cli::run(full);
}

void write_fake_source(const fs::path& root, SourceDb source, std::size_t classes, std::size_t images,
                       int resolution) {
  std::vector<ManifestEntry> entries;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < images; ++i) {
      Image img(resolution, resolution, 1);
      img.at(0, 0) = static_cast<std::uint8_t>(c);
      img.at(1, 0) = static_cast<std::uint8_t>(i);
      img.at(resolution / 2, resolution / 2) = 255;
      ManifestEntry e;
      e.class_id = c;
      e.source = to_string(source);
      e.source_class = c;
      e.image_index = i;
      e.path = image_relative_path(c, i);
      e.width = resolution;
      e.height = resolution;
      e.reference = "fake:" + std::to_string(c);
      e.seed_chain = {{"class", c}, {"image", i}, {"seed", 0}};
      fs::create_directories((root / e.path).parent_path());
      write_png(root / e.path, img);
      entries.push_back(std::move(e));
    }
  }
  write_manifest(root, entries);
}

PrimitiveSpec random_primitive(RngStream& rng) {
  PrimitiveSpec spec;
  spec.kind = kAllPrimitiveKinds[rng.uniform_int(0, 4)];
  spec.size_a = rng.uniform(0.5, 2.0);
  spec.size_b = spec.kind == PrimitiveKind::torus ? spec.size_a * rng.uniform(0.1, 0.9) : rng.uniform(0.5, 2.0);
  spec.radial_segments = static_cast<int>(rng.uniform_int(3, 40));
  spec.axial_segments = static_cast<int>(rng.uniform_int(3, 30));
  spec.placement.translation = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
  spec.placement.rotation = rng.rotation();
  spec.placement.scale = rng.uniform(0.2, 3.0);
  return spec;
}

long expected_euler(PrimitiveKind kind) { return kind == PrimitiveKind::torus ? 0 : 2; }

GpMonteCarlo gp_monte_carlo(std::span<const Vec3> points, const GpDeformParams& params, std::size_t draws) {
  const GpBasis basis = build_gp_basis(points, params);
  const std::size_t n = points.size();
  std::vector<double> sum(n, 0.0);
  const bool full_rank = basis.shape.rank() == n;
  std::vector<double> cross(full_rank ? n * n : n, 0.0);
  for (std::size_t t = 0; t < draws; ++t) {
    const DeformationField f = sample_deformation(basis, points, params, t);
    for (int d = 0; d < 3; ++d) {
      for (std::size_t i = 0; i < n; ++i) {
        const double vi = f.displacement[i][d];
        sum[i] += vi;
        if (!full_rank) {
          cross[i] += vi * vi;
          continue;
        }
        for (std::size_t j = i; j < n; ++j) cross[i * n + j] += vi * f.displacement[j][d];
      }
    }
  }
  const double m = 3.0 * static_cast<double>(draws);
  const auto cov = [&](std::size_t i, std::size_t j) {
    return cross[full_rank ? i * n + j : i] / m - (sum[i] / m) * (sum[j] / m);
  };

  GpMonteCarlo out;
  for (std::size_t i = 0; i < n; ++i) {
    out.max_variance_error =
        std::max(out.max_variance_error, std::abs(cov(i, i) / basis.shape.truncated_variance(i) - 1.0));
    for (std::size_t j = i + 1; full_rank && j < n; ++j) {
      const double corr = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
      const double expected = std::exp(-length_squared(points[i] - points[j]) / params.shape_bandwidth);
      out.max_correlation_error = std::max(out.max_correlation_error, std::abs(corr - expected));
    }
  }
  return out;
}

std::vector<Vec3> random_cloud(std::size_t count, double side, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<Vec3> out(count);
  for (auto& p : out) p = {rng.uniform(0.0, side), rng.uniform(0.0, side), rng.uniform(0.0, side)};
  return out;
}

IfsSystem sierpinski() {
  IfsSystem s;
  s.maps = {{{0.5, 0.0, 0.0, 0.5}, {0.0, 0.0}}, {{0.5, 0.0, 0.0, 0.5}, {0.5, 0.0}}, {{0.5, 0.0, 0.0, 0.5}, {0.0, 0.5}}};
  s.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  s.weights[2] = 1.0 - s.weights[0] - s.weights[1];
  return s;
}

double sierpinski_enumeration_fill(int depth, int resolution) {
  // Level-`depth` sub-triangles have lower-left corners sum_k 2^-(k+1) t_k and
  // legs of length 2^-depth; their three corners sample the attractor.
  std::vector<std::array<double, 2>> corners{{0.0, 0.0}};
  double scale = 1.0;
  for (int level = 0; level < depth; ++level) {
    scale *= 0.5;
    std::vector<std::array<double, 2>> next;
    next.reserve(corners.size() * 3);
    for (const auto& c : corners) {
      next.push_back({c[0], c[1]});
      next.push_back({c[0] + scale, c[1]});
      next.push_back({c[0], c[1] + scale});
    }
    corners = std::move(next);
  }
  std::vector<char> lit(static_cast<std::size_t>(resolution) * resolution, 0);
  const auto splat = [&](double x, double y) {
    const int px = std::min(resolution - 1, static_cast<int>(std::floor(x * resolution)));
    const int py = std::min(resolution - 1, static_cast<int>(std::floor(y * resolution)));
    lit[static_cast<std::size_t>(py) * resolution + px] = 1;
  };
  for (const auto& c : corners) {
    splat(c[0], c[1]);
    splat(c[0] + scale, c[1]);
    splat(c[0], c[1] + scale);
  }
  return static_cast<double>(std::count(lit.begin(), lit.end(), 1)) / (static_cast<double>(resolution) * resolution);
}

Mesh facing_triangle() {
  Mesh m;
  m.vertices = {{-1.0, -1.0, 0.0}, {1.0, -1.0, 0.0}, {0.0, 1.0, 0.0}};
  m.faces = {{0, 1, 2}};
  return m;
}

Mesh square_at(double x0, double x1, double z, double albedo) {
  Mesh m;
  m.vertices = {{x0, -0.5, z}, {x1, -0.5, z}, {x1, 0.5, z}, {x0, 0.5, z}};
  m.faces = {{0, 1, 2, 3}};
  m.albedo = std::vector<Rgb>(4, Rgb{albedo, albedo, albedo});
  return m;
}

RenderJob analytic_job(const Mesh& mesh, const Vec3& light_direction, int resolution) {
  RenderJob job;
  job.mesh = std::make_shared<const Mesh>(mesh);
  job.resolution = resolution;
  job.pose = {0.0, 0.0, 5.0, 40.0};
  job.light = {light_direction, 0.9, 0.1};
  return job;
}

RayCastComparison depth_test_against_ray_cast(int resolution) {
  const Mesh scene = merge({square_at(-0.5, 0.5, 0.0, 1.0), square_at(0.0, 1.0, -1.0, 0.4)});
  RenderJob job = analytic_job(scene, {0.0, 0.0, 1.0}, resolution);
  job.auto_frame = false;
  job.pose.distance = 1.5;
  const Image img = rasterize(job).image;

  // Camera sits on +z in front of the box center (0.25, 0, -0.5).
  const Vec3 eye{0.25, 0.0, 1.0};
  const double t = std::tan(job.pose.fov_deg * 0.5 * std::numbers::pi / 180.0);
  const auto on_edge = [](double v, double edge) { return std::abs(v - edge) < 1e-6; };
  RayCastComparison out;
  for (int py = 0; py < resolution; ++py) {
    for (int px = 0; px < resolution; ++px) {
      const Vec3 dir{(2.0 * (px + 0.5) / resolution - 1.0) * t, (1.0 - 2.0 * (py + 0.5) / resolution) * t, -1.0};
      const Vec3 a = eye + dir * (eye.z - 0.0);
      const Vec3 b = eye + dir * (eye.z + 1.0);
      if (on_edge(a.x, -0.5) || on_edge(a.x, 0.5) || on_edge(std::abs(a.y), 0.5) || on_edge(b.x, 0.0) ||
          on_edge(b.x, 1.0) || on_edge(std::abs(b.y), 0.5)) {
        continue;
      }
      int expected = 0;
      if (a.x > -0.5 && a.x < 0.5 && std::abs(a.y) < 0.5) {
        expected = 255;
      } else if (b.x > 0.0 && b.x < 1.0 && std::abs(b.y) < 0.5) {
        expected = 102;
        ++out.far_hits;
      }
      ++out.checked;
      out.mismatches += img.at(px, py) != expected;
    }
  }
  return out;
}

}  // namespace synthforge::testing
