#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "synthforge/dataset.hpp"
#include "synthforge/fractal2d.hpp"
#include "synthforge/geometry.hpp"
#include "synthforge/image.hpp"
#include "synthforge/morphgen.hpp"
#include "synthforge/renderer.hpp"
#include "synthforge/rng.hpp"

namespace synthforge::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

/// Byte-compares two directory trees. On mismatch, `diff` names the first
/// differing relative path.
bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b, std::string* diff = nullptr);

/// Runs the CLI with the given arguments (program name prepended).
int run_cli(const std::vector<std::string>& args);

/// Writes a small source database: `classes` x `images` gray PNGs whose
/// first pixel encodes (class, image), plus its manifest.
void write_fake_source(const std::filesystem::path& root, SourceDb source, std::size_t classes, std::size_t images,
                       int resolution = 32);

// --- geometry -------------------------------------------------------------

/// Random primitive with random tessellation counts and placement.
PrimitiveSpec random_primitive(RngStream& rng);

/// Expected Euler characteristic of a closed primitive: 0 for a torus, else 2.
long expected_euler(PrimitiveKind kind);

// --- GP deformation ------------------------------------------------------

struct GpMonteCarlo {
  /// max_i |pooled sample variance at i / truncated kernel diagonal at i - 1|
  double max_variance_error = 0.0;
  /// max_{i<j} |sample correlation - exp(-d_ij^2 / c_s)|, only computed when
  /// the basis keeps every eigenpair (stays 0 otherwise).
  double max_correlation_error = 0.0;
};

/// Shape displacements from `draws` variants, pooling x, y and z.
GpMonteCarlo gp_monte_carlo(std::span<const Vec3> points, const GpDeformParams& params, std::size_t draws);

/// `count` points uniform in [0, side]^3.
std::vector<Vec3> random_cloud(std::size_t count, double side, std::uint64_t seed);

// --- fractals -------------------------------------------------------------

/// Three maps x/2 + t, t in {(0,0), (1/2,0), (0,1/2)}, equal weights.
IfsSystem sierpinski();

/// Fill rate of the Sierpinski attractor at the given resolution, computed by
/// enumerating every depth-`depth` composition of the three maps applied to
/// the triangle's corners and splatting into the unit square.
double sierpinski_enumeration_fill(int depth, int resolution);

/// Fill rate recorded from sierpinski_enumeration_fill(12, 256).
inline constexpr double kSierpinskiFill256 = 0.1501617431640625;

// --- rendering ------------------------------------------------------------

/// Triangle in the z = 0 plane with normal +z, seen head-on from azimuth 0.
Mesh facing_triangle();

/// Axis-aligned square [x0, x1] x [-0.5, 0.5] at height z with normal +z.
Mesh square_at(double x0, double x1, double z, double albedo);

/// Head-on job with the default light settings of the analytic cases.
RenderJob analytic_job(const Mesh& mesh, const Vec3& light_direction, int resolution = 64);

struct RayCastComparison {
  std::size_t checked = 0;
  std::size_t mismatches = 0;
  /// Pixels where the far square shows.
  std::size_t far_hits = 0;
};

/// Renders square A (albedo 1, z = 0, x in [-0.5, 0.5]) in front of square B
/// (albedo 0.4, z = -1, x in [0, 1]) head-on without framing at distance 1.5
/// and compares every pixel away from an edge with a per-pixel ray cast.
RayCastComparison depth_test_against_ray_cast(int resolution);

}  // namespace synthforge::testing
