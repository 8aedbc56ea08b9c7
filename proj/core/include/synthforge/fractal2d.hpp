#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "synthforge/image.hpp"
#include "synthforge/parallel.hpp"
#include "synthforge/rng.hpp"
#include "synthforge/vec.hpp"

namespace synthforge {

/// x -> [a b; c d] x + (e, f)
struct AffineMap2 {
  std::array<double, 4> matrix{};  ///< a, b, c, d (row-major)
  std::array<double, 2> translation{};

  double determinant() const { return matrix[0] * matrix[3] - matrix[1] * matrix[2]; }
  friend bool operator==(const AffineMap2&, const AffineMap2&) = default;
};

/// Iterated function system: one per fractal class.
/// Invariants: >= 2 maps, finite entries, positive weights summing to 1.
struct IfsSystem {
  std::vector<AffineMap2> maps;
  std::vector<double> weights;

  friend bool operator==(const IfsSystem&, const IfsSystem&) = default;
};

/// Throws ParameterError.
void validate(const IfsSystem& system);

/// Square 8-bit gray rendering plus the fraction of lit pixels.
struct FractalImage {
  Image image;
  double fill_rate = 0.0;
};

struct IfsSamplingConfig {
  int min_maps = 2;
  int max_maps = 8;
  double matrix_range = 1.0;       ///< entries uniform in [-r, r]
  double translation_range = 1.0;  ///< uniform in [-r, r]
  double min_weight = 0.01;        ///< floor on |det| before normalizing
};

/// 2-8 maps with uniform entries; weights proportional to max(|det|, 0.01).
IfsSystem sample_ifs(RngStream& rng, const IfsSamplingConfig& config = {});

/// Chaos game. Iterates from the origin, discards the first 100 iterates,
/// optionally rotates the cloud by rotation_deg about the origin, then maps its
/// bounding square onto a resolution^2 grid with one lit pixel per visit.
/// Throws DivergenceError once |x| exceeds 1e6.
FractalImage chaos_game(const IfsSystem& system, std::size_t points, int resolution, RngStream& rng,
                        double rotation_deg = 0.0);

/// fill_rate >= min_fill (inclusive).
bool accept_system(const FractalImage& image, double min_fill = 0.2);

struct AugmentConfig {
  /// Independent factor per matrix entry.
  Interval matrix_scale{0.8, 1.2};
  Interval rotation_deg{0.0, 360.0};
  std::size_t points = 100000;
  int resolution = 256;
  int max_retries = 20;
};

/// Streams used for attempt `attempt` of image `image`: perturbation draws
/// come from the first, the chaos-game orbit from the second.
RngStream augment_parameter_stream(const RngStream& class_rng, std::size_t image, int attempt);
RngStream augment_orbit_stream(const RngStream& class_rng, std::size_t image, int attempt);

/// `count` perturbed renders of one system. A diverging perturbation is
/// redrawn up to max_retries times before DivergenceError propagates.
std::vector<FractalImage> augment(const IfsSystem& system, const RngStream& class_rng, std::size_t count,
                                  const AugmentConfig& config = {});

struct FractalGenConfig {
  std::size_t classes = 1000;
  std::size_t images_per_class = 1000;
  std::uint64_t seed = 0;
  double min_fill = 0.2;
  IfsSamplingConfig sampling;
  AugmentConfig augment;
  /// Systems tried per class before GenerationExhaustedError.
  std::size_t max_attempts = 20000;
};

void validate(const FractalGenConfig& config);

struct FractalClass {
  std::size_t class_index = 0;
  IfsSystem system;
  /// Index of the accepted system among those sampled for the class.
  std::size_t attempt = 0;
  /// Fill rate of the unperturbed system.
  double fill_rate = 0.0;
  std::vector<FractalImage> images;
};

/// Samples systems from the (seed, class_index) stream until one renders
/// without diverging, passes the fill filter and survives augmentation.
FractalClass generate_fractal_class(const FractalGenConfig& config, std::size_t class_index);

void to_json(nlohmann::json& j, const IfsSystem& system);
void from_json(const nlohmann::json& j, IfsSystem& system);
void to_json(nlohmann::json& j, const FractalGenConfig& config);
void from_json(const nlohmann::json& j, FractalGenConfig& config);

}  // namespace synthforge
