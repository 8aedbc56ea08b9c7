#include "synthforge/fractal2d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "synthforge/errors.hpp"

namespace synthforge {

namespace {

constexpr std::size_t kBurnIn = 100;
constexpr double kDivergenceRadiusSq = 1e12;

void require(bool ok, const char* what) {
  if (!ok) throw ParameterError(what);
}

std::size_t pick_map(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

}  // namespace

void validate(const IfsSystem& system) {
  require(system.maps.size() >= 2, "an IFS needs at least 2 maps");
  require(system.weights.size() == system.maps.size(), "one weight per map is required");
  double sum = 0.0;
  for (double w : system.weights) {
    require(std::isfinite(w) && w > 0.0, "IFS weights must be positive");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "IFS weights must sum to 1");
  for (const auto& map : system.maps) {
    for (double v : map.matrix) require(std::isfinite(v), "IFS matrix entries must be finite");
    for (double v : map.translation) require(std::isfinite(v), "IFS translations must be finite");
  }
}

IfsSystem sample_ifs(RngStream& rng, const IfsSamplingConfig& config) {
  require(config.min_maps >= 2 && config.max_maps >= config.min_maps, "bad map count range");
  IfsSystem system;
  const auto count = static_cast<std::size_t>(rng.uniform_int(config.min_maps, config.max_maps));
  system.maps.resize(count);
  for (auto& map : system.maps) {
    for (double& v : map.matrix) v = rng.uniform(-config.matrix_range, config.matrix_range);
    for (double& v : map.translation) v = rng.uniform(-config.translation_range, config.translation_range);
  }
  double total = 0.0;
  for (const auto& map : system.maps) {
    system.weights.push_back(std::max(std::abs(map.determinant()), config.min_weight));
    total += system.weights.back();
  }
  for (double& w : system.weights) w /= total;
  return system;
}

FractalImage chaos_game(const IfsSystem& system, std::size_t points, int resolution, RngStream& rng,
                        double rotation_deg) {
  validate(system);
  require(points >= 1000, "chaos game needs at least 1000 points");
  require(resolution >= 32, "resolution must be >= 32");

  std::vector<double> cumulative(system.weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < system.weights.size(); ++i) cumulative[i] = (acc += system.weights[i]);

  std::vector<std::array<double, 2>> cloud;
  cloud.reserve(points);
  double x = 0.0;
  double y = 0.0;
  for (std::size_t k = 0; k < kBurnIn + points; ++k) {
    const auto& map = system.maps[pick_map(cumulative, rng.uniform01())];
    const double nx = map.matrix[0] * x + map.matrix[1] * y + map.translation[0];
    const double ny = map.matrix[2] * x + map.matrix[3] * y + map.translation[1];
    x = nx;
    y = ny;
    if (!(x * x + y * y <= kDivergenceRadiusSq)) throw DivergenceError("IFS orbit diverged");
    if (k >= kBurnIn) cloud.push_back({x, y});
  }

  if (rotation_deg != 0.0) {
    const double theta = rotation_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (auto& p : cloud) p = {c * p[0] - s * p[1], s * p[0] + c * p[1]};
  }

  double min_x = cloud.front()[0], max_x = min_x;
  double min_y = cloud.front()[1], max_y = min_y;
  for (const auto& p : cloud) {
    min_x = std::min(min_x, p[0]);
    max_x = std::max(max_x, p[0]);
    min_y = std::min(min_y, p[1]);
    max_y = std::max(max_y, p[1]);
  }
  const double side = std::max(max_x - min_x, max_y - min_y);
  const double x0 = 0.5 * (min_x + max_x) - 0.5 * side;
  const double y0 = 0.5 * (min_y + max_y) - 0.5 * side;

  FractalImage out;
  out.image = Image(resolution, resolution, 1);
  const double res = static_cast<double>(resolution);
  const auto to_pixel = [&](double v, double origin) {
    if (!(side > 0.0)) return resolution / 2;
    const double t = std::floor((v - origin) / side * res);
    return static_cast<int>(std::clamp(t, 0.0, res - 1.0));
  };
  std::size_t lit = 0;
  for (const auto& p : cloud) {
    const int px = to_pixel(p[0], x0);
    const int py = resolution - 1 - to_pixel(p[1], y0);
    std::uint8_t& pixel = out.image.at(px, py);
    if (pixel == 0) {
      pixel = 255;
      ++lit;
    }
  }
  out.fill_rate = static_cast<double>(lit) / (res * res);
  return out;
}

bool accept_system(const FractalImage& image, double min_fill) { return image.fill_rate >= min_fill; }

RngStream augment_parameter_stream(const RngStream& class_rng, std::size_t image, int attempt) {
  return class_rng.child(image).child(2 * static_cast<std::uint64_t>(attempt));
}

RngStream augment_orbit_stream(const RngStream& class_rng, std::size_t image, int attempt) {
  return class_rng.child(image).child(2 * static_cast<std::uint64_t>(attempt) + 1);
}

std::vector<FractalImage> augment(const IfsSystem& system, const RngStream& class_rng, std::size_t count,
                                  const AugmentConfig& config) {
  validate(system);
  require(count >= 1, "augment count must be >= 1");
  require(config.max_retries >= 0, "max_retries must be >= 0");
  std::vector<FractalImage> images;
  images.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    for (int attempt = 0;; ++attempt) {
      RngStream params = augment_parameter_stream(class_rng, i, attempt);
      IfsSystem perturbed = system;
      for (auto& map : perturbed.maps) {
        for (double& v : map.matrix) v *= params.uniform(config.matrix_scale.lo, config.matrix_scale.hi);
      }
      const double rotation = params.uniform(config.rotation_deg.lo, config.rotation_deg.hi);
      RngStream orbit = augment_orbit_stream(class_rng, i, attempt);
      try {
        images.push_back(chaos_game(perturbed, config.points, config.resolution, orbit, rotation));
        break;
      } catch (const DivergenceError&) {
        if (attempt >= config.max_retries) {
          throw DivergenceError("image " + std::to_string(i) + ": perturbed system diverged after " +
                                std::to_string(config.max_retries) + " retries");
        }
      }
    }
  }
  return images;
}

void validate(const FractalGenConfig& config) {
  require(config.classes >= 1, "classes must be >= 1");
  require(config.images_per_class >= 1, "images per class must be >= 1");
  require(config.min_fill >= 0.0 && config.min_fill <= 1.0, "min_fill must lie in [0, 1]");
  require(config.augment.points >= 1000, "points must be >= 1000");
  require(config.augment.resolution >= 32, "resolution must be >= 32");
  require(config.max_attempts >= 1, "max_attempts must be >= 1");
}

FractalClass generate_fractal_class(const FractalGenConfig& config, std::size_t class_index) {
  validate(config);
  RngStream rng(config.seed, class_index);
  for (std::size_t attempt = 0; attempt < config.max_attempts; ++attempt) {
    IfsSystem system = sample_ifs(rng, config.sampling);
    FractalImage preview;
    try {
      preview = chaos_game(system, config.augment.points, config.augment.resolution, rng);
    } catch (const DivergenceError&) {
      continue;
    }
    if (!accept_system(preview, config.min_fill)) continue;
    try {
      auto images = augment(system, rng.child(attempt), config.images_per_class, config.augment);
      return {class_index, std::move(system), attempt, preview.fill_rate, std::move(images)};
    } catch (const DivergenceError&) {
      continue;
    }
  }
  throw GenerationExhaustedError("fractal class " + std::to_string(class_index) + ": no acceptable system in " +
                                 std::to_string(config.max_attempts) + " attempts");
}

void to_json(nlohmann::json& j, const IfsSystem& system) {
  nlohmann::json maps = nlohmann::json::array();
  for (const auto& map : system.maps) maps.push_back({{"matrix", map.matrix}, {"translation", map.translation}});
  j = {{"maps", std::move(maps)}, {"weights", system.weights}};
}

void from_json(const nlohmann::json& j, IfsSystem& system) {
  system.maps.clear();
  for (const auto& m : j.at("maps")) {
    system.maps.push_back({m.at("matrix").get<std::array<double, 4>>(), m.at("translation").get<std::array<double, 2>>()});
  }
  system.weights = j.at("weights").get<std::vector<double>>();
}

void to_json(nlohmann::json& j, const FractalGenConfig& c) {
  j = {{"classes", c.classes},
       {"images", c.images_per_class},
       {"seed", c.seed},
       {"min_fill", c.min_fill},
       {"points", c.augment.points},
       {"res", c.augment.resolution},
       {"min_maps", c.sampling.min_maps},
       {"max_maps", c.sampling.max_maps},
       {"matrix_range", c.sampling.matrix_range},
       {"translation_range", c.sampling.translation_range},
       {"matrix_scale", {c.augment.matrix_scale.lo, c.augment.matrix_scale.hi}},
       {"rotation_deg", {c.augment.rotation_deg.lo, c.augment.rotation_deg.hi}},
       {"max_retries", c.augment.max_retries},
       {"max_attempts", c.max_attempts}};
}

void from_json(const nlohmann::json& j, FractalGenConfig& c) {
  c.classes = j.value("classes", c.classes);
  c.images_per_class = j.value("images", c.images_per_class);
  c.seed = j.value("seed", c.seed);
  c.min_fill = j.value("min_fill", c.min_fill);
  c.augment.points = j.value("points", c.augment.points);
  c.augment.resolution = j.value("res", c.augment.resolution);
  c.sampling.min_maps = j.value("min_maps", c.sampling.min_maps);
  c.sampling.max_maps = j.value("max_maps", c.sampling.max_maps);
  c.sampling.matrix_range = j.value("matrix_range", c.sampling.matrix_range);
  c.sampling.translation_range = j.value("translation_range", c.sampling.translation_range);
  if (j.contains("matrix_scale")) {
    c.augment.matrix_scale = {j["matrix_scale"].at(0).get<double>(), j["matrix_scale"].at(1).get<double>()};
  }
  if (j.contains("rotation_deg")) {
    c.augment.rotation_deg = {j["rotation_deg"].at(0).get<double>(), j["rotation_deg"].at(1).get<double>()};
  }
  c.augment.max_retries = j.value("max_retries", c.augment.max_retries);
  c.max_attempts = j.value("max_attempts", c.max_attempts);
}

}  // namespace synthforge
