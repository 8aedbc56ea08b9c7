#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "synthforge/geometry.hpp"
#include "synthforge/image.hpp"
#include "synthforge/vec.hpp"

namespace synthforge {

/// Viewpoint on a sphere around the mesh center. Azimuth 0 looks from +z,
/// positive elevation looks down from above (+y is up).
struct CameraPose {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  /// Only used when framing is disabled; otherwise derived from the mesh.
  double distance = 5.0;
  double fov_deg = 40.0;

  friend bool operator==(const CameraPose&, const CameraPose&) = default;
};

/// Directional light. `direction` points from the surface toward the light.
struct Illumination {
  Vec3 direction{0.0, 1.0, 0.0};
  double diffuse = 0.9;
  double ambient = 0.1;

  friend bool operator==(const Illumination&, const Illumination&) = default;
};

enum class Axis { x, y, z };
enum class ColorMode { gray, rgb };

struct AnisotropicScale {
  Axis axis = Axis::x;
  double factor = 1.0;
  friend bool operator==(const AnisotropicScale&, const AnisotropicScale&) = default;
};

/// Screen-space augmentation: rotation about the image center and a shift in
/// fractions of the frame size.
struct ImageAugment {
  double rotation_deg = 0.0;
  double shift_x = 0.0;
  double shift_y = 0.0;
  friend bool operator==(const ImageAugment&, const ImageAugment&) = default;
};

struct RenderJob {
  std::shared_ptr<const Mesh> mesh;
  /// Provenance of the mesh (e.g. its OBJ path).
  std::string mesh_ref;
  std::size_t class_index = 0;
  std::size_t image_index = 0;
  std::uint64_t seed = 0;

  CameraPose pose;
  Illumination light;
  std::optional<AnisotropicScale> anisotropic_scale;
  ImageAugment augment;
  int resolution = 256;
  ColorMode color = ColorMode::gray;
  /// Canonical pose and normal-independent shading.
  bool flat = false;
  /// Fit the mesh into the frame (ignores pose.distance).
  bool auto_frame = true;
};

/// Throws ParameterError.
void validate(const RenderJob& job);

struct RenderedImage {
  Image image;
  RenderJob job;
};

/// Row-major 4x4.
struct Mat4 {
  std::array<double, 16> m{};
  static Mat4 identity();
  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r) * 4 + c]; }
  double& operator()(int r, int c) { return m[static_cast<std::size_t>(r) * 4 + c]; }
  std::array<double, 4> apply(const Vec3& p) const;
};

Mat4 operator*(const Mat4& a, const Mat4& b);

struct CameraTransform {
  Vec3 eye;
  Vec3 target;
  double distance = 0.0;
  double near_plane = 0.0;
  double far_plane = 0.0;
  Mat4 view;
  Mat4 projection;
  Mat4 view_projection;
};

/// Looks at the bounding-box center. With auto_frame the distance is chosen
/// so the bounding sphere spans 80% of the vertical field of view.
/// Throws DegenerateInputError for a zero-size box.
CameraTransform frame_camera(const Mesh& mesh, const CameraPose& pose, bool auto_frame = true);

/// Pose used by flat renders.
inline constexpr CameraPose kCanonicalPose{30.0, 20.0, 5.0, 40.0};

/// Scales vertex positions along one axis about the bounding-box center.
Mesh apply_anisotropic_scale(const Mesh& mesh, const AnisotropicScale& scale);

/// Z-buffered perspective rasterization, quads fan-split, double-sided
/// Lambert shading, black background.
RenderedImage rasterize(const RenderJob& job);

enum class AnisoMode {
  uniform_range,  ///< factor ~ U[aniso_factor]
  factor2,        ///< factor = 2
};

struct RenderPlanConfig {
  int resolution = 256;
  ColorMode color = ColorMode::gray;
  double fov_deg = 40.0;
  Interval elevation_deg{-30.0, 60.0};
  Interval diffuse{0.5, 0.9};
  double ambient = 0.1;
  double aniso_probability = 0.5;
  AnisoMode aniso_mode = AnisoMode::uniform_range;
  Interval aniso_factor{0.5, 2.0};
  /// Flat renders: fixed light and maximal shift as a fraction of the frame.
  Illumination flat_light{{0.0, 1.0, 0.0}, 0.7, 0.1};
  double flat_max_shift = 0.05;
};

/// Deterministic jobs for one class; job i draws from (class_seed, i). The
/// returned jobs carry no mesh.
std::vector<RenderJob> sample_render_plan(std::uint64_t class_seed, std::size_t images_per_class, bool flat,
                                          const RenderPlanConfig& config = {});

std::string to_string(Axis axis);
std::string to_string(ColorMode mode);
std::string to_string(AnisoMode mode);
ColorMode color_mode_from_string(const std::string& name);
AnisoMode aniso_mode_from_string(const std::string& name);

/// Everything but the mesh pointer.
void to_json(nlohmann::json& j, const RenderJob& job);
void from_json(const nlohmann::json& j, RenderJob& job);

}  // namespace synthforge
