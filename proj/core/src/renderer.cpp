#include "synthforge/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "synthforge/errors.hpp"
#include "synthforge/json_types.hpp"
#include "synthforge/rng.hpp"

namespace synthforge {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void require(bool ok, const char* what) {
  if (!ok) throw ParameterError(what);
}

void validate_pose(const CameraPose& pose) {
  require(std::isfinite(pose.azimuth_deg) && std::isfinite(pose.elevation_deg), "camera angles must be finite");
  require(std::isfinite(pose.distance) && pose.distance > 0.0, "camera distance must be > 0");
  require(pose.fov_deg > 0.0 && pose.fov_deg < 180.0, "field of view must lie in (0, 180) degrees");
}

Vec3 view_direction(double azimuth_deg, double elevation_deg) {
  const double az = azimuth_deg * kDegToRad;
  const double el = elevation_deg * kDegToRad;
  return {std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az)};
}

Mat4 look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 forward = normalize(target - eye);
  Vec3 up{0.0, 1.0, 0.0};
  if (length(cross(forward, up)) < 1e-9) up = {0.0, 0.0, forward.y > 0.0 ? 1.0 : -1.0};
  const Vec3 right = normalize(cross(forward, up));
  const Vec3 true_up = cross(right, forward);
  Mat4 v = Mat4::identity();
  for (int c = 0; c < 3; ++c) {
    v(0, c) = right[c];
    v(1, c) = true_up[c];
    v(2, c) = -forward[c];
  }
  v(0, 3) = -dot(right, eye);
  v(1, 3) = -dot(true_up, eye);
  v(2, 3) = dot(forward, eye);
  return v;
}

Mat4 perspective(double fov_deg, double near_plane, double far_plane) {
  const double f = 1.0 / std::tan(0.5 * fov_deg * kDegToRad);
  Mat4 p;
  p(0, 0) = f;
  p(1, 1) = f;
  p(2, 2) = (far_plane + near_plane) / (near_plane - far_plane);
  p(2, 3) = 2.0 * far_plane * near_plane / (near_plane - far_plane);
  p(3, 2) = -1.0;
  return p;
}

int axis_index(Axis axis) { return static_cast<int>(axis); }

struct ClipVertex {
  double x, y, z, w;
  double c[3];
};

ClipVertex lerp(const ClipVertex& a, const ClipVertex& b, double t) {
  ClipVertex r;
  r.x = a.x + t * (b.x - a.x);
  r.y = a.y + t * (b.y - a.y);
  r.z = a.z + t * (b.z - a.z);
  r.w = a.w + t * (b.w - a.w);
  for (int k = 0; k < 3; ++k) r.c[k] = a.c[k] + t * (b.c[k] - a.c[k]);
  return r;
}

/// Sutherland-Hodgman against z >= -w. Returns the vertex count (<= 4).
int clip_near(const ClipVertex (&in)[3], ClipVertex (&out)[4]) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& a = in[i];
    const ClipVertex& b = in[(i + 1) % 3];
    const double da = a.z + a.w;
    const double db = b.z + b.w;
    if (da >= 0.0) out[n++] = a;
    if ((da >= 0.0) != (db >= 0.0)) out[n++] = lerp(a, b, da / (da - db));
  }
  return n;
}

struct ScreenVertex {
  double x, y, z, inv_w;
  double c[3];
};

struct Target {
  int res;
  int channels;
  std::vector<double> depth;
  Image* image;
};

void draw_triangle(Target& t, const ScreenVertex& v0, const ScreenVertex& v1, const ScreenVertex& v2,
                   double shade) {
  const double area = (v1.x - v0.x) * (v2.y - v0.y) - (v1.y - v0.y) * (v2.x - v0.x);
  if (area == 0.0 || !std::isfinite(area)) return;
  const double inv_area = 1.0 / area;
  // Constant albedo skips interpolation so flat-colored faces shade exactly.
  bool constant[3];
  for (int k = 0; k < 3; ++k) constant[k] = v0.c[k] == v1.c[k] && v1.c[k] == v2.c[k];

  const double min_x = std::min({v0.x, v1.x, v2.x});
  const double max_x = std::max({v0.x, v1.x, v2.x});
  const double min_y = std::min({v0.y, v1.y, v2.y});
  const double max_y = std::max({v0.y, v1.y, v2.y});
  const int x_begin = std::max(0, static_cast<int>(std::floor(min_x - 0.5)));
  const int x_end = std::min(t.res - 1, static_cast<int>(std::ceil(max_x - 0.5)));
  const int y_begin = std::max(0, static_cast<int>(std::floor(min_y - 0.5)));
  const int y_end = std::min(t.res - 1, static_cast<int>(std::ceil(max_y - 0.5)));

  for (int py = y_begin; py <= y_end; ++py) {
    const double sy = py + 0.5;
    for (int px = x_begin; px <= x_end; ++px) {
      const double sx = px + 0.5;
      const double b0 = ((v1.x - sx) * (v2.y - sy) - (v1.y - sy) * (v2.x - sx)) * inv_area;
      const double b1 = ((v2.x - sx) * (v0.y - sy) - (v2.y - sy) * (v0.x - sx)) * inv_area;
      const double b2 = 1.0 - b0 - b1;
      if (b0 < 0.0 || b1 < 0.0 || b2 < 0.0) continue;
      const double z = b0 * v0.z + b1 * v1.z + b2 * v2.z;
      const std::size_t idx = static_cast<std::size_t>(py) * t.res + px;
      if (!(z < t.depth[idx])) continue;
      t.depth[idx] = z;

      const double p0 = b0 * v0.inv_w;
      const double p1 = b1 * v1.inv_w;
      const double p2 = b2 * v2.inv_w;
      const double sum = p0 + p1 + p2;
      for (int k = 0; k < t.channels; ++k) {
        const double albedo =
            constant[k] ? v0.c[k] : (p0 * v0.c[k] + p1 * v1.c[k] + p2 * v2.c[k]) / sum;
        const double value = std::clamp(albedo * shade, 0.0, 1.0);
        t.image->pixels[idx * t.channels + k] = static_cast<std::uint8_t>(std::floor(255.0 * value + 0.5));
      }
    }
  }
}

}  // namespace

Mat4 Mat4::identity() {
  Mat4 r;
  for (int i = 0; i < 4; ++i) r(i, i) = 1.0;
  return r;
}

std::array<double, 4> Mat4::apply(const Vec3& p) const {
  std::array<double, 4> out{};
  for (int r = 0; r < 4; ++r) out[r] = (*this)(r, 0) * p.x + (*this)(r, 1) * p.y + (*this)(r, 2) * p.z + (*this)(r, 3);
  return out;
}

Mat4 operator*(const Mat4& a, const Mat4& b) {
  Mat4 r;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += a(i, k) * b(k, j);
      r(i, j) = s;
    }
  }
  return r;
}

void validate(const RenderJob& job) {
  require(job.mesh != nullptr, "render job has no mesh");
  require(job.resolution >= 32 && job.resolution <= 16384, "resolution must lie in [32, 16384]");
  validate_pose(job.pose);
  const auto& l = job.light;
  require(is_finite(l.direction) && std::abs(length(l.direction) - 1.0) <= 1e-6, "light direction must be a unit vector");
  require(l.diffuse >= 0.0 && l.diffuse <= 1.0, "k_d must lie in [0, 1]");
  require(l.ambient >= 0.0 && l.ambient <= 1.0, "k_a must lie in [0, 1]");
  require(l.ambient + l.diffuse <= 1.0 + 1e-12, "k_a + k_d must be <= 1");
  if (job.anisotropic_scale) {
    const double f = job.anisotropic_scale->factor;
    require(std::isfinite(f) && f > 0.0, "anisotropic scale factor must be > 0");
  }
  require(std::isfinite(job.augment.rotation_deg) && std::isfinite(job.augment.shift_x) &&
              std::isfinite(job.augment.shift_y),
          "image augmentation must be finite");
}

CameraTransform frame_camera(const Mesh& mesh, const CameraPose& pose, bool auto_frame) {
  validate_pose(pose);
  const Aabb box = bounding_box(mesh);
  const double radius = 0.5 * box.diagonal();
  if (!(radius > 0.0)) throw DegenerateInputError("cannot frame a mesh with a zero-size bounding box");

  CameraTransform cam;
  cam.target = box.center();
  cam.distance = auto_frame ? radius / std::sin(0.4 * pose.fov_deg * kDegToRad) : pose.distance;
  cam.eye = cam.target + cam.distance * view_direction(pose.azimuth_deg, pose.elevation_deg);
  cam.near_plane = std::max(1e-3 * cam.distance, 0.9 * (cam.distance - radius));
  cam.far_plane = cam.distance + 1.1 * radius + cam.near_plane;
  cam.view = look_at(cam.eye, cam.target);
  cam.projection = perspective(pose.fov_deg, cam.near_plane, cam.far_plane);
  cam.view_projection = cam.projection * cam.view;
  return cam;
}

Mesh apply_anisotropic_scale(const Mesh& mesh, const AnisotropicScale& scale) {
  require(std::isfinite(scale.factor) && scale.factor > 0.0, "anisotropic scale factor must be > 0");
  Mesh out = mesh;
  if (mesh.empty()) return out;
  const int a = axis_index(scale.axis);
  const double c = bounding_box(mesh).center()[a];
  for (auto& v : out.vertices) v[a] = c + (v[a] - c) * scale.factor;
  return out;
}

RenderedImage rasterize(const RenderJob& job) {
  validate(job);
  const Mesh& source = *job.mesh;
  validate(source);

  const Mesh* mesh = &source;
  Mesh scaled;
  if (job.anisotropic_scale && job.anisotropic_scale->factor != 1.0) {
    scaled = apply_anisotropic_scale(source, *job.anisotropic_scale);
    mesh = &scaled;
  }

  CameraPose pose = job.pose;
  if (job.flat) {
    pose.azimuth_deg = kCanonicalPose.azimuth_deg;
    pose.elevation_deg = kCanonicalPose.elevation_deg;
  }
  const CameraTransform cam = frame_camera(*mesh, pose, job.auto_frame);

  const int channels = job.color == ColorMode::rgb ? 3 : 1;
  RenderedImage out{Image(job.resolution, job.resolution, channels), job};
  Target target{job.resolution, channels,
                std::vector<double>(static_cast<std::size_t>(job.resolution) * job.resolution,
                                    std::numeric_limits<double>::infinity()),
                &out.image};

  const std::size_t nv = mesh->vertices.size();
  std::vector<ClipVertex> clip(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    const auto h = cam.view_projection.apply(mesh->vertices[i]);
    ClipVertex& cv = clip[i];
    cv.x = h[0];
    cv.y = h[1];
    cv.z = h[2];
    cv.w = h[3];
    if (!mesh->albedo) {
      cv.c[0] = cv.c[1] = cv.c[2] = 1.0;
    } else {
      const Rgb& a = (*mesh->albedo)[i];
      if (channels == 1) {
        cv.c[0] = cv.c[1] = cv.c[2] = 0.299 * a.r + 0.587 * a.g + 0.114 * a.b;
      } else {
        cv.c[0] = a.r;
        cv.c[1] = a.g;
        cv.c[2] = a.b;
      }
    }
  }

  const double theta = job.augment.rotation_deg * kDegToRad;
  const double rc = std::cos(theta);
  const double rs = std::sin(theta);
  const double shift_x = 2.0 * job.augment.shift_x;
  const double shift_y = 2.0 * job.augment.shift_y;
  const double res = static_cast<double>(job.resolution);
  const auto to_screen = [&](const ClipVertex& c) {
    const double inv_w = 1.0 / c.w;
    const double nx = c.x * inv_w;
    const double ny = c.y * inv_w;
    const double ax = rc * nx - rs * ny + shift_x;
    const double ay = rs * nx + rc * ny + shift_y;
    return ScreenVertex{(ax * 0.5 + 0.5) * res, (0.5 - ay * 0.5) * res, c.z * inv_w, inv_w, {c.c[0], c.c[1], c.c[2]}};
  };

  const Illumination& light = job.light;
  const double flat_shade = std::clamp(light.ambient + light.diffuse, 0.0, 1.0);

  for (const Face& face : mesh->faces) {
    for (std::size_t k = 1; k + 1 < face.size(); ++k) {
      const std::uint32_t idx[3] = {face[0], face[k], face[k + 1]};
      const Vec3& p0 = mesh->vertices[idx[0]];
      const Vec3& p1 = mesh->vertices[idx[1]];
      const Vec3& p2 = mesh->vertices[idx[2]];
      const Vec3 raw = cross(p1 - p0, p2 - p0);
      if (!(length_squared(raw) > 0.0)) continue;

      double shade = flat_shade;
      if (!job.flat) {
        Vec3 n = normalize(raw);
        if (dot(n, cam.eye - p0) < 0.0) n = -n;
        shade = std::clamp(light.ambient + light.diffuse * std::max(0.0, dot(n, light.direction)), 0.0, 1.0);
      }

      const ClipVertex tri[3] = {clip[idx[0]], clip[idx[1]], clip[idx[2]]};
      ClipVertex poly[4];
      int count = 3;
      if (tri[0].z + tri[0].w >= 0.0 && tri[1].z + tri[1].w >= 0.0 && tri[2].z + tri[2].w >= 0.0) {
        std::copy(std::begin(tri), std::end(tri), poly);
      } else {
        count = clip_near(tri, poly);
      }
      if (count < 3) continue;
      ScreenVertex s[4];
      for (int i = 0; i < count; ++i) s[i] = to_screen(poly[i]);
      for (int i = 1; i + 1 < count; ++i) draw_triangle(target, s[0], s[i], s[i + 1], shade);
    }
  }
  return out;
}

std::vector<RenderJob> sample_render_plan(std::uint64_t class_seed, std::size_t images_per_class, bool flat,
                                          const RenderPlanConfig& config) {
  require(images_per_class >= 1, "images_per_class must be >= 1");
  std::vector<RenderJob> jobs(images_per_class);
  for (std::size_t i = 0; i < images_per_class; ++i) {
    RngStream rng(class_seed, i);
    RenderJob& job = jobs[i];
    job.seed = class_seed;
    job.image_index = i;
    job.resolution = config.resolution;
    job.color = config.color;
    job.flat = flat;
    job.pose.fov_deg = config.fov_deg;
    if (flat) {
      job.pose.azimuth_deg = kCanonicalPose.azimuth_deg;
      job.pose.elevation_deg = kCanonicalPose.elevation_deg;
      job.light = config.flat_light;
      job.augment.rotation_deg = rng.uniform(0.0, 360.0);
      job.augment.shift_x = rng.uniform(-config.flat_max_shift, config.flat_max_shift);
      job.augment.shift_y = rng.uniform(-config.flat_max_shift, config.flat_max_shift);
      continue;
    }
    job.pose.azimuth_deg = rng.uniform(0.0, 360.0);
    job.pose.elevation_deg = rng.uniform(config.elevation_deg.lo, config.elevation_deg.hi);
    Vec3 dir = rng.unit_vector();
    dir.y = std::abs(dir.y);
    job.light.direction = dir;
    job.light.diffuse = rng.uniform(config.diffuse.lo, config.diffuse.hi);
    job.light.ambient = config.ambient;
    if (rng.bernoulli(config.aniso_probability)) {
      AnisotropicScale scale;
      scale.axis = static_cast<Axis>(rng.uniform_int(0, 2));
      scale.factor = config.aniso_mode == AnisoMode::factor2
                         ? 2.0
                         : rng.uniform(config.aniso_factor.lo, config.aniso_factor.hi);
      job.anisotropic_scale = scale;
    }
  }
  return jobs;
}

std::string to_string(Axis axis) {
  switch (axis) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "x";
}

std::string to_string(ColorMode mode) { return mode == ColorMode::rgb ? "rgb" : "gray"; }

std::string to_string(AnisoMode mode) { return mode == AnisoMode::factor2 ? "factor2" : "uniform-range"; }

ColorMode color_mode_from_string(const std::string& name) {
  if (name == "gray") return ColorMode::gray;
  if (name == "rgb") return ColorMode::rgb;
  throw ParameterError("unknown color mode: " + name);
}

AnisoMode aniso_mode_from_string(const std::string& name) {
  if (name == "uniform-range") return AnisoMode::uniform_range;
  if (name == "factor2") return AnisoMode::factor2;
  throw ParameterError("unknown anisotropic scale mode: " + name);
}

namespace {

Axis axis_from_string(const std::string& name) {
  if (name == "x") return Axis::x;
  if (name == "y") return Axis::y;
  if (name == "z") return Axis::z;
  throw ParameterError("unknown axis: " + name);
}

}  // namespace

void to_json(nlohmann::json& j, const RenderJob& job) {
  j = {{"class_index", job.class_index},
       {"image_index", job.image_index},
       {"seed", job.seed},
       {"mesh", job.mesh_ref},
       {"pose",
        {{"azimuth", job.pose.azimuth_deg},
         {"elevation", job.pose.elevation_deg},
         {"distance", job.pose.distance},
         {"fov", job.pose.fov_deg}}},
       {"light", {{"direction", job.light.direction}, {"k_d", job.light.diffuse}, {"k_a", job.light.ambient}}},
       {"augment",
        {{"rotation", job.augment.rotation_deg}, {"shift", {job.augment.shift_x, job.augment.shift_y}}}},
       {"resolution", job.resolution},
       {"color", to_string(job.color)},
       {"flat", job.flat},
       {"auto_frame", job.auto_frame}};
  if (job.anisotropic_scale) {
    j["aniso"] = {{"axis", to_string(job.anisotropic_scale->axis)}, {"factor", job.anisotropic_scale->factor}};
  } else {
    j["aniso"] = nullptr;
  }
}

void from_json(const nlohmann::json& j, RenderJob& job) {
  job.class_index = j.at("class_index").get<std::size_t>();
  job.image_index = j.at("image_index").get<std::size_t>();
  job.seed = j.at("seed").get<std::uint64_t>();
  job.mesh_ref = j.value("mesh", std::string{});
  const auto& pose = j.at("pose");
  job.pose = {pose.at("azimuth").get<double>(), pose.at("elevation").get<double>(), pose.at("distance").get<double>(),
              pose.at("fov").get<double>()};
  const auto& light = j.at("light");
  job.light = {light.at("direction").get<Vec3>(), light.at("k_d").get<double>(), light.at("k_a").get<double>()};
  const auto& aug = j.at("augment");
  job.augment = {aug.at("rotation").get<double>(), aug.at("shift").at(0).get<double>(),
                 aug.at("shift").at(1).get<double>()};
  job.resolution = j.at("resolution").get<int>();
  job.color = color_mode_from_string(j.at("color").get<std::string>());
  job.flat = j.at("flat").get<bool>();
  job.auto_frame = j.value("auto_frame", true);
  if (j.contains("aniso") && !j["aniso"].is_null()) {
    job.anisotropic_scale =
        AnisotropicScale{axis_from_string(j["aniso"].at("axis").get<std::string>()), j["aniso"].at("factor").get<double>()};
  } else {
    job.anisotropic_scale.reset();
  }
}

}  // namespace synthforge
