#include "synthforge/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "synthforge/errors.hpp"

namespace synthforge {

namespace {

constexpr double kDegenerateArea = 1e-12;
constexpr double kDegenerateLength = 1e-12;

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

Vec3 place(const Placement& placement, const Vec3& p) {
  return rotate(placement.rotation, p * placement.scale) + placement.translation;
}

void validate_spec(const PrimitiveSpec& spec) {
  const auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  require(finite_positive(spec.size_a), "primitive size_a must be > 0");
  if (spec.kind == PrimitiveKind::cone || spec.kind == PrimitiveKind::cylinder ||
      spec.kind == PrimitiveKind::torus) {
    require(finite_positive(spec.size_b), "primitive size_b must be > 0");
  }
  if (spec.kind == PrimitiveKind::torus) {
    require(spec.size_b < spec.size_a, "torus tube radius must be < major radius");
  }
  if (spec.kind != PrimitiveKind::cube) {
    require(spec.radial_segments >= 3, "radial_segments must be >= 3");
    require(spec.axial_segments >= 3, "axial_segments must be >= 3");
  }
  require(finite_positive(spec.placement.scale), "placement scale must be > 0");
  require(is_finite(spec.placement.translation), "placement translation must be finite");
  const double qn = norm(spec.placement.rotation);
  require(std::isfinite(qn) && std::abs(qn - 1.0) < 1e-6, "placement rotation must be a unit quaternion");
}

Mesh make_cube(double edge) {
  Mesh m;
  const double h = edge * 0.5;
  m.vertices.reserve(8);
  for (std::uint32_t i = 0; i < 8; ++i) {
    m.vertices.push_back({(i & 1u) ? h : -h, (i & 2u) ? h : -h, (i & 4u) ? h : -h});
  }
  m.faces = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
  return m;
}

Vec3 ring_point(double radius, double y, double phi) {
  return {radius * std::cos(phi), y, radius * std::sin(phi)};
}

// Appends a ring of `segments` vertices; returns the index of its first vertex.
std::uint32_t add_ring(Mesh& m, int segments, double radius, double y) {
  const auto first = static_cast<std::uint32_t>(m.vertices.size());
  for (int j = 0; j < segments; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / segments;
    m.vertices.push_back(ring_point(radius, y, phi));
  }
  return first;
}

// Quads between two consecutive rings, `upper` above `lower`.
void stitch_rings(Mesh& m, std::uint32_t upper, std::uint32_t lower, int segments) {
  const auto s = static_cast<std::uint32_t>(segments);
  for (std::uint32_t j = 0; j < s; ++j) {
    const std::uint32_t k = (j + 1) % s;
    m.faces.push_back({upper + j, upper + k, lower + k, lower + j});
  }
}

// Triangle fan from a vertex above a ring.
void fan_above(Mesh& m, std::uint32_t apex, std::uint32_t ring, int segments) {
  const auto s = static_cast<std::uint32_t>(segments);
  for (std::uint32_t j = 0; j < s; ++j) m.faces.push_back({apex, ring + (j + 1) % s, ring + j});
}

// Triangle fan from a vertex below a ring.
void fan_below(Mesh& m, std::uint32_t apex, std::uint32_t ring, int segments) {
  const auto s = static_cast<std::uint32_t>(segments);
  for (std::uint32_t j = 0; j < s; ++j) m.faces.push_back({ring + j, ring + (j + 1) % s, apex});
}

Mesh make_sphere(double radius, int segments, int rings) {
  Mesh m;
  m.vertices.push_back({0.0, radius, 0.0});
  std::vector<std::uint32_t> ring_start;
  for (int i = 1; i < rings; ++i) {
    const double theta = std::numbers::pi * i / rings;
    ring_start.push_back(add_ring(m, segments, radius * std::sin(theta), radius * std::cos(theta)));
  }
  const auto south = static_cast<std::uint32_t>(m.vertices.size());
  m.vertices.push_back({0.0, -radius, 0.0});
  fan_above(m, 0, ring_start.front(), segments);
  for (std::size_t i = 0; i + 1 < ring_start.size(); ++i) {
    stitch_rings(m, ring_start[i], ring_start[i + 1], segments);
  }
  fan_below(m, south, ring_start.back(), segments);
  return m;
}

Mesh make_cylinder(double radius, double height, int segments, int stacks) {
  Mesh m;
  const double top = height * 0.5;
  std::vector<std::uint32_t> ring_start;
  for (int i = 0; i <= stacks; ++i) {
    ring_start.push_back(add_ring(m, segments, radius, top - height * i / stacks));
  }
  const auto top_center = static_cast<std::uint32_t>(m.vertices.size());
  m.vertices.push_back({0.0, top, 0.0});
  const auto bottom_center = top_center + 1;
  m.vertices.push_back({0.0, -top, 0.0});
  fan_above(m, top_center, ring_start.front(), segments);
  for (int i = 0; i < stacks; ++i) stitch_rings(m, ring_start[i], ring_start[i + 1], segments);
  fan_below(m, bottom_center, ring_start.back(), segments);
  return m;
}

Mesh make_cone(double radius, double height, int segments, int stacks) {
  Mesh m;
  const double top = height * 0.5;
  m.vertices.push_back({0.0, top, 0.0});
  std::vector<std::uint32_t> ring_start;
  for (int i = 1; i <= stacks; ++i) {
    const double t = static_cast<double>(i) / stacks;
    ring_start.push_back(add_ring(m, segments, radius * t, top - height * t));
  }
  const auto base_center = static_cast<std::uint32_t>(m.vertices.size());
  m.vertices.push_back({0.0, -top, 0.0});
  fan_above(m, 0, ring_start.front(), segments);
  for (std::size_t i = 0; i + 1 < ring_start.size(); ++i) {
    stitch_rings(m, ring_start[i], ring_start[i + 1], segments);
  }
  fan_below(m, base_center, ring_start.back(), segments);
  return m;
}

Mesh make_torus(double major, double tube, int segments, int tube_segments) {
  Mesh m;
  m.vertices.reserve(static_cast<std::size_t>(segments) * tube_segments);
  for (int i = 0; i < segments; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / segments;
    const Vec3 radial{std::cos(phi), 0.0, std::sin(phi)};
    for (int j = 0; j < tube_segments; ++j) {
      const double psi = 2.0 * std::numbers::pi * j / tube_segments;
      m.vertices.push_back(radial * (major + tube * std::cos(psi)) + Vec3{0.0, tube * std::sin(psi), 0.0});
    }
  }
  const auto s = static_cast<std::uint32_t>(segments);
  const auto t = static_cast<std::uint32_t>(tube_segments);
  for (std::uint32_t i = 0; i < s; ++i) {
    const std::uint32_t ni = (i + 1) % s;
    for (std::uint32_t j = 0; j < t; ++j) {
      const std::uint32_t nj = (j + 1) % t;
      m.faces.push_back({i * t + j, i * t + nj, ni * t + nj, ni * t + j});
    }
  }
  return m;
}

// Per-level adjacency for Catmull-Clark.
struct SubdivTopology {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<std::vector<std::uint32_t>> edge_faces;
  std::vector<std::vector<std::uint32_t>> face_edges;  // edge of corner i -> i+1
  std::vector<std::vector<std::uint32_t>> vertex_faces;
  std::vector<std::vector<std::uint32_t>> vertex_edges;
  std::size_t non_manifold = 0;
};

SubdivTopology build_topology(const Mesh& mesh) {
  SubdivTopology topo;
  std::unordered_map<std::uint64_t, std::uint32_t> index;
  index.reserve(mesh.faces.size() * 4);
  topo.face_edges.resize(mesh.faces.size());
  topo.vertex_faces.resize(mesh.vertices.size());
  topo.vertex_edges.resize(mesh.vertices.size());
  for (std::uint32_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& face = mesh.faces[f];
    topo.face_edges[f].resize(face.size());
    for (std::size_t i = 0; i < face.size(); ++i) {
      const std::uint32_t a = face[i];
      const std::uint32_t b = face[(i + 1) % face.size()];
      auto [it, inserted] = index.try_emplace(edge_key(a, b), static_cast<std::uint32_t>(topo.edges.size()));
      if (inserted) {
        topo.edges.emplace_back(std::min(a, b), std::max(a, b));
        topo.edge_faces.emplace_back();
        topo.vertex_edges[a].push_back(it->second);
        topo.vertex_edges[b].push_back(it->second);
      }
      topo.edge_faces[it->second].push_back(f);
      topo.face_edges[f][i] = it->second;
      topo.vertex_faces[a].push_back(f);
    }
  }
  for (const auto& faces : topo.edge_faces) {
    if (faces.size() > 2) ++topo.non_manifold;
  }
  return topo;
}

// One Catmull-Clark step for any attribute that supports +, * double.
// Output layout: [vertex points | edge points | face points].
template <typename T>
std::vector<T> subdivide_values(const Mesh& mesh, const SubdivTopology& topo, const std::vector<T>& values) {
  const std::size_t nv = values.size();
  const std::size_t ne = topo.edges.size();
  const std::size_t nf = mesh.faces.size();
  std::vector<T> out(nv + ne + nf);

  for (std::size_t f = 0; f < nf; ++f) {
    T sum{};
    for (std::uint32_t v : mesh.faces[f]) sum += values[v];
    out[nv + ne + f] = sum * (1.0 / static_cast<double>(mesh.faces[f].size()));
  }
  const auto face_point = [&](std::uint32_t f) -> const T& { return out[nv + ne + f]; };

  for (std::size_t e = 0; e < ne; ++e) {
    const auto [a, b] = topo.edges[e];
    const auto& faces = topo.edge_faces[e];
    if (faces.size() == 2) {
      out[nv + e] = (values[a] + values[b] + face_point(faces[0]) + face_point(faces[1])) * 0.25;
    } else {
      out[nv + e] = (values[a] + values[b]) * 0.5;
    }
  }

  for (std::uint32_t v = 0; v < nv; ++v) {
    const auto& incident = topo.vertex_edges[v];
    if (incident.empty()) {
      out[v] = values[v];
      continue;
    }
    std::array<std::uint32_t, 2> crease_neighbors{};
    std::size_t creases = 0;
    for (std::uint32_t e : incident) {
      if (topo.edge_faces[e].size() != 2) {
        const auto [a, b] = topo.edges[e];
        if (creases < 2) crease_neighbors[creases] = (a == v) ? b : a;
        ++creases;
      }
    }
    if (creases == 0) {
      const auto& faces = topo.vertex_faces[v];
      T face_avg{};
      for (std::uint32_t f : faces) face_avg += face_point(f);
      face_avg = face_avg * (1.0 / static_cast<double>(faces.size()));
      T edge_avg{};
      for (std::uint32_t e : incident) {
        edge_avg += (values[topo.edges[e].first] + values[topo.edges[e].second]) * 0.5;
      }
      const double n = static_cast<double>(incident.size());
      edge_avg = edge_avg * (1.0 / n);
      out[v] = (face_avg + edge_avg * 2.0 + values[v] * (n - 3.0)) * (1.0 / n);
    } else if (creases == 2) {
      out[v] = (values[crease_neighbors[0]] + values[v] * 6.0 + values[crease_neighbors[1]]) * 0.125;
    } else {
      out[v] = values[v];
    }
  }
  return out;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::cube: return "cube";
    case PrimitiveKind::sphere: return "sphere";
    case PrimitiveKind::cone: return "cone";
    case PrimitiveKind::cylinder: return "cylinder";
    case PrimitiveKind::torus: return "torus";
  }
  return "unknown";
}

PrimitiveKind primitive_kind_from_string(std::string_view name) {
  for (PrimitiveKind kind : kAllPrimitiveKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw ParameterError("unknown primitive kind: " + std::string(name));
}

void validate(const Mesh& mesh) {
  const std::size_t nv = mesh.vertices.size();
  for (std::size_t i = 0; i < nv; ++i) {
    require(is_finite(mesh.vertices[i]), "vertex " + std::to_string(i) + " is not finite");
  }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& face = mesh.faces[f];
    std::unordered_set<std::uint32_t> distinct;
    for (std::uint32_t idx : face) {
      require(idx < nv, "face " + std::to_string(f) + " references missing vertex " + std::to_string(idx));
      distinct.insert(idx);
    }
    require(distinct.size() >= 3, "face " + std::to_string(f) + " has fewer than 3 distinct vertices");
  }
  if (mesh.albedo) {
    require(mesh.albedo->size() == nv, "albedo length differs from vertex count");
    for (const Rgb& c : *mesh.albedo) {
      require(c.r >= 0.0 && c.r <= 1.0 && c.g >= 0.0 && c.g <= 1.0 && c.b >= 0.0 && c.b <= 1.0,
              "albedo channel outside [0, 1]");
    }
  }
}

double Aabb::max_extent() const {
  const Vec3 e = extents();
  return std::max({e.x, e.y, e.z});
}

bool Aabb::contains(const Aabb& other) const {
  return other.min.x >= min.x && other.min.y >= min.y && other.min.z >= min.z && other.max.x <= max.x &&
         other.max.y <= max.y && other.max.z <= max.z;
}

Aabb Aabb::inflated(double margin) const {
  const Vec3 m{margin, margin, margin};
  return {min - m, max + m};
}

Mesh make_primitive(const PrimitiveSpec& spec) {
  validate_spec(spec);
  Mesh m;
  switch (spec.kind) {
    case PrimitiveKind::cube: m = make_cube(spec.size_a); break;
    case PrimitiveKind::sphere: m = make_sphere(spec.size_a, spec.radial_segments, spec.axial_segments); break;
    case PrimitiveKind::cone:
      m = make_cone(spec.size_a, spec.size_b, spec.radial_segments, spec.axial_segments);
      break;
    case PrimitiveKind::cylinder:
      m = make_cylinder(spec.size_a, spec.size_b, spec.radial_segments, spec.axial_segments);
      break;
    case PrimitiveKind::torus:
      m = make_torus(spec.size_a, spec.size_b, spec.radial_segments, spec.axial_segments);
      break;
  }
  for (Vec3& p : m.vertices) p = place(spec.placement, p);
  return m;
}

Mesh apply_wireframe(const Mesh& mesh, double thickness, GeometryWarnings* warnings) {
  require(std::isfinite(thickness) && thickness > 0.0, "wireframe thickness must be > 0");
  Mesh out;
  const auto edges = unique_edges(mesh);
  out.vertices.reserve(edges.size() * 8);
  out.faces.reserve(edges.size() * 4);
  if (mesh.albedo) out.albedo.emplace().reserve(edges.size() * 8);
  const double half = thickness * 0.5;

  for (const auto& [a, b] : edges) {
    const Vec3& pa = mesh.vertices[a];
    const Vec3& pb = mesh.vertices[b];
    const Vec3 d = pb - pa;
    const double len = length(d);
    if (len <= kDegenerateLength) {
      if (warnings) ++warnings->degenerate_edges;
      continue;
    }
    const Vec3 dir = d / len;
    // Helper axis least aligned with the edge keeps the frame well conditioned.
    Vec3 helper{1.0, 0.0, 0.0};
    if (std::abs(dir.y) <= std::abs(dir.x) && std::abs(dir.y) <= std::abs(dir.z)) {
      helper = {0.0, 1.0, 0.0};
    } else if (std::abs(dir.z) <= std::abs(dir.x)) {
      helper = {0.0, 0.0, 1.0};
    }
    const Vec3 u = normalize(cross(dir, helper)) * half;
    const Vec3 w = cross(dir, u);
    const std::array<Vec3, 4> offsets{u + w, w - u, -u - w, u - w};

    const auto base = static_cast<std::uint32_t>(out.vertices.size());
    for (const Vec3& o : offsets) out.vertices.push_back(pa + o);
    for (const Vec3& o : offsets) out.vertices.push_back(pb + o);
    if (mesh.albedo) {
      for (int k = 0; k < 4; ++k) out.albedo->push_back((*mesh.albedo)[a]);
      for (int k = 0; k < 4; ++k) out.albedo->push_back((*mesh.albedo)[b]);
    }
    for (std::uint32_t k = 0; k < 4; ++k) {
      const std::uint32_t n = (k + 1) % 4;
      out.faces.push_back({base + k, base + 4 + k, base + 4 + n, base + n});
    }
  }
  return out;
}

Mesh apply_subdivide(const Mesh& mesh, int levels, GeometryWarnings* warnings) {
  require(levels >= 1 && levels <= 3, "subdivision levels must be in [1, 3]");
  for (const Face& face : mesh.faces) {
    require(face.size() == 3 || face.size() == 4, "subdivision accepts only triangles and quads");
  }
  Mesh current = mesh;
  for (int level = 0; level < levels; ++level) {
    const SubdivTopology topo = build_topology(current);
    if (warnings) warnings->non_manifold_edges += topo.non_manifold;

    Mesh next;
    next.vertices = subdivide_values(current, topo, current.vertices);
    if (current.albedo) {
      next.albedo = subdivide_values(current, topo, *current.albedo);
      for (Rgb& c : *next.albedo) c = {clamp01(c.r), clamp01(c.g), clamp01(c.b)};
    }
    const auto nv = static_cast<std::uint32_t>(current.vertices.size());
    const auto ne = static_cast<std::uint32_t>(topo.edges.size());
    next.faces.reserve(face_corner_count(current));
    for (std::uint32_t f = 0; f < current.faces.size(); ++f) {
      const Face& face = current.faces[f];
      const std::size_t k = face.size();
      for (std::size_t i = 0; i < k; ++i) {
        const std::uint32_t prev_edge = topo.face_edges[f][(i + k - 1) % k];
        next.faces.push_back({face[i], nv + topo.face_edges[f][i], nv + ne + f, nv + prev_edge});
      }
    }
    current = std::move(next);
  }
  return current;
}

Mesh apply_modifier(const Mesh& mesh, const ModifierSpec& modifier, GeometryWarnings* warnings) {
  return std::visit(
      [&](const auto& m) -> Mesh {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Wireframe>) {
          return apply_wireframe(mesh, m.thickness, warnings);
        } else {
          return apply_subdivide(mesh, m.levels, warnings);
        }
      },
      modifier);
}

Mesh merge(const std::vector<Mesh>& meshes, GeometryWarnings* warnings) {
  Mesh out;
  if (meshes.empty()) return out;
  const bool keep_albedo = std::all_of(meshes.begin(), meshes.end(), [](const Mesh& m) { return m.has_albedo(); });
  std::size_t total_vertices = 0;
  std::size_t total_faces = 0;
  for (const Mesh& m : meshes) {
    total_vertices += m.vertices.size();
    total_faces += m.faces.size();
  }
  out.vertices.reserve(total_vertices);
  out.faces.reserve(total_faces);
  if (keep_albedo) out.albedo.emplace().reserve(total_vertices);

  for (const Mesh& m : meshes) {
    const auto offset = static_cast<std::uint32_t>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), m.vertices.begin(), m.vertices.end());
    if (keep_albedo) out.albedo->insert(out.albedo->end(), m.albedo->begin(), m.albedo->end());
    for (const Face& face : m.faces) {
      if (face_area(m, face) < kDegenerateArea) {
        if (warnings) ++warnings->degenerate_faces;
        continue;
      }
      Face shifted(face);
      for (std::uint32_t& idx : shifted) idx += offset;
      out.faces.push_back(std::move(shifted));
    }
  }
  return out;
}

Aabb bounding_box(const Mesh& mesh) {
  if (mesh.vertices.empty()) throw EmptyInputError("bounding_box of an empty mesh");
  Aabb box{mesh.vertices.front(), mesh.vertices.front()};
  for (const Vec3& p : mesh.vertices) {
    box.min = min(box.min, p);
    box.max = max(box.max, p);
  }
  return box;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> unique_edges(const Mesh& mesh) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(mesh.faces.size() * 4);
  for (const Face& face : mesh.faces) {
    for (std::size_t i = 0; i < face.size(); ++i) {
      const std::uint32_t a = face[i];
      const std::uint32_t b = face[(i + 1) % face.size()];
      if (a == b) continue;
      if (seen.insert(edge_key(a, b)).second) edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  return edges;
}

long euler_characteristic(const Mesh& mesh) {
  return static_cast<long>(mesh.vertices.size()) - static_cast<long>(unique_edges(mesh).size()) +
         static_cast<long>(mesh.faces.size());
}

double face_area(const Mesh& mesh, const Face& face) {
  if (face.size() < 3) return 0.0;
  const Vec3& p0 = mesh.vertices[face[0]];
  Vec3 sum{};
  for (std::size_t i = 1; i + 1 < face.size(); ++i) {
    sum += cross(mesh.vertices[face[i]] - p0, mesh.vertices[face[i + 1]] - p0);
  }
  return 0.5 * length(sum);
}

double signed_volume(const Mesh& mesh) {
  double volume = 0.0;
  for (const Face& face : mesh.faces) {
    const Vec3& p0 = mesh.vertices[face[0]];
    for (std::size_t i = 1; i + 1 < face.size(); ++i) {
      volume += dot(p0, cross(mesh.vertices[face[i]], mesh.vertices[face[i + 1]]));
    }
  }
  return volume / 6.0;
}

std::size_t face_corner_count(const Mesh& mesh) {
  std::size_t corners = 0;
  for (const Face& face : mesh.faces) corners += face.size();
  return corners;
}

}  // namespace synthforge
