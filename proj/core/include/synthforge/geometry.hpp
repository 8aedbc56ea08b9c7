#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "synthforge/vec.hpp"

namespace synthforge {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  constexpr Rgb& operator+=(const Rgb& o) {
    r += o.r;
    g += o.g;
    b += o.b;
    return *this;
  }
  constexpr Rgb& operator*=(double s) {
    r *= s;
    g *= s;
    b *= s;
    return *this;
  }
  friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
};

constexpr Rgb operator+(Rgb a, const Rgb& b) { return a += b; }
constexpr Rgb operator-(const Rgb& a, const Rgb& b) { return {a.r - b.r, a.g - b.g, a.b - b.b}; }
constexpr Rgb operator*(Rgb a, double s) { return a *= s; }
constexpr Rgb operator*(double s, Rgb a) { return a *= s; }
constexpr Rgb operator/(Rgb a, double s) { return a *= (1.0 / s); }

/// Polygon as a list of vertex indices, counter-clockwise seen from outside.
using Face = std::vector<std::uint32_t>;

/// Indexed polygonal surface with optional per-vertex albedo.
///
/// Invariants (checked by validate()):
///  - every face index is < vertices.size()
///  - every coordinate is finite
///  - every face has >= 3 distinct indices
///  - albedo, when present, has one entry per vertex with channels in [0, 1]
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::optional<std::vector<Rgb>> albedo;

  bool empty() const { return vertices.empty(); }
  bool has_albedo() const { return albedo.has_value(); }

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

/// Throws ParameterError naming the first violated invariant.
void validate(const Mesh& mesh);

struct Aabb {
  Vec3 min;
  Vec3 max;

  Vec3 extents() const { return max - min; }
  Vec3 center() const { return (min + max) * 0.5; }
  double max_extent() const;
  double diagonal() const { return length(extents()); }
  bool contains(const Aabb& other) const;
  Aabb inflated(double margin) const;

  friend bool operator==(const Aabb&, const Aabb&) = default;
};

enum class PrimitiveKind { cube, sphere, cone, cylinder, torus };

inline constexpr PrimitiveKind kAllPrimitiveKinds[] = {
    PrimitiveKind::cube, PrimitiveKind::sphere, PrimitiveKind::cone, PrimitiveKind::cylinder,
    PrimitiveKind::torus};

std::string_view to_string(PrimitiveKind kind);
/// Throws ParameterError for unknown names.
PrimitiveKind primitive_kind_from_string(std::string_view name);

struct Placement {
  Vec3 translation;
  Quat rotation;
  double scale = 1.0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Parameters of one primitive. The meaning of the two size fields depends on
/// the kind:
///
///   kind       size_a          size_b
///   cube       edge length     -
///   sphere     radius          -
///   cone       base radius     height
///   cylinder   radius          height
///   torus      major radius    tube radius (< major)
///
/// radial_segments runs around the main (y) axis. axial_segments is the ring
/// count of a sphere, the stack count of a cone or cylinder and the tube
/// resolution of a torus. The cube ignores both.
struct PrimitiveSpec {
  PrimitiveKind kind = PrimitiveKind::cube;
  double size_a = 1.0;
  double size_b = 1.0;
  int radial_segments = 24;
  int axial_segments = 16;
  Placement placement;

  friend bool operator==(const PrimitiveSpec&, const PrimitiveSpec&) = default;
};

struct Wireframe {
  double thickness = 0.05;
  friend bool operator==(const Wireframe&, const Wireframe&) = default;
};

struct Subdivide {
  int levels = 1;
  friend bool operator==(const Subdivide&, const Subdivide&) = default;
};

using ModifierSpec = std::variant<Wireframe, Subdivide>;

/// Counters for recoverable problems. Operations that can skip bad input
/// increment these instead of failing.
struct GeometryWarnings {
  std::size_t degenerate_edges = 0;
  std::size_t non_manifold_edges = 0;
  std::size_t degenerate_faces = 0;

  std::size_t total() const { return degenerate_edges + non_manifold_edges + degenerate_faces; }
};

/// Closed primitive, tessellated and transformed by spec.placement.
/// Cone and cylinder caps are triangle fans around a center vertex.
Mesh make_primitive(const PrimitiveSpec& spec);

/// Replaces every edge by a capless square prism (8 vertices, 4 quads) of the
/// given cross-section width centered on the edge. Input faces are dropped.
/// Zero-length edges are skipped and counted.
Mesh apply_wireframe(const Mesh& mesh, double thickness, GeometryWarnings* warnings = nullptr);

/// Catmull-Clark subdivision, `levels` times (1..3). Boundary edges use the
/// midpoint rule and boundary vertices the 1/8-3/4-1/8 rule; edges shared by
/// more than two faces are treated as boundaries and counted.
Mesh apply_subdivide(const Mesh& mesh, int levels, GeometryWarnings* warnings = nullptr);

Mesh apply_modifier(const Mesh& mesh, const ModifierSpec& modifier,
                    GeometryWarnings* warnings = nullptr);

/// Concatenates meshes, shifting face indices. Albedo survives only if every
/// input has it. Faces with area below 1e-12 are dropped and counted.
Mesh merge(const std::vector<Mesh>& meshes, GeometryWarnings* warnings = nullptr);

/// Throws EmptyInputError for a mesh without vertices.
Aabb bounding_box(const Mesh& mesh);

/// Undirected edges in first-encounter order over the faces. Each pair is
/// (smaller index, larger index).
std::vector<std::pair<std::uint32_t, std::uint32_t>> unique_edges(const Mesh& mesh);

/// V - E + F.
long euler_characteristic(const Mesh& mesh);

/// Magnitude of the polygon's vector area (exact for planar polygons).
double face_area(const Mesh& mesh, const Face& face);

/// Signed enclosed volume via the divergence theorem; positive for closed
/// meshes with outward-facing winding.
double signed_volume(const Mesh& mesh);

/// Sum of face sizes.
std::size_t face_corner_count(const Mesh& mesh);

}  // namespace synthforge
