#include "synthforge/morphgen.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "synthforge/errors.hpp"
#include "synthforge/rng.hpp"

namespace synthforge {

namespace {

struct GridLayout {
  Vec3 origin;
  double cell = 0.0;
  std::uint64_t nx = 1, ny = 1, nz = 1;
};

GridLayout make_grid(const Aabb& box, std::uint64_t divisions) {
  GridLayout grid;
  grid.origin = box.min;
  const double extent = box.max_extent();
  if (extent <= 0.0) return grid;
  grid.cell = extent / static_cast<double>(divisions);
  const Vec3 e = box.extents();
  const auto cells = [&](double len) {
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(len / grid.cell)));
  };
  grid.nx = std::min(cells(e.x), divisions);
  grid.ny = std::min(cells(e.y), divisions);
  grid.nz = std::min(cells(e.z), divisions);
  return grid;
}

std::uint64_t cell_key(const GridLayout& grid, const Vec3& p) {
  if (grid.cell <= 0.0) return 0;
  const auto axis = [&](double v, double o, std::uint64_t n) {
    const double t = std::floor((v - o) / grid.cell);
    if (t <= 0.0) return std::uint64_t{0};
    return std::min(static_cast<std::uint64_t>(t), n - 1);
  };
  const std::uint64_t ix = axis(p.x, grid.origin.x, grid.nx);
  const std::uint64_t iy = axis(p.y, grid.origin.y, grid.ny);
  const std::uint64_t iz = axis(p.z, grid.origin.z, grid.nz);
  return ix + grid.nx * (iy + grid.ny * iz);
}

// Cluster index per vertex, clusters numbered by first occurrence.
std::vector<std::uint32_t> cluster(const Mesh& mesh, const GridLayout& grid, std::size_t& clusters) {
  std::unordered_map<std::uint64_t, std::uint32_t> ids;
  ids.reserve(mesh.vertices.size());
  std::vector<std::uint32_t> assignment(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    auto [it, inserted] = ids.try_emplace(cell_key(grid, mesh.vertices[i]), static_cast<std::uint32_t>(ids.size()));
    assignment[i] = it->second;
  }
  clusters = ids.size();
  return assignment;
}

std::size_t occupied_cells(const Mesh& mesh, const Aabb& box, std::uint64_t divisions) {
  std::size_t count = 0;
  cluster(mesh, make_grid(box, divisions), count);
  return count;
}

void require(bool ok, const char* what) {
  if (!ok) throw ParameterError(what);
}

std::vector<double> draw_dimension(const KernelBasis& basis, RngStream& rng) {
  std::vector<double> values(basis.points, 0.0);
  for (std::size_t k = 0; k < basis.rank(); ++k) {
    const double coeff = std::sqrt(basis.eigenvalues[k]) * rng.normal();
    const double* column = basis.eigenvectors.data() + k * basis.points;
    for (std::size_t i = 0; i < basis.points; ++i) values[i] += coeff * column[i];
  }
  return values;
}

}  // namespace

void validate(const GpDeformParams& p) {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  require(positive(p.shape_magnitude) && positive(p.shape_bandwidth), "shape kernel parameters must be > 0");
  require(positive(p.albedo_magnitude) && positive(p.albedo_bandwidth), "albedo kernel parameters must be > 0");
  require(p.rank >= 1, "rank must be >= 1");
  require(p.downsample_target >= 4, "downsample_target must be >= 4");
}

Downsampled downsample(const Mesh& mesh, std::size_t target) {
  require(!mesh.empty(), "cannot downsample an empty mesh");
  require(target >= 4, "downsample target must be >= 4");
  Downsampled out;
  if (mesh.vertices.size() <= target) {
    out.mesh = mesh;
    out.correspondence.resize(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) out.correspondence[i] = static_cast<std::uint32_t>(i);
    return out;
  }

  const Aabb box = bounding_box(mesh);
  // floor(cbrt(target)) divisions can never exceed the target; search upward
  // for the finest grid that still fits, keeping only feasible lows.
  std::uint64_t lo = 1;
  while ((lo + 1) * (lo + 1) * (lo + 1) <= target) ++lo;
  std::uint64_t hi = 1u << 16;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if (occupied_cells(mesh, box, mid) <= target) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }

  std::size_t clusters = 0;
  out.correspondence = cluster(mesh, make_grid(box, lo), clusters);
  std::vector<Vec3> sums(clusters);
  std::vector<Rgb> color_sums(mesh.albedo ? clusters : 0);
  std::vector<std::size_t> counts(clusters, 0);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const std::uint32_t c = out.correspondence[i];
    sums[c] += mesh.vertices[i];
    if (mesh.albedo) color_sums[c] += (*mesh.albedo)[i];
    ++counts[c];
  }
  out.mesh.vertices.resize(clusters);
  for (std::size_t c = 0; c < clusters; ++c) out.mesh.vertices[c] = sums[c] / static_cast<double>(counts[c]);
  if (mesh.albedo) {
    out.mesh.albedo.emplace(clusters);
    for (std::size_t c = 0; c < clusters; ++c) {
      (*out.mesh.albedo)[c] = color_sums[c] / static_cast<double>(counts[c]);
    }
  }
  for (const Face& face : mesh.faces) {
    Face mapped;
    for (std::uint32_t v : face) {
      const std::uint32_t c = out.correspondence[v];
      if (mapped.empty() || mapped.back() != c) mapped.push_back(c);
    }
    while (mapped.size() > 1 && mapped.front() == mapped.back()) mapped.pop_back();
    Face sorted = mapped;
    std::sort(sorted.begin(), sorted.end());
    if (std::unique(sorted.begin(), sorted.end()) - sorted.begin() >= 3) out.mesh.faces.push_back(std::move(mapped));
  }
  return out;
}

double KernelBasis::captured_variance() const {
  if (trace <= 0.0) return 0.0;
  double kept = 0.0;
  for (double l : eigenvalues) kept += l;
  return kept / trace;
}

double KernelBasis::truncated_variance(std::size_t point) const {
  double v = 0.0;
  for (std::size_t k = 0; k < rank(); ++k) {
    const double u = eigenvector(point, k);
    v += eigenvalues[k] * u * u;
  }
  return v;
}

KernelBasis kernel_basis(std::span<const Vec3> points, double magnitude, double bandwidth, int rank) {
  require(!points.empty(), "kernel basis needs at least one point");
  require(rank >= 1, "rank must be >= 1");
  const std::size_t n = points.size();
  const std::size_t k = std::min(static_cast<std::size_t>(rank), n);

  std::vector<double> matrix(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = j; i < n; ++i) {
      const double value = magnitude * std::exp(-length_squared(points[i] - points[j]) / bandwidth);
      if (!std::isfinite(value)) throw NumericError("non-finite kernel entry");
      matrix[j * n + i] = value;
      matrix[i * n + j] = value;
    }
  }

  KernelBasis basis;
  basis.points = n;
  basis.trace = magnitude * static_cast<double>(n);

  std::vector<double> values(n);
  std::vector<double> vectors(n * k);
  std::vector<lapack_int> support(2 * k);
  lapack_int found = 0;
  const auto nn = static_cast<lapack_int>(n);
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', nn, matrix.data(), nn, 0.0, 0.0,
                                         nn - static_cast<lapack_int>(k) + 1, nn, 0.0, &found, values.data(),
                                         vectors.data(), nn, support.data());
  if (info != 0 || found != static_cast<lapack_int>(k)) {
    throw NumericError("kernel eigendecomposition failed (info " + std::to_string(info) + ")");
  }

  // LAPACK returns ascending order; store descending.
  basis.eigenvalues.resize(k);
  basis.eigenvectors.resize(n * k);
  for (std::size_t col = 0; col < k; ++col) {
    const std::size_t src = k - 1 - col;
    basis.eigenvalues[col] = std::max(0.0, values[src]);
    double* v = basis.eigenvectors.data() + col * n;
    std::copy_n(vectors.data() + src * n, n, v);
    // Fix the sign so the largest-magnitude entry is positive.
    const auto peak = std::max_element(v, v + n, [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (*peak < 0.0) std::transform(v, v + n, v, std::negate<>());
  }
  return basis;
}

GpBasis build_gp_basis(std::span<const Vec3> control_points, const GpDeformParams& params) {
  validate(params);
  require(control_points.size() >= 4, "GP deformation needs at least 4 control points");
  return {kernel_basis(control_points, params.shape_magnitude, params.shape_bandwidth, params.rank),
          kernel_basis(control_points, params.albedo_magnitude, params.albedo_bandwidth, params.rank)};
}

DeformationField sample_deformation(const GpBasis& basis, std::span<const Vec3> control_points,
                                    const GpDeformParams& params, std::uint64_t variant_index) {
  require(basis.shape.points == control_points.size() && basis.albedo.points == control_points.size(),
          "basis does not match the control points");
  RngStream rng(params.seed, variant_index);
  const std::size_t n = control_points.size();
  DeformationField field;
  field.control_points.assign(control_points.begin(), control_points.end());
  field.displacement.resize(n);
  field.albedo_offset.resize(n);
  for (int d = 0; d < 3; ++d) {
    const auto values = draw_dimension(basis.shape, rng);
    for (std::size_t i = 0; i < n; ++i) field.displacement[i][d] = values[i];
  }
  const auto r = draw_dimension(basis.albedo, rng);
  const auto g = draw_dimension(basis.albedo, rng);
  const auto b = draw_dimension(basis.albedo, rng);
  for (std::size_t i = 0; i < n; ++i) field.albedo_offset[i] = {r[i], g[i], b[i]};
  for (const Vec3& d : field.displacement) {
    if (!is_finite(d)) throw NumericError("non-finite displacement sample");
  }
  return field;
}

DeformationField sample_deformation(std::span<const Vec3> control_points, const GpDeformParams& params,
                                    std::uint64_t variant_index) {
  return sample_deformation(build_gp_basis(control_points, params), control_points, params, variant_index);
}

Mesh apply_deformation(const Mesh& mesh, const DeformationField& field,
                       std::span<const std::uint32_t> correspondence) {
  if (correspondence.size() != mesh.vertices.size()) {
    throw ContractViolation("correspondence does not cover every mesh vertex");
  }
  const std::size_t controls = field.displacement.size();
  if (field.albedo_offset.size() != controls) throw ContractViolation("deformation field length mismatch");
  Mesh out;
  out.faces = mesh.faces;
  out.vertices.resize(mesh.vertices.size());
  out.albedo.emplace(mesh.vertices.size());
  const Rgb mid_gray{0.5, 0.5, 0.5};
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const std::uint32_t c = correspondence[i];
    if (c >= controls) throw ContractViolation("vertex " + std::to_string(i) + " maps to a missing control point");
    out.vertices[i] = mesh.vertices[i] + field.displacement[c];
    const Rgb base = mesh.albedo ? (*mesh.albedo)[i] : mid_gray;
    const Rgb& off = field.albedo_offset[c];
    (*out.albedo)[i] = {std::clamp(base.r + off.r, 0.0, 1.0), std::clamp(base.g + off.g, 0.0, 1.0),
                        std::clamp(base.b + off.b, 0.0, 1.0)};
  }
  return out;
}

std::vector<MorphClass> generate_morph_classes(const Mesh& base, std::size_t base_index, const GpDeformParams& params,
                                               std::size_t variants_per_base) {
  validate(params);
  require(variants_per_base >= 1, "variants_per_base must be >= 1");
  const Downsampled control = downsample(base, params.downsample_target);
  const GpBasis basis = build_gp_basis(control.mesh.vertices, params);
  std::vector<MorphClass> classes;
  for (std::size_t j = 0; j < variants_per_base; ++j) {
    const std::size_t class_index = base_index * variants_per_base + j;
    const DeformationField field = sample_deformation(basis, control.mesh.vertices, params, class_index);
    classes.push_back({class_index, base_index, j, control.mesh.vertices.size(),
                       apply_deformation(base, field, control.correspondence)});
  }
  return classes;
}

std::vector<MorphClass> generate_morph_db(const std::vector<Mesh>& bases, const GpDeformParams& params,
                                          std::size_t variants_per_base, const WorkerPool& pool) {
  validate(params);
  require(!bases.empty(), "generate_morph_db needs at least one base mesh");
  require(variants_per_base >= 1, "variants_per_base must be >= 1");

  auto per_base = pool.map(bases.size(), [&](std::size_t i) {
    return generate_morph_classes(bases[i], i, params, variants_per_base);
  });

  std::vector<MorphClass> out;
  out.reserve(bases.size() * variants_per_base);
  for (auto& group : per_base) {
    for (auto& c : group) out.push_back(std::move(c));
  }
  return out;
}

void to_json(nlohmann::json& j, const GpDeformParams& p) {
  j = {{"b_s", p.shape_magnitude},  {"c_s", p.shape_bandwidth},
       {"b_a", p.albedo_magnitude}, {"c_a", p.albedo_bandwidth},
       {"rank", p.rank},            {"downsample_target", p.downsample_target},
       {"seed", p.seed}};
}

void from_json(const nlohmann::json& j, GpDeformParams& p) {
  p.shape_magnitude = j.value("b_s", p.shape_magnitude);
  p.shape_bandwidth = j.value("c_s", p.shape_bandwidth);
  p.albedo_magnitude = j.value("b_a", p.albedo_magnitude);
  p.albedo_bandwidth = j.value("c_a", p.albedo_bandwidth);
  p.rank = j.value("rank", p.rank);
  p.downsample_target = j.value("downsample_target", p.downsample_target);
  p.seed = j.value("seed", p.seed);
}

}  // namespace synthforge
