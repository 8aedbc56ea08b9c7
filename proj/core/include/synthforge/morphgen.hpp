#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "synthforge/geometry.hpp"
#include "synthforge/parallel.hpp"

namespace synthforge {

/// Gaussian-process deformation strengths. Kernels are squared exponential,
///   k(x, x') = magnitude * exp(-|x - x'|^2 / bandwidth),
/// with bandwidth in squared scene units.
struct GpDeformParams {
  double shape_magnitude = 50.0;
  double shape_bandwidth = 300.0;
  double albedo_magnitude = 0.05;
  double albedo_bandwidth = 0.2;
  /// Eigenpairs kept per kernel.
  int rank = 50;
  /// Meshes with more vertices are clustered down to at most this many
  /// control points before the kernels are built.
  std::size_t downsample_target = 2000;
  std::uint64_t seed = 0;
};

/// Throws ParameterError.
void validate(const GpDeformParams& params);

struct Downsampled {
  Mesh mesh;
  /// correspondence[i] is the output vertex that original vertex i joined.
  std::vector<std::uint32_t> correspondence;
};

/// Uniform-grid vertex clustering with the finest cubic grid whose occupied
/// cell count stays <= target. Cluster positions (and albedo) are member
/// means; faces that collapse below 3 distinct vertices are dropped. Meshes
/// already within the target pass through with an identity map.
Downsampled downsample(const Mesh& mesh, std::size_t target);

/// Top eigenpairs of a kernel matrix, eigenvalues descending and clamped at 0.
struct KernelBasis {
  std::size_t points = 0;
  std::vector<double> eigenvalues;
  /// Column-major points x eigenvalues.size().
  std::vector<double> eigenvectors;
  double trace = 0.0;

  std::size_t rank() const { return eigenvalues.size(); }
  double eigenvector(std::size_t point, std::size_t k) const { return eigenvectors[k * points + point]; }
  /// Sum of kept eigenvalues over the trace.
  double captured_variance() const;
  /// Marginal variance of the truncated process at one point.
  double truncated_variance(std::size_t point) const;
};

/// Throws NumericError on non-finite kernel entries or solver failure.
KernelBasis kernel_basis(std::span<const Vec3> points, double magnitude, double bandwidth, int rank);

struct GpBasis {
  KernelBasis shape;
  KernelBasis albedo;
};

GpBasis build_gp_basis(std::span<const Vec3> control_points, const GpDeformParams& params);

/// One GP draw of displacements and albedo offsets on the control points.
struct DeformationField {
  std::vector<Vec3> control_points;
  std::vector<Vec3> displacement;
  std::vector<Rgb> albedo_offset;
};

/// Draws from the (params.seed, variant_index) stream, three independent
/// shape dimensions then three albedo dimensions.
DeformationField sample_deformation(const GpBasis& basis, std::span<const Vec3> control_points,
                                    const GpDeformParams& params, std::uint64_t variant_index);
/// Convenience overload that builds the basis first. Needs >= 4 points.
DeformationField sample_deformation(std::span<const Vec3> control_points, const GpDeformParams& params,
                                    std::uint64_t variant_index);

/// Moves each vertex by its control point's displacement and sets
/// albedo = clamp(base + offset, 0, 1), base defaulting to mid-gray.
/// Throws ContractViolation if the correspondence does not cover the mesh.
Mesh apply_deformation(const Mesh& mesh, const DeformationField& field,
                       std::span<const std::uint32_t> correspondence);

struct MorphClass {
  std::size_t class_index = 0;
  std::size_t base_index = 0;
  std::size_t variant_index = 0;
  std::size_t control_points = 0;
  Mesh mesh;
};

/// The classes derived from one base mesh: base_index * variants_per_base + j
/// for j in [0, variants_per_base).
std::vector<MorphClass> generate_morph_classes(const Mesh& base, std::size_t base_index, const GpDeformParams& params,
                                               std::size_t variants_per_base);

/// bases.size() * variants_per_base classes; class i * variants_per_base + j
/// deforms base i with draw j. Work is split per base mesh.
std::vector<MorphClass> generate_morph_db(const std::vector<Mesh>& bases, const GpDeformParams& params,
                                          std::size_t variants_per_base, const WorkerPool& pool = WorkerPool{});

void to_json(nlohmann::json& j, const GpDeformParams& params);
void from_json(const nlohmann::json& j, GpDeformParams& params);

}  // namespace synthforge
