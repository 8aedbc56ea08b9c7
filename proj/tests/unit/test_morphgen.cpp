#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

#include "support.hpp"
#include "synthforge/errors.hpp"
#include "synthforge/morphgen.hpp"

using namespace synthforge;
using synthforge::testing::gp_monte_carlo;
using synthforge::testing::random_cloud;

namespace {

GpDeformParams params_with_rank(int rank) {
  GpDeformParams p;
  p.rank = rank;
  p.seed = 11;
  return p;
}

Mesh dense_sphere() {
  PrimitiveSpec s;
  s.kind = PrimitiveKind::sphere;
  s.size_a = 5.0;
  s.size_b = 5.0;
  s.radial_segments = 120;
  s.axial_segments = 90;
  return make_primitive(s);
}

Mesh small_box() {
  PrimitiveSpec s;
  s.kind = PrimitiveKind::cube;
  s.size_a = 4.0;
  s.size_b = 4.0;
  s.radial_segments = 3;
  s.axial_segments = 3;
  return make_primitive(s);
}

}  // namespace

TEST(KernelBasis, MatchesDenseEigenSolver) {
  const auto pts = random_cloud(80, 30.0, 5);
  const double b = 50.0;
  const double c = 300.0;
  const int rank = 20;
  const KernelBasis basis = kernel_basis(pts, b, c, rank);

  Eigen::MatrixXd k(pts.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) k(i, j) = b * std::exp(-length_squared(pts[i] - pts[j]) / c);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k);
  ASSERT_EQ(solver.info(), Eigen::Success);
  const Eigen::VectorXd values = solver.eigenvalues().reverse();
  const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();

  ASSERT_EQ(basis.rank(), static_cast<std::size_t>(rank));
  for (int r = 0; r < rank; ++r) EXPECT_NEAR(basis.eigenvalues[r], values(r), 1e-8 * values(0)) << r;
  EXPECT_NEAR(basis.trace, k.trace(), 1e-9);
  EXPECT_NEAR(basis.captured_variance(), values.head(rank).sum() / k.trace(), 1e-10);

  // The truncated diagonal is sign and rotation invariant within each kept eigenspace.
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double expected = 0.0;
    for (int r = 0; r < rank; ++r) expected += values(r) * vectors(i, r) * vectors(i, r);
    EXPECT_NEAR(basis.truncated_variance(i), expected, 1e-8 * b);
  }
}

TEST(KernelBasis, CapturedVarianceIsMonotoneInRank) {
  const auto pts = random_cloud(120, 40.0, 9);
  double previous = 0.0;
  for (int rank : {1, 2, 5, 10, 20, 50, 100, 120, 200}) {
    const double captured = kernel_basis(pts, 50.0, 300.0, rank).captured_variance();
    EXPECT_GE(captured, previous - 1e-12) << rank;
    EXPECT_LE(captured, 1.0 + 1e-9);
    previous = captured;
  }
  EXPECT_NEAR(previous, 1.0, 1e-9);
}

TEST(KernelBasis, RejectsNonFiniteKernel) {
  const auto pts = random_cloud(10, 1.0, 1);
  EXPECT_THROW(kernel_basis(pts, std::numeric_limits<double>::infinity(), 1.0, 5), NumericError);
}

TEST(GpDeformation, SampleVarianceMatchesTruncatedDiagonal) {
  const auto pts = random_cloud(200, 40.0, 21);
  const auto mc = gp_monte_carlo(pts, params_with_rank(50), 10000);
  EXPECT_LT(mc.max_variance_error, 0.05);
}

TEST(GpDeformation, CorrelationFollowsKernel) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 12; ++i) pts.push_back({3.5 * i, 0.0, 0.0});
  const auto mc = gp_monte_carlo(pts, params_with_rank(50), 10000);
  EXPECT_LT(mc.max_correlation_error, 0.05);
  EXPECT_LT(mc.max_variance_error, 0.05);
}

TEST(GpDeformation, FieldScalesWithSqrtMagnitude) {
  const auto pts = random_cloud(30, 20.0, 3);
  GpDeformParams a = params_with_rank(30);
  GpDeformParams b = a;
  b.shape_magnitude = a.shape_magnitude * 1e-6;
  const auto fa = sample_deformation(pts, a, 4);
  const auto fb = sample_deformation(pts, b, 4);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(fb.displacement[i][d], fa.displacement[i][d] * 1e-3, 1e-6);
  }
}

TEST(GpDeformation, Deterministic) {
  const auto pts = random_cloud(30, 20.0, 3);
  const auto p = params_with_rank(10);
  const auto a = sample_deformation(pts, p, 7);
  const auto b = sample_deformation(pts, p, 7);
  EXPECT_EQ(a.displacement, b.displacement);
  EXPECT_EQ(a.albedo_offset, b.albedo_offset);
  EXPECT_NE(sample_deformation(pts, p, 8).displacement, a.displacement);
}

TEST(GpDeformation, NeedsFourControlPoints) {
  const auto pts = random_cloud(3, 1.0, 1);
  EXPECT_THROW(sample_deformation(pts, params_with_rank(3), 0), ParameterError);
}

TEST(Downsample, RespectsTargetAndMapsEveryVertex) {
  const Mesh mesh = dense_sphere();
  ASSERT_GT(mesh.vertices.size(), 10000u);
  const Downsampled ds = downsample(mesh, 2000);
  EXPECT_LE(ds.mesh.vertices.size(), 2000u);
  EXPECT_GT(ds.mesh.vertices.size(), 100u);
  ASSERT_EQ(ds.correspondence.size(), mesh.vertices.size());
  for (auto c : ds.correspondence) EXPECT_LT(c, ds.mesh.vertices.size());
}

TEST(Downsample, SmallMeshPassesThrough) {
  const Mesh mesh = small_box();
  const Downsampled ds = downsample(mesh, 2000);
  EXPECT_EQ(ds.mesh, mesh);
  for (std::size_t i = 0; i < ds.correspondence.size(); ++i) EXPECT_EQ(ds.correspondence[i], i);
}

TEST(Downsample, ClusterMeansStayInsideInputBox) {
  const Mesh mesh = dense_sphere();
  const Downsampled ds = downsample(mesh, 500);
  const Aabb in = bounding_box(mesh);
  const Aabb out = bounding_box(ds.mesh);
  for (int d = 0; d < 3; ++d) {
    EXPECT_GE(out.min[d], in.min[d] - 1e-9);
    EXPECT_LE(out.max[d], in.max[d] + 1e-9);
  }
}

TEST(ApplyDeformation, ZeroFieldKeepsPositionsAndSetsMidGray) {
  const Mesh mesh = small_box();
  DeformationField field;
  field.displacement.assign(mesh.vertices.size(), Vec3{});
  field.albedo_offset.assign(mesh.vertices.size(), Rgb{});
  std::vector<std::uint32_t> identity(mesh.vertices.size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = static_cast<std::uint32_t>(i);
  const Mesh out = apply_deformation(mesh, field, identity);
  EXPECT_EQ(out.vertices, mesh.vertices);
  for (const Rgb& a : *out.albedo) EXPECT_EQ(a, (Rgb{0.5, 0.5, 0.5}));

  field.displacement.assign(mesh.vertices.size(), Vec3{2.0, 0.0, 0.0});
  field.albedo_offset.assign(mesh.vertices.size(), Rgb{-1.0, -1.0, -1.0});
  const Mesh moved = apply_deformation(mesh, field, identity);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    EXPECT_EQ(moved.vertices[i], (mesh.vertices[i] + Vec3{2.0, 0.0, 0.0}));
    EXPECT_EQ((*moved.albedo)[i], (Rgb{0.0, 0.0, 0.0}));
  }
}

TEST(ApplyDeformation, RejectsIncompleteCorrespondence) {
  const Mesh mesh = small_box();
  DeformationField field;
  field.displacement.assign(4, Vec3{});
  field.albedo_offset.assign(4, Rgb{});
  std::vector<std::uint32_t> short_map(mesh.vertices.size() - 1, 0);
  EXPECT_THROW(apply_deformation(mesh, field, short_map), ContractViolation);
  std::vector<std::uint32_t> bad(mesh.vertices.size(), 9);
  EXPECT_THROW(apply_deformation(mesh, field, bad), ContractViolation);
}

TEST(MorphDb, ClassLayoutAndAlbedo) {
  const std::vector<Mesh> bases{small_box(), dense_sphere()};
  GpDeformParams p = params_with_rank(20);
  p.downsample_target = 300;
  const auto db = generate_morph_db(bases, p, 3, WorkerPool(2));
  ASSERT_EQ(db.size(), 6u);
  for (std::size_t i = 0; i < db.size(); ++i) {
    EXPECT_EQ(db[i].class_index, i);
    EXPECT_EQ(db[i].base_index, i / 3);
    EXPECT_EQ(db[i].variant_index, i % 3);
    ASSERT_TRUE(db[i].mesh.albedo.has_value());
    for (const Rgb& a : *db[i].mesh.albedo) {
      for (double ch : {a.r, a.g, a.b}) {
        EXPECT_GE(ch, 0.0);
        EXPECT_LE(ch, 1.0);
      }
    }
  }
  const auto serial = generate_morph_db(bases, p, 3, WorkerPool(1));
  for (std::size_t i = 0; i < db.size(); ++i) EXPECT_EQ(serial[i].mesh, db[i].mesh);
}

TEST(MorphDb, SingleVariantMovesTheMesh) {
  const Mesh base = small_box();
  const auto db = generate_morph_db({base}, params_with_rank(10), 1);
  ASSERT_EQ(db.size(), 1u);
  double sq = 0.0;
  for (std::size_t i = 0; i < base.vertices.size(); ++i) sq += length_squared(db[0].mesh.vertices[i] - base.vertices[i]);
  EXPECT_GT(std::sqrt(sq / static_cast<double>(base.vertices.size())), 1e-3);
}

TEST(MorphDb, RejectsBadArguments) {
  EXPECT_THROW(generate_morph_db({small_box()}, params_with_rank(10), 0), ParameterError);
  EXPECT_THROW(generate_morph_db({}, params_with_rank(10), 1), ParameterError);
  GpDeformParams p = params_with_rank(10);
  p.shape_bandwidth = 0.0;
  EXPECT_THROW(validate(p), ParameterError);
}
