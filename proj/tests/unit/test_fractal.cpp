#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "synthforge/errors.hpp"
#include "synthforge/fractal2d.hpp"

using namespace synthforge;
using synthforge::testing::kSierpinskiFill256;
using synthforge::testing::sierpinski;

TEST(Fractal, SierpinskiOracleIsStable) {
  EXPECT_DOUBLE_EQ(synthforge::testing::sierpinski_enumeration_fill(12, 256), kSierpinskiFill256);
}

TEST(Fractal, SierpinskiFillMatchesOracle) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    RngStream rng(seed, 0);
    const FractalImage img = chaos_game(sierpinski(), 100000, 256, rng);
    EXPECT_NEAR(img.fill_rate, kSierpinskiFill256, 0.05) << seed;
    EXPECT_GE(img.fill_rate, 0.05);
    EXPECT_LE(img.fill_rate, 0.35);
  }
}

TEST(Fractal, FillRateAgreesWithPixels) {
  RngStream rng(4, 0);
  const FractalImage img = chaos_game(sierpinski(), 20000, 128, rng);
  std::size_t lit = 0;
  for (std::uint8_t v : img.image.pixels) {
    EXPECT_TRUE(v == 0 || v == 255);
    lit += v != 0;
  }
  EXPECT_EQ(img.image.width, 128);
  EXPECT_EQ(img.image.channels, 1);
  EXPECT_DOUBLE_EQ(img.fill_rate, static_cast<double>(lit) / (128.0 * 128.0));
}

TEST(Fractal, CollapsedSystemLightsOnePixel) {
  IfsSystem s;
  s.maps = {{{0.0, 0.0, 0.0, 0.0}, {0.0, 0.0}}, {{0.0, 0.0, 0.0, 0.0}, {0.0, 0.0}}};
  s.weights = {0.5, 0.5};
  RngStream rng(1, 0);
  EXPECT_DOUBLE_EQ(chaos_game(s, 10000, 256, rng).fill_rate, 1.0 / (256.0 * 256.0));
}

TEST(Fractal, DoubledTranslationsGiveSameImage) {
  IfsSystem a = sierpinski();
  IfsSystem b = a;
  for (auto& m : b.maps) {
    for (double& t : m.translation) t *= 2.0;
  }
  RngStream ra(3, 1);
  RngStream rb(3, 1);
  EXPECT_EQ(chaos_game(a, 50000, 128, ra).image, chaos_game(b, 50000, 128, rb).image);
}

TEST(Fractal, DivergentSystemIsReported) {
  IfsSystem s;
  s.maps = {{{2.0, 0.0, 0.0, 2.0}, {1.0, 0.0}}, {{2.0, 0.0, 0.0, 2.0}, {0.0, 1.0}}};
  s.weights = {0.5, 0.5};
  RngStream rng(1, 0);
  EXPECT_THROW(chaos_game(s, 10000, 64, rng), DivergenceError);
}

TEST(Fractal, AcceptanceThreshold) {
  FractalImage img;
  img.fill_rate = 0.25;
  EXPECT_TRUE(accept_system(img, 0.2));
  img.fill_rate = 0.05;
  EXPECT_FALSE(accept_system(img, 0.2));
  img.fill_rate = 0.2;
  EXPECT_TRUE(accept_system(img, 0.2));
}

TEST(Fractal, AcceptanceIsMonotoneOverSampledSystems) {
  RngStream rng(2024, 0);
  std::size_t rendered = 0;
  for (int i = 0; i < 500; ++i) {
    const IfsSystem s = sample_ifs(rng);
    ASSERT_NO_THROW(validate(s));
    RngStream orbit = rng.child(static_cast<std::uint64_t>(i));
    FractalImage img;
    try {
      img = chaos_game(s, 5000, 64, orbit);
    } catch (const DivergenceError&) {
      continue;
    }
    ++rendered;
    // Walking the threshold down, nothing accepted is rejected again.
    bool accepted = false;
    for (int k = 100; k >= 0; --k) {
      const bool ok = accept_system(img, k / 100.0);
      if (accepted) {
        EXPECT_TRUE(ok) << i << " " << k;
      }
      accepted = accepted || ok;
    }
    EXPECT_TRUE(accepted);
  }
  EXPECT_GT(rendered, 100u);
}

TEST(Fractal, SampledSystemsAreWellFormed) {
  RngStream rng(5, 0);
  for (int i = 0; i < 200; ++i) {
    const IfsSystem s = sample_ifs(rng);
    EXPECT_GE(s.maps.size(), 2u);
    EXPECT_LE(s.maps.size(), 8u);
    double total = 0.0;
    for (const auto& m : s.maps) total += std::max(std::abs(m.determinant()), 0.01);
    for (std::size_t k = 0; k < s.maps.size(); ++k) {
      for (double v : s.maps[k].matrix) EXPECT_LE(std::abs(v), 1.0);
      EXPECT_NEAR(s.weights[k], std::max(std::abs(s.maps[k].determinant()), 0.01) / total, 1e-12);
    }
  }
}

TEST(Fractal, GenerationIsDeterministic) {
  FractalGenConfig c;
  c.classes = 3;
  c.images_per_class = 3;
  c.seed = 17;
  c.augment.points = 20000;
  c.augment.resolution = 64;
  c.min_fill = 0.1;
  const FractalClass a = generate_fractal_class(c, 1);
  const FractalClass b = generate_fractal_class(c, 1);
  EXPECT_EQ(a.system, b.system);
  EXPECT_EQ(a.attempt, b.attempt);
  ASSERT_EQ(a.images.size(), 3u);
  for (std::size_t i = 0; i < a.images.size(); ++i) EXPECT_EQ(a.images[i].image, b.images[i].image);
  EXPECT_GE(a.fill_rate, c.min_fill);
  EXPECT_NE(generate_fractal_class(c, 2).system, a.system);
}

TEST(Fractal, JsonRoundTrip) {
  const IfsSystem s = sierpinski();
  EXPECT_EQ(nlohmann::json(s).get<IfsSystem>(), s);
  FractalGenConfig c;
  c.min_fill = 0.15;
  c.augment.points = 1234;
  EXPECT_EQ(nlohmann::json(nlohmann::json(c).get<FractalGenConfig>()), nlohmann::json(c));
}

TEST(Fractal, RejectsInvalidSystems) {
  IfsSystem s = sierpinski();
  s.weights = {0.5, 0.5, 0.5};
  EXPECT_THROW(validate(s), ParameterError);
  s.maps.resize(1);
  s.weights = {1.0};
  EXPECT_THROW(validate(s), ParameterError);
  RngStream rng(0, 0);
  EXPECT_THROW(chaos_game(sierpinski(), 10, 64, rng), ParameterError);
}
