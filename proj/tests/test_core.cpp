#include "plume/core/cube_io.hpp"
#include "plume/core/error.hpp"
#include "plume/core/morphology.hpp"
#include "plume/core/planck.hpp"
#include "plume/core/stats.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace plume;

TEST(Planck, MatchesSiConstantValues) {
  // Reference values from 2hc^2 / lambda^5 / (exp(hc / lambda k T) - 1)
  // with the exact SI h, c and k, converted to per-micrometer.
  EXPECT_NEAR(planck_radiance(10.0, 300.0), 9.92403333007, 1e-6 * 9.924);
  EXPECT_NEAR(planck_radiance(8.0, 280.0), 5.91100733443, 1e-6 * 5.911);
  EXPECT_NEAR(planck_radiance(12.0, 320.0), 11.565628286, 1e-6 * 11.57);
  EXPECT_NEAR(planck_radiance(7.56, 250.0), 2.384697809, 1e-6 * 2.385);
}

TEST(Planck, IncreasesWithTemperature) {
  for (double l : {7.6, 9.0, 11.0, 13.0}) {
    EXPECT_LT(planck_radiance(l, 290.0), planck_radiance(l, 291.0));
  }
}

TEST(Planck, RejectsNonPositiveInputs) {
  EXPECT_THROW(planck_radiance(0.0, 300.0), DomainError);
  EXPECT_THROW(planck_radiance(10.0, -1.0), DomainError);
  EXPECT_THROW(planck_radiance(10.0, 0.0), DomainError);
}

TEST(Planck, SpectrumFollowsGrid) {
  const auto g = SpectralGrid::uniform(8.0, 12.0, 5);
  const Spectrum s = planck_spectrum(g, 300.0);
  ASSERT_EQ(s.size(), 5);
  EXPECT_DOUBLE_EQ(s[2], planck_radiance(10.0, 300.0));
}

TEST(SpectralGrid, UniformEndpointsAndValidation) {
  const auto g = SpectralGrid::uniform(7.5, 13.5, 7);
  EXPECT_EQ(g.band_count(), 7);
  EXPECT_DOUBLE_EQ(g[0], 7.5);
  EXPECT_DOUBLE_EQ(g[6], 13.5);
  EXPECT_DOUBLE_EQ(g[3], 10.5);
  EXPECT_THROW(SpectralGrid({10.0, 9.0}), DomainError);
  EXPECT_THROW(SpectralGrid({9.0, 9.0}), DomainError);
}

TEST(RadianceCube, LayoutIsRowColBand) {
  RadianceCube c(2, 3, SpectralGrid::uniform(8, 9, 2));
  c.at(1, 2, 1) = 7.0;
  EXPECT_EQ(c.data()[(1 * 3 + 2) * 2 + 1], 7.0);
  EXPECT_EQ(c.spectrum(1, 2)[1], 7.0);
  const std::vector<int> idx{5, 0};
  const RowMatrix g = c.gather(idx);
  EXPECT_EQ(g(0, 1), 7.0);
  EXPECT_EQ(g(1, 1), 0.0);
}

TEST(RadianceCube, RejectsWrongDataSize) {
  EXPECT_THROW(RadianceCube(2, 2, SpectralGrid::uniform(8, 9, 3), std::vector<double>(11)), DomainError);
}

TEST(PixelMask, SetAlgebra) {
  const auto a = test::box_mask(4, 4, 0, 0, 2, 2);
  const auto b = test::box_mask(4, 4, 1, 1, 3, 3);
  EXPECT_EQ((a | b).count(), 7);
  EXPECT_EQ((a & b).count(), 1);
  EXPECT_EQ((a - b).count(), 3);
  EXPECT_EQ((~a).count(), 12);
  EXPECT_TRUE((a & b).is_subset_of(a));
  EXPECT_TRUE(a.intersects(b));
  EXPECT_EQ(a.indices(), (std::vector<int>{0, 1, 4, 5}));
}

TEST(Morphology, DilationUsesSquareElementWithoutWrap) {
  PixelMask m(5, 5);
  m.set(0, 0);
  const auto d = dilate(m, 1);
  EXPECT_EQ(d.count(), 4);
  EXPECT_TRUE(d.test(1, 1));
  EXPECT_FALSE(d.test(4, 4));
  PixelMask c(9, 9);
  c.set(4, 4);
  EXPECT_EQ(dilate(c, 2).count(), 25);
  EXPECT_EQ(dilate(c, 0), c);
}

TEST(Morphology, GuardrailIsFourStepRing) {
  PixelMask roi(20, 20);
  roi.set(10, 10);
  const auto g = make_guardrail(roi);
  EXPECT_EQ(g.count(), 81 - 1);
  EXPECT_FALSE(g.test(10, 10));
  EXPECT_FALSE(g.intersects(roi));
  EXPECT_EQ(background_pool(roi, g).count(), 400 - 81);
}

TEST(Morphology, GuardrailErrors) {
  EXPECT_THROW(make_guardrail(PixelMask(5, 5)), DomainError);
  PixelMask full = test::box_mask(5, 5, 1, 1, 4, 4);
  EXPECT_THROW(make_guardrail(full), DomainError);
}

TEST(Morphology, ComponentsFourVersusEight) {
  PixelMask m(3, 3);
  m.set(0, 0);
  m.set(1, 1);
  m.set(2, 2);
  m.set(0, 2);
  const auto four = connected_components(m, Connectivity::Four);
  const auto eight = connected_components(m, Connectivity::Eight);
  EXPECT_EQ(four.count, 4);
  EXPECT_EQ(eight.count, 1);
  EXPECT_EQ(four.labels[0], 0);
  EXPECT_EQ(four.labels[2], 1);  // labels follow first pixel in row-major order
  EXPECT_EQ(four.labels[1], -1);
}

TEST(Stats, MedianMeanStd) {
  EXPECT_DOUBLE_EQ(median({1.0, 3.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({5.0, 1.0, 3.0}), 3.0);
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(mean(v), 5.0);
  EXPECT_DOUBLE_EQ(stddev(v), 2.0);
  EXPECT_DOUBLE_EQ(stddev(std::vector<double>{3.0}), 0.0);
  EXPECT_DOUBLE_EQ(quantile({0.0, 10.0}, 0.25), 2.5);
  EXPECT_THROW(median({}), DomainError);
}

TEST(Stats, MeanSpectrumOfMask) {
  auto cube = test::constant_cube(3, 3, 4, 2.0);
  cube.at(0, 0, 0) = 5.0;
  PixelMask m(3, 3);
  m.set(0, 0);
  m.set(2, 2);
  const Spectrum mu = mean_spectrum(cube, m);
  EXPECT_DOUBLE_EQ(mu[0], 3.5);
  EXPECT_DOUBLE_EQ(mu[3], 2.0);
  EXPECT_THROW(mean_spectrum(cube, PixelMask(3, 3)), DomainError);
}

TEST(Random, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(make_rng(3, 4)(), make_rng(3, 4)());
}

class CubeIo : public ::testing::Test {
 protected:
  std::filesystem::path dir = test::scratch_dir("cube_io");
};

TEST_F(CubeIo, CubeRoundTripAtFloatPrecision) {
  const auto cube = test::gaussian_cube(4, 5, 3, 11);
  write_cube(cube, dir / "c.hsi");
  const auto back = read_cube(dir / "c.hsi");
  ASSERT_EQ(back.height(), 4);
  ASSERT_EQ(back.width(), 5);
  ASSERT_EQ(back.grid(), cube.grid());
  for (std::size_t i = 0; i < cube.data().size(); ++i) {
    EXPECT_EQ(back.data()[i], static_cast<double>(static_cast<float>(cube.data()[i])));
  }
}

TEST_F(CubeIo, MaskMapAndLabelRoundTrip) {
  const auto m = test::box_mask(4, 4, 1, 1, 3, 4);
  write_mask(m, dir / "m.mask");
  EXPECT_EQ(read_mask(dir / "m.mask"), m);

  ScalarMap s(2, 3);
  s.values = {0.5, -1.0, 2.0, 0.0, 3.25, 1e-3};
  write_scalar_map(s, dir / "s.map");
  const auto s2 = read_scalar_map(dir / "s.map");
  for (int i = 0; i < 6; ++i) EXPECT_FLOAT_EQ(static_cast<float>(s2.values[i]), static_cast<float>(s.values[i]));

  LabelImage l{2, 2, {0, 1, -1, 7}};
  write_labels(l, dir / "l.lbl");
  EXPECT_EQ(read_labels(dir / "l.lbl").labels, l.labels);
}

TEST_F(CubeIo, TruncatedPayload) {
  write_cube(test::gaussian_cube(4, 4, 3, 1), dir / "c.hsi");
  const auto size = std::filesystem::file_size(dir / "c.hsi");
  std::filesystem::resize_file(dir / "c.hsi", size - 5);
  try {
    read_cube(dir / "c.hsi");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::TruncatedPayload);
  }
}

TEST_F(CubeIo, BadHeaders) {
  auto expect_kind = [&](const std::string& header, ParseError::Kind kind) {
    std::ofstream(dir / "h.hsi", std::ios::binary) << header << '\n';
    try {
      read_cube(dir / "h.hsi");
      ADD_FAILURE() << "no error for " << header;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.kind(), kind) << header;
    }
  };
  expect_kind("not json", ParseError::Kind::MalformedHeader);
  expect_kind(R"({"magic":"nope"})", ParseError::Kind::MalformedHeader);
  const std::string m = std::string(R"({"magic":")") + kCubeMagic + "\",";
  expect_kind(m + R"("height":1,"width":1,"band_count":2,"wavelengths":[8],"dtype":"f32","byte_order":"little"})",
              ParseError::Kind::DimensionMismatch);
  expect_kind(m + R"("height":1,"width":1,"band_count":1,"wavelengths":[8],"dtype":"f64","byte_order":"little"})",
              ParseError::Kind::MalformedHeader);
  expect_kind(m + R"("height":0,"width":1,"band_count":1,"wavelengths":[8],"dtype":"f32","byte_order":"little"})",
              ParseError::Kind::MalformedHeader);
}

TEST_F(CubeIo, MissingFileIsIoError) { EXPECT_THROW(read_cube(dir / "absent.hsi"), IoError); }
