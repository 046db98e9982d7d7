#include "plume/core/error.hpp"
#include "plume/detect/whitening.hpp"
#include "plume/identify/identify.hpp"
#include "plume/sim/plume.hpp"
#include "plume/sim/scene.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>

using namespace plume;
using namespace plume::identify;

namespace {

Spectrum bump(int bands, int center, double width) {
  Spectrum s(bands);
  for (int b = 0; b < bands; ++b) s[b] = std::exp(-0.5 * std::pow((b - center) / width, 2));
  return s;
}

SpectralLibrary three_gas_library(int bands) {
  return SpectralLibrary({{"A", bump(bands, 3, 1.5)},
                          {"B", bump(bands, 10, 2.0)},
                          {"C", bump(bands, 16, 1.0) + 0.5 * bump(bands, 5, 1.0)},
                          {kNoneEntry, Spectrum::Zero(bands)}});
}

bg::BackgroundEstimate estimate_from(const std::vector<int>& pixels, const RowMatrix& backgrounds, int width) {
  bg::BackgroundEstimate e;
  e.roi_pixels = pixels;
  e.backgrounds = backgrounds;
  e.width = width;
  return e;
}

}  // namespace

TEST(Standardize, ZeroMeanUnitPopulationStd) {
  Spectrum x(4);
  x << 1, 2, 3, 4;
  const Spectrum z = standardize(x);
  // mean 2.5, population std sqrt(1.25)
  const double sd = std::sqrt(1.25);
  EXPECT_NEAR(z[0], -1.5 / sd, 1e-12);
  EXPECT_NEAR(z[3], 1.5 / sd, 1e-12);
  EXPECT_NEAR(z.mean(), 0.0, 1e-12);
  EXPECT_NEAR(z.squaredNorm() / 4.0, 1.0, 1e-12);
}

TEST(Standardize, AffineInvariantAndConstantMapsToZero) {
  const Spectrum x = test::gaussian_cube(1, 1, 12, 3).spectrum(0);
  const Spectrum y = (3.0 * x).array() - 7.0;
  EXPECT_LT((standardize(x) - standardize(y)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(standardize(Spectrum::Constant(6, 4.2)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(standardize(Spectrum::Ones(1)), DomainError);
}

TEST(Library, Validation) {
  EXPECT_THROW(SpectralLibrary({{kNoneEntry, Spectrum::Zero(3)}}), DomainError);
  EXPECT_THROW(SpectralLibrary({{"A", Spectrum::Ones(3)}, {"B", Spectrum::Ones(3)}}), DomainError);
  EXPECT_THROW(SpectralLibrary({{"A", Spectrum::Ones(3)}, {"A", Spectrum::Ones(3)}, {kNoneEntry, Spectrum::Zero(3)}}),
               DomainError);
  EXPECT_THROW(SpectralLibrary({{"A", Spectrum::Ones(4)}, {kNoneEntry, Spectrum::Zero(3)}}), DomainError);
  const auto lib = three_gas_library(20);
  EXPECT_EQ(lib.size(), 4);
  EXPECT_EQ(lib.index_of("B"), 1);
  EXPECT_THROW(lib.index_of("SF6"), DomainError);
}

TEST(Library, CsvRoundTripAndMalformedInput) {
  const auto dir = test::scratch_dir("library");
  const auto lib = three_gas_library(20);
  write_library(lib, dir / "lib.csv");
  const auto back = read_library(dir / "lib.csv");
  ASSERT_EQ(back.size(), lib.size());
  for (int i = 0; i < lib.size(); ++i) {
    EXPECT_EQ(back.entries()[i].name, lib.entries()[i].name);
    EXPECT_EQ(back.entries()[i].absorption, lib.entries()[i].absorption);
  }
  std::ofstream(dir / "bad.csv") << "name,b0,b1\nA,1,x\nNone,0,0\n";
  EXPECT_THROW(read_library(dir / "bad.csv"), ConfigError);
  std::ofstream(dir / "empty.csv");
  EXPECT_THROW(read_library(dir / "empty.csv"), ConfigError);
  EXPECT_THROW(read_library(dir / "missing.csv"), IoError);
}

class Identifier : public ::testing::Test {
 protected:
  static constexpr int kBands = 20;
  RadianceCube cube = test::correlated_cube(30, 30, kBands, 17);
  detect::WhiteningModel model = detect::WhiteningModel::fit(cube);
  SpectralLibrary lib = three_gas_library(kBands);
};

TEST_F(Identifier, SelfMatchIsCosineOneAndTop) {
  const auto refs = lib.whitened_refs(model);
  for (const char* gas : {"A", "B", "C"}) {
    const auto i = static_cast<std::size_t>(lib.index_of(gas));
    const auto r = identify::identify(refs[i], lib, model, 10.0, SignMode::Emission);
    EXPECT_NEAR(r.responses[i], 1.0, 1e-12);
    EXPECT_EQ(r.top, gas);
    // In absorption mode the same vector is the opposite of the reference.
    const auto a = identify::identify(Spectrum(-refs[i]), lib, model, 10.0, SignMode::Absorption);
    EXPECT_NEAR(a.responses[i], 1.0, 1e-12);
    EXPECT_EQ(a.top, gas);
  }
}

TEST_F(Identifier, ConfidencesFormADistribution) {
  const Spectrum sp = test::gaussian_cube(1, 1, kBands, 5, 0.0, 1.0).spectrum(0);
  const auto r = identify::identify(sp, lib, model);
  EXPECT_NEAR(std::accumulate(r.confidences.begin(), r.confidences.end(), 0.0), 1.0, 1e-12);
  EXPECT_EQ(r.responses[static_cast<std::size_t>(lib.index_of(kNoneEntry))], 0.0);
  for (double c : r.confidences) EXPECT_GT(c, 0.0);

  const auto flat = identify::identify(sp, lib, model, 0.0);
  for (double c : flat.confidences) EXPECT_NEAR(c, 0.25, 1e-15);
  EXPECT_THROW(identify::identify(sp, lib, model, -1.0), DomainError);
  EXPECT_THROW(identify::identify(Spectrum::Ones(3), lib, model), DomainError);
}

TEST_F(Identifier, ResponsesIgnoreSuperpixelScale) {
  const Spectrum sp = lib.whitened_refs(model)[1] + 0.3 * test::gaussian_cube(1, 1, kBands, 9, 0.0, 1.0).spectrum(0);
  const auto a = identify::identify(sp, lib, model, 10.0, SignMode::Emission);
  const auto b = identify::identify(Spectrum(250.0 * sp), lib, model, 10.0, SignMode::Emission);
  for (std::size_t i = 0; i < a.responses.size(); ++i) EXPECT_NEAR(a.responses[i], b.responses[i], 1e-12);
}

TEST_F(Identifier, ZeroSuperpixelRejects) {
  const auto r = identify::identify(Spectrum::Zero(kBands), lib, model);
  EXPECT_EQ(r.top, kNoneEntry);
  for (double resp : r.responses) EXPECT_EQ(resp, 0.0);
  const double none = r.confidence_of(kNoneEntry);
  for (double c : r.confidences) EXPECT_LE(c, none);
}

TEST_F(Identifier, TopCarriesTheLargestResponse) {
  // An emission-shaped signal scored in absorption mode points away from the
  // true gas; the argmax must still land on a non-negative response.
  const auto refs = lib.whitened_refs(model);
  const auto r = identify::identify(refs[0], lib, model, 10.0, SignMode::Absorption);
  const double best = *std::max_element(r.responses.begin(), r.responses.end());
  EXPECT_GE(best, 0.0);
  EXPECT_EQ(r.responses[static_cast<std::size_t>(lib.index_of(r.top))], best);
}

TEST_F(Identifier, SuperpixelSinglePixelAndGlobalLinearity) {
  const int p = 7 * 30 + 4;
  RowMatrix bgrow(1, kBands);
  bgrow.row(0) = cube.spectrum(p + 1).transpose();
  const auto one = whitened_superpixel(model, cube, estimate_from({p}, bgrow, 30));
  const Spectrum expect = model.inv_sqrt() * (cube.spectrum(p) - cube.spectrum(p + 1));
  EXPECT_LT((one - expect).cwiseAbs().maxCoeff(), 1e-10);

  // With the global mean as every background the superpixel is W (mean_roi - mu).
  const std::vector<int> roi{0, 1, 2, 31, 32};
  RowMatrix mu_rows(5, kBands);
  for (int i = 0; i < 5; ++i) mu_rows.row(i) = model.mean().transpose();
  Spectrum mean_roi = Spectrum::Zero(kBands);
  for (int q : roi) mean_roi += cube.spectrum(q);
  mean_roi /= 5.0;
  const auto sp = whitened_superpixel(model, cube, estimate_from(roi, mu_rows, 30));
  EXPECT_LT((sp - model.whiten(mean_roi)).cwiseAbs().maxCoeff(), 1e-10);

  RowMatrix self(1, kBands);
  self.row(0) = cube.spectrum(p).transpose();
  EXPECT_EQ(whitened_superpixel(model, cube, estimate_from({p}, self, 30)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(whitened_superpixel(model, cube, estimate_from({}, RowMatrix(0, kBands), 30)), DomainError);
}

TEST_F(Identifier, JsonSortsByConfidence) {
  auto r = identify::identify(Spectrum(-lib.whitened_refs(model)[2]), lib, model);
  r.method = "KNN";
  r.hyperparams = "k=3";
  const auto j = nlohmann::json::parse(to_json(r));
  EXPECT_EQ(j["top"], "C");
  EXPECT_EQ(j["method"], "KNN");
  ASSERT_TRUE(j.contains("confidences"));
  double prev = 2.0;
  for (const auto& e : j["confidences"]) {
    EXPECT_LE(e["confidence"].get<double>(), prev);
    prev = e["confidence"].get<double>();
  }
}

TEST(IdentifierOnScene, CoolPlumeWithTrueBackgroundNamesItsGas) {
  sim::SceneConfig sc;
  sc.height = 40;
  sc.width = 40;
  sc.bands = 48;
  sc.seed = 21;
  const auto scene = sim::gen_scene(sc);
  const auto& grid = scene.cube.grid();
  const auto gases = sim::builtin_gases(grid);
  const auto lib = SpectralLibrary::from_gases(gases);

  sim::PlumeConfig pc;
  pc.source = {20, 6};
  pc.seed = 3;
  const auto density = sim::gaussian_plume(40, 40, pc);
  for (const char* name : {"SF6", "NH3", "SO2"}) {
    const auto gas = sim::builtin_gas(grid, name);
    const auto e = sim::embed_plume(scene.cube, scene.surface, scene.atmosphere, gas, density,
                                    50.0 / gas.nominal_scale(), 280.0);
    const auto model = detect::WhiteningModel::fit(e.cube, &e.truth.roi_truth);
    std::vector<int> roi;
    for (int p = 0; p < e.cube.pixel_count(); ++p)
      if (e.truth.roi_truth.test(p)) roi.push_back(p);
    RowMatrix bgs(static_cast<Eigen::Index>(roi.size()), grid.band_count());
    for (std::size_t i = 0; i < roi.size(); ++i)
      bgs.row(static_cast<Eigen::Index>(i)) = e.truth.l_off_true.spectrum(roi[i]).transpose();
    const auto sp = whitened_superpixel(model, e.cube, estimate_from(roi, bgs, 40));
    const auto r = identify::identify(sp, lib, model);
    EXPECT_EQ(r.top, name);
  }
}
