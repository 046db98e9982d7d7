#include "plume/core/error.hpp"
#include "plume/core/morphology.hpp"
#include "plume/core/stats.hpp"
#include "plume/estimate/estimators.hpp"
#include "plume/kernels/kernels.hpp"
#include "plume/segment/watershed.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace plume;
using namespace plume::bg;

namespace {

double max_abs_diff(const RowMatrix& a, const RowMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Left half material A (value 1 in every band), right half material B (value 5),
/// with small deterministic texture so covariances are non-degenerate.
RadianceCube two_material_cube(int h, int w, int bands, std::uint64_t seed) {
  auto cube = test::gaussian_cube(h, w, bands, seed, 0.0, 0.01);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) cube.spectrum(r, c).array() += c < w / 2 ? 1.0 : 5.0;
  return cube;
}

segment::SegmentMap halves(int h, int w) {
  segment::SegmentMap s{h, w, std::vector<int>(static_cast<std::size_t>(h) * w), 2};
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) s.labels[static_cast<std::size_t>(r * w + c)] = c < w / 2 ? 0 : 1;
  return s;
}

}  // namespace

TEST(Problem, PoolExcludesRoiGuardAndExtra) {
  const auto cube = test::gaussian_cube(20, 20, 3, 1);
  const auto roi = test::box_mask(20, 20, 8, 8, 10, 10);
  const auto extra = test::box_mask(20, 20, 0, 0, 1, 20);
  const auto p = BackgroundProblem::with_guardrail(cube, roi, &extra);
  EXPECT_EQ(p.roi_pixels().size(), 4u);
  EXPECT_EQ(p.guard().count(), 100 - 4);
  EXPECT_EQ(static_cast<int>(p.pool_pixels().size()), 400 - 100 - 20);
  EXPECT_EQ(p.pool_spectra().rows(), static_cast<Eigen::Index>(p.pool_pixels().size()));
  EXPECT_THROW(BackgroundProblem(cube, PixelMask(20, 20), PixelMask(20, 20)), DomainError);
  EXPECT_THROW(BackgroundProblem(cube, PixelMask(20, 20, true), PixelMask(20, 20)), DomainError);
}

TEST(Global, ConstantCubeAndTwoPixelPool) {
  const auto cube = test::constant_cube(10, 10, 4, 3.5);
  const auto p = BackgroundProblem::with_guardrail(cube, test::box_mask(10, 10, 0, 0, 1, 1));
  const auto e = estimate_global(p);
  EXPECT_EQ(e.backgrounds.cwiseAbs().maxCoeff(), 3.5);

  RadianceCube tiny(1, 3, SpectralGrid({9.0, 10.0}), {100, 100, 1, 2, 3, 6});
  PixelMask roi(1, 3);
  roi.set(0);
  const auto t = estimate_global(BackgroundProblem(tiny, roi, PixelMask(1, 3)));
  EXPECT_DOUBLE_EQ(t.backgrounds(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(t.backgrounds(0, 1), 4.0);
}

TEST(Global, IndependentOfRoiContents) {
  auto cube = test::gaussian_cube(12, 12, 3, 2);
  const auto roi = test::box_mask(12, 12, 5, 5, 7, 7);
  const auto a = estimate_global(BackgroundProblem::with_guardrail(cube, roi));
  for (int p : roi.indices()) cube.spectrum(p).setConstant(-50.0);
  const auto b = estimate_global(BackgroundProblem::with_guardrail(cube, roi));
  EXPECT_EQ(max_abs_diff(a.backgrounds, b.backgrounds), 0.0);
}

TEST(KMeans, TwoBlobsRoiNearA) {
  auto cube = test::gaussian_cube(10, 10, 3, 3, 0.0, 0.05);
  for (int p = 0; p < 100; ++p) cube.spectrum(p).array() += p % 2 ? 10.0 : 0.0;
  PixelMask roi(10, 10);
  roi.set(0);  // an "a" pixel (even index)
  const BackgroundProblem p(cube, roi, PixelMask(10, 10));
  const auto e = estimate_kmeans(p, 2, 11);
  // The optimal 2-clustering is the even/odd split; the background is the
  // mean of the even pool pixels.
  std::vector<int> even;
  for (int q : p.pool_pixels())
    if (q % 2 == 0) even.push_back(q);
  const Spectrum a = mean_spectrum(cube, even);
  EXPECT_LE((e.backgrounds.row(0).transpose() - a).norm(), 1e-9);
}

TEST(KMeans, SaturatedEqualsNearestNeighbor) {
  const auto cube = test::gaussian_cube(6, 6, 3, 4);
  const auto p = BackgroundProblem(cube, test::box_mask(6, 6, 0, 0, 2, 2), PixelMask(6, 6));
  const int n = static_cast<int>(p.pool_pixels().size());
  const auto km = estimate_kmeans(p, n, 5);
  const auto nn = estimate_knn(p, 1);
  EXPECT_LE(max_abs_diff(km.backgrounds, nn.backgrounds), 1e-12);
}

TEST(KMeans, ConstantPoolAndDeterminism) {
  const auto cube = test::constant_cube(8, 8, 2, 4.0);
  const auto p = BackgroundProblem::with_guardrail(cube, test::box_mask(8, 8, 0, 0, 1, 1));
  EXPECT_EQ(estimate_kmeans(p, 3, 1).backgrounds.cwiseAbs().maxCoeff(), 4.0);

  const auto g = test::gaussian_cube(16, 16, 4, 6);
  const auto q = BackgroundProblem::with_guardrail(g, test::box_mask(16, 16, 6, 6, 8, 8));
  EXPECT_EQ(max_abs_diff(estimate_kmeans(q, 5, 9).backgrounds, estimate_kmeans(q, 5, 9).backgrounds), 0.0);
  EXPECT_THROW(estimate_kmeans(q, 1, 0), DomainError);
}

TEST(KMeans, FitConvergesAndAssignsNearest) {
  const auto g = test::gaussian_cube(1, 200, 3, 7);
  const RowMatrix data(g.pixels());
  const auto fit = kmeans_fit(data, 4, 3);
  EXPECT_LE(fit.iterations, 100);
  for (int i = 0; i < 200; ++i) {
    Eigen::Index best = 0;
    (fit.centers.rowwise() - data.row(i)).rowwise().squaredNorm().minCoeff(&best);
    EXPECT_EQ(fit.assignment[i], best);
  }
}

TEST(Pca, FullRankReconstructsSpanExactly) {
  const auto cube = test::gaussian_cube(10, 10, 4, 8);
  const auto p = BackgroundProblem::with_guardrail(cube, test::box_mask(10, 10, 0, 0, 1, 1));
  const auto e = estimate_pca(p, 4);
  EXPECT_LE((e.backgrounds.row(0) - p.roi_spectra().row(0)).norm(), 1e-9);
  EXPECT_THROW(estimate_pca(p, 0), DomainError);
  EXPECT_THROW(estimate_pca(p, 5), DomainError);
}

TEST(Pca, RankOneDataWithOneComponent) {
  RadianceCube cube(8, 8, SpectralGrid::uniform(8, 12, 5));
  Spectrum dir(5), base = Spectrum::Constant(5, 2.0);
  dir << 1, -2, 0.5, 3, 1;
  for (int p = 0; p < 64; ++p) cube.spectrum(p) = base + (0.1 * p - 3.0) * dir;
  const auto prob = BackgroundProblem::with_guardrail(cube, test::box_mask(8, 8, 0, 0, 1, 1));
  const auto e = estimate_pca(prob, 1);
  EXPECT_LE((e.backgrounds.row(0) - prob.roi_spectra().row(0)).norm(), 1e-9);
}

TEST(Pca, TrainingErrorNonIncreasing) {
  const auto cube = test::correlated_cube(16, 16, 8, 9);
  const PcaContext ctx(BackgroundProblem::with_guardrail(cube, test::box_mask(16, 16, 6, 6, 8, 8)));
  double prev = 1e300;
  for (int k = 1; k <= ctx.max_components(); ++k) {
    const double err = ctx.training_error(k);
    EXPECT_LE(err, prev + 1e-12);
    prev = err;
  }
  EXPECT_LE(prev, 1e-18);
}

TEST(Pca, ContextMatchesDirectEstimate) {
  const auto cube = test::correlated_cube(20, 20, 6, 10);
  const auto p = BackgroundProblem::with_guardrail(cube, test::box_mask(20, 20, 8, 8, 11, 11));
  const PcaContext ctx(p);
  for (int k : {1, 3, 6}) EXPECT_LE(max_abs_diff(ctx.estimate(k).backgrounds, estimate_pca(p, k).backgrounds), 1e-10);
}

TEST(Knn, ExactDuplicateAtKOne) {
  auto cube = test::gaussian_cube(10, 10, 3, 11);
  cube.spectrum(99) = cube.spectrum(0);
  const auto p = BackgroundProblem::with_guardrail(cube, test::box_mask(10, 10, 0, 0, 1, 1));
  const auto e = estimate_knn(p, 1);
  EXPECT_EQ((e.backgrounds.row(0) - p.roi_spectra().row(0)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Knn, BruteForceOracle) {
  const auto cube = test::gaussian_cube(1, 60, 4, 12);
  PixelMask roi(1, 60);
  for (int i = 0; i < 10; ++i) roi.set(i);
  const BackgroundProblem p(cube, roi, PixelMask(1, 60));
  ASSERT_EQ(p.pool_pixels().size(), 50u);
  const auto e = estimate_knn(p, 5);
  for (int i = 0; i < 10; ++i) {
    std::vector<std::pair<double, int>> d;
    for (int j = 0; j < 50; ++j) d.emplace_back((p.pool_spectra().row(j) - p.roi_spectra().row(i)).squaredNorm(), j);
    std::sort(d.begin(), d.end());
    Spectrum m = Spectrum::Zero(4);
    for (int j = 0; j < 5; ++j) m += p.pool_spectra().row(d[j].second).transpose();
    m /= 5.0;
    EXPECT_LE((e.backgrounds.row(i).transpose() - m).norm(), 1e-12);
  }
}

TEST(Knn, ContextMatchesDirectAndRejectsLargeK) {
  const auto cube = test::gaussian_cube(12, 12, 3, 13);
  const auto p = BackgroundProblem::with_guardrail(cube, test::box_mask(12, 12, 5, 5, 7, 7));
  const KnnContext ctx(p, 20);
  for (int k : {1, 7, 20}) EXPECT_LE(max_abs_diff(ctx.estimate(k).backgrounds, estimate_knn(p, k).backgrounds), 1e-12);
  EXPECT_THROW(ctx.estimate(21), DomainError);
  EXPECT_THROW(estimate_knn(p, static_cast<int>(p.pool_pixels().size()) + 1), DomainError);
}

TEST(Annulus, InsideMaterialA) {
  const auto cube = two_material_cube(30, 30, 3, 14);
  const auto roi = test::box_mask(30, 30, 14, 5, 16, 7);
  const auto p = BackgroundProblem::with_guardrail(cube, roi);
  const auto e = estimate_annulus(p, 2);
  // The ring spans columns -1..12 at most, all inside material A.
  const PixelMask inner = roi | p.guard();
  const PixelMask ring = (dilate(inner, 2) - inner) & p.pool();
  const Spectrum a = mean_spectrum(cube, ring);
  EXPECT_LE((e.backgrounds.row(0).transpose() - a).norm(), 1e-12);
  EXPECT_LT(std::abs(e.backgrounds(0, 0) - 1.0), 0.01);
  EXPECT_GT(std::abs(estimate_global(p).backgrounds(0, 0) - 1.0), 1.0);
}

TEST(Annulus, HomogeneousSceneNearGlobal) {
  const auto cube = test::gaussian_cube(30, 30, 3, 15, 4.0, 0.1);
  const auto p = BackgroundProblem::with_guardrail(cube, test::box_mask(30, 30, 14, 14, 16, 16));
  const auto e = estimate_annulus(p, 3);
  const auto g = estimate_global(p);
  // Ring of about 200 pixels: five standard errors of 0.1 / sqrt(200).
  EXPECT_LE(max_abs_diff(e.backgrounds, g.backgrounds), 5 * 0.1 / std::sqrt(200.0));
  EXPECT_THROW(estimate_annulus(p, 0), DomainError);
}

TEST(Linkage, OneBandEnumeration) {
  RowMatrix a(2, 1), b(2, 1);
  a << 0, 2;
  b << 1, 3;
  EXPECT_DOUBLE_EQ(linkage_distance(a, b, Linkage::Single), 1.0);
  EXPECT_DOUBLE_EQ(linkage_distance(a, b, Linkage::Complete), 3.0);
  EXPECT_DOUBLE_EQ(linkage_distance(a, b, Linkage::Average), 1.5);
  RowMatrix c(1, 1);
  c << 2;
  EXPECT_DOUBLE_EQ(linkage_distance(a, c, Linkage::Single), 0.0);
}

TEST(Linkage, Ordering) {
  const auto x = test::gaussian_cube(1, 30, 4, 16), y = test::gaussian_cube(1, 20, 4, 17);
  const RowMatrix a(x.pixels()), b(y.pixels());
  const double s = linkage_distance(a, b, Linkage::Single);
  const double m = linkage_distance(a, b, Linkage::Average);
  const double c = linkage_distance(a, b, Linkage::Complete);
  EXPECT_LE(s, m);
  EXPECT_LE(m, c);
}

TEST(Kns, SingleSegmentWithoutBtsIsGlobal) {
  const auto cube = test::gaussian_cube(16, 16, 4, 18);
  const auto p = BackgroundProblem::with_guardrail(cube, test::box_mask(16, 16, 6, 6, 9, 9));
  segment::SegmentMap one{16, 16, std::vector<int>(256, 0), 1};
  const auto e = estimate_kns(p, one, KnsParams{});
  EXPECT_LE(max_abs_diff(e.backgrounds, estimate_global(p).backgrounds), 1e-10);
}

TEST(Kns, PicksSegmentsOfTheRoiMaterial) {
  const auto cube = two_material_cube(24, 24, 3, 19);
  const auto p = BackgroundProblem::with_guardrail(cube, test::box_mask(24, 24, 10, 2, 12, 4));
  const auto segs = halves(24, 24);
  KnsParams k;
  k.min_pixels = 8;
  KnsContext ctx(p, segs);
  EXPECT_EQ(ctx.selection(0, k), (std::vector<int>{0}));
  const auto e = ctx.estimate(k);
  PixelMask a_pool(24, 24);
  for (int q : p.pool_pixels())
    if (q % 24 < 12) a_pool.set(q);
  EXPECT_LE((e.backgrounds.row(0).transpose() - mean_spectrum(cube, a_pool)).norm(), 1e-12);
  // Asking for more pixels than material A holds pulls in material B.
  k.min_pixels = a_pool.count() + 1;
  EXPECT_EQ(ctx.selection(0, k), (std::vector<int>{0, 1}));
}

TEST(Kns, BtsRecoversPlantedBackground) {
  auto cube = test::constant_cube(20, 20, 4, 3.0);
  Spectrum t(4);
  t << 1.0, 0.5, 0.0, 0.25;
  const auto roi = test::box_mask(20, 20, 8, 8, 10, 10);
  int i = 0;
  for (int q : roi.indices()) cube.spectrum(q) = Spectrum::Constant(4, 3.0) - (0.5 + 0.2 * i++) * t;
  const auto p = BackgroundProblem::with_guardrail(cube, roi);
  segment::SegmentMap one{20, 20, std::vector<int>(400, 0), 1};
  KnsParams k;
  k.use_bts = true;
  k.sign_mode = SignMode::Absorption;
  const auto e = estimate_kns(p, one, k);
  for (Eigen::Index r = 0; r < e.backgrounds.rows(); ++r) {
    EXPECT_LE((e.backgrounds.row(r).transpose() - Spectrum::Constant(4, 3.0)).cwiseAbs().maxCoeff(), 1e-4);
  }
  // The ROI never enters the clean set, so the plain segment mean is exact as well.
  EXPECT_DOUBLE_EQ(estimate_kns(p, one, KnsParams{}).backgrounds(0, 0), 3.0);
}

TEST(Kns, RequiresSegmentsOfMatchingShape) {
  const auto cube = test::gaussian_cube(10, 10, 2, 20);
  const auto p = BackgroundProblem::with_guardrail(cube, test::box_mask(10, 10, 0, 0, 1, 1));
  EXPECT_THROW(estimate(p, Hyperparams::of(KnsParams{}), nullptr), DomainError);
  segment::SegmentMap wrong{5, 5, std::vector<int>(25, 0), 1};
  EXPECT_THROW(estimate_kns(p, wrong, KnsParams{}), DomainError);
}

TEST(ReductionChain, SaturatedMethodsEqualGlobal) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto cube = test::correlated_cube(24, 24, 6, 100 + seed);
    const auto p = BackgroundProblem::with_guardrail(cube, test::box_mask(24, 24, 9, 9, 13, 13));
    const auto g = estimate_global(p);
    const int n = static_cast<int>(p.pool_pixels().size());
    EXPECT_LE(max_abs_diff(estimate_knn(p, n).backgrounds, g.backgrounds), 1e-10);
    EXPECT_LE(max_abs_diff(estimate_annulus(p, 24).backgrounds, g.backgrounds), 1e-10);
    segment::SegmentMap one{24, 24, std::vector<int>(576, 0), 1};
    EXPECT_LE(max_abs_diff(estimate_kns(p, one, KnsParams{}).backgrounds, g.backgrounds), 1e-10);
  }
}

TEST(Dispatch, MatchesDirectCalls) {
  const auto cube = test::gaussian_cube(16, 16, 3, 21);
  const auto p = BackgroundProblem::with_guardrail(cube, test::box_mask(16, 16, 6, 6, 8, 8));
  EXPECT_EQ(max_abs_diff(estimate(p, Hyperparams::of(Method::PCA, 2)).backgrounds, estimate_pca(p, 2).backgrounds), 0);
  EXPECT_EQ(max_abs_diff(estimate(p, Hyperparams::of(Method::Annulus, 3)).backgrounds,
                         estimate_annulus(p, 3).backgrounds),
            0);
  EXPECT_EQ(estimate(p, Hyperparams::of(Method::KNN, 4)).method(), Method::KNN);
}

TEST(Names, RoundTripAndErrors) {
  for (Method m : all_methods()) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_EQ(all_methods().size(), 6u);
  EXPECT_THROW(parse_method("median"), ConfigError);
  EXPECT_EQ(parse_linkage("complete"), Linkage::Complete);
  EXPECT_EQ(parse_sign_mode("emission"), SignMode::Emission);
  KnsParams k;
  k.min_pixels = 64;
  k.use_bts = true;
  EXPECT_EQ(Hyperparams::of(k).label(), "k=64,linkage=average,bts=on");
  EXPECT_EQ(Hyperparams::of(Method::PCA, 3).label(), "k=3");
}

TEST(Serialize, EstimateRoundTrip) {
  const auto cube = test::gaussian_cube(12, 12, 3, 22);
  const auto p = BackgroundProblem::with_guardrail(cube, test::box_mask(12, 12, 4, 4, 6, 7));
  const auto segs = segment::segment_cube(cube);
  KnsParams k;
  k.linkage = Linkage::Single;
  k.min_pixels = 16;
  const auto e = estimate_kns(p, segs, k);
  const auto dir = test::scratch_dir("estimate_io");
  write_estimate(e, dir / "bg.csv");
  const auto back = read_estimate(dir / "bg.csv", 12);
  EXPECT_EQ(back.roi_pixels, e.roi_pixels);
  EXPECT_EQ(back.hyperparams, e.hyperparams);
  EXPECT_EQ(max_abs_diff(back.backgrounds, e.backgrounds), 0.0);
  EXPECT_THROW(read_estimate(dir / "absent.csv", 12), IoError);
}
