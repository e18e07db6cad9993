#include <gtest/gtest.h>

#include <random>

#include "omit/omit.hpp"
#include "support/oracles.hpp"

using namespace omit;

namespace {

WindowReport report(const PhysicalConfig& c, std::size_t points = 20001) {
  return detect_windows(spectrum(normalize(c), -3.0, 3.0, points, Method::cf));
}

PhysicalConfig quiet(PhysicalConfig c, double factor) {
  for (std::size_t k = 0; k + 1 < c.kappa.size(); ++k) c.kappa[k] *= factor;
  c.gamma_m *= factor;
  if (c.atom) c.atom->gamma_a *= factor;
  return c;
}

}  // namespace

TEST(DetectWindows, Fig2a) {
  const WindowReport r = report(presets::chain(2));
  EXPECT_EQ(r.count, 2u);
  EXPECT_EQ(r.central_feature, CentralFeature::AbsorptivePeak);
  for (const auto& w : r.windows) {
    EXPECT_LT(w.depth, 0.2);
    EXPECT_GT(w.width, 0.0);
    EXPECT_GE(w.prominence, 0.1);
  }
}

TEST(DetectWindows, Fig2b) {
  const WindowReport r = report(presets::chain(3));
  EXPECT_EQ(r.count, 3u);
  EXPECT_EQ(r.central_feature, CentralFeature::AbsorptiveDip);
}

TEST(DetectWindows, Fig2cAndFig4c) {
  EXPECT_EQ(report(presets::chain(4)).count, 4u);
  const WindowReport r = report(*presets::find("fig4c"));
  EXPECT_EQ(r.count, 5u);
  EXPECT_EQ(r.central_feature, CentralFeature::SplitPeak);
}

TEST(DetectWindows, FlatSpectrum) {
  ResponseSpectrum sp;
  sp.x_grid = uniform_grid(-3.0, 3.0, 101);
  sp.eps_T.assign(101, cplx{2.0, 0.0});
  const WindowReport r = detect_windows(sp);
  EXPECT_EQ(r.count, 0u);
  EXPECT_EQ(r.central_feature, CentralFeature::AbsorptivePeak);
}

TEST(DetectWindows, SortedByCenter) {
  const WindowReport r = report(*presets::find("fig4c4"));
  for (std::size_t k = 1; k < r.windows.size(); ++k) EXPECT_LT(r.windows[k - 1].center_x, r.windows[k].center_x);
}

TEST(DetectWindows, UnderResolvedWindowIsRejected) {
  ResponseSpectrum sp;
  sp.x_grid = uniform_grid(-1.0, 1.0, 201);
  for (double x : sp.x_grid) sp.eps_T.emplace_back(2.0 - 2.0 * std::exp(-x * x / 1e-4), 0.0);
  EXPECT_THROW(detect_windows(sp), ResolutionError);
}

TEST(DetectWindows, ShallowDipIsNotAWindow) {
  ResponseSpectrum sp;
  sp.x_grid = uniform_grid(-1.0, 1.0, 401);
  for (double x : sp.x_grid) sp.eps_T.emplace_back(2.0 - 1.5 * std::exp(-x * x / 0.01), 0.0);
  EXPECT_EQ(detect_windows(sp).count, 0u);
}

TEST(DetectWindows, SyntheticWindowGeometry) {
  ResponseSpectrum sp;
  sp.x_grid = uniform_grid(-1.0, 1.0, 2001);
  // Re = 2 - 2 exp(-(x-0.3)^2 / s^2): Re < 1 where |x - 0.3| < s sqrt(ln 2).
  const double s = 0.05;
  for (double x : sp.x_grid) sp.eps_T.emplace_back(2.0 - 2.0 * std::exp(-(x - 0.3) * (x - 0.3) / (s * s)), 0.0);
  const WindowReport r = detect_windows(sp);
  ASSERT_EQ(r.count, 1u);
  EXPECT_NEAR(r.windows[0].center_x, 0.3, 1e-3);
  EXPECT_NEAR(r.windows[0].width, 2.0 * s * std::sqrt(std::log(2.0)), 1e-5);
  EXPECT_NEAR(r.windows[0].depth, 0.0, 1e-12);
  EXPECT_NEAR(r.windows[0].prominence, 2.0, 1e-6);
}

TEST(DetectWindows, InvalidGrid) {
  ResponseSpectrum sp;
  sp.x_grid = {0.0, 0.0, 1.0};
  sp.eps_T.assign(3, cplx{1.0, 0.0});
  EXPECT_THROW(detect_windows(sp), PreconditionError);
}

TEST(CentralFeatureWidth, GrowsWithCoupling) {
  const double w8 = central_feature_width(spectrum(normalize(*presets::find("fig3-8")), -3, 3, 20001, Method::cf));
  const double w10 = central_feature_width(spectrum(normalize(*presets::find("fig3-10")), -3, 3, 20001, Method::cf));
  const double w12 = central_feature_width(spectrum(normalize(*presets::find("fig3-12")), -3, 3, 20001, Method::cf));
  EXPECT_LT(w8, w10);
  EXPECT_LT(w10, w12);
}

TEST(CentralFeatureWidth, AtomInFirstCavityBroadens) {
  const auto sp0 = spectrum(normalize(presets::chain(4)), -3, 3, 20001, Method::cf);
  const auto sp1 = spectrum(normalize(*presets::find("fig4a1")), -3, 3, 20001, Method::cf);
  EXPECT_GT(central_feature_width(sp1), central_feature_width(sp0));
}

TEST(CentralFeatureWidth, SymmetricAboutZero) {
  const auto sp = spectrum(normalize(presets::chain(2)), -3, 3, 20001, Method::cf);
  std::vector<double> re;
  for (const auto& e : sp.eps_T) re.push_back(e.real());
  const auto [l, r] = omit::detail::level_interval(sp.x_grid, re, 10000, 1.0, true);
  EXPECT_NEAR(l + r, 0.0, 3.0e-4);
  EXPECT_NEAR(central_feature_width(sp), r - l, 1e-15);
}

TEST(CentralFeatureWidth, SplitPeakIsNotApplicable) {
  const auto sp = spectrum(normalize(*presets::find("fig4c2")), -3, 3, 20001, Method::cf);
  EXPECT_THROW(central_feature_width(sp), NotApplicableError);
}

TEST(PredictLossless, SingleCavity) {
  PhysicalConfig c = presets::chain(1);
  const auto r = predict_windows_lossless(normalize(c));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0], 0.0, 1e-12);
}

TEST(PredictLossless, TwoCavitiesAtPlusMinusG) {
  const NormalizedSystem s = normalize(presets::chain(2));
  const auto r = predict_windows_lossless(s);
  ASSERT_EQ(r.size(), 2u);
  const double g = std::abs(s.G) / s.kappa_n();
  EXPECT_NEAR(r[0], -g, 1e-12);
  EXPECT_NEAR(r[1], g, 1e-12);
}

TEST(PredictLossless, MatchesGraphEigenvalues) {
  for (const auto& name : presets::names()) {
    const PhysicalConfig c = *presets::find(name);
    if (!std::holds_alternative<DirectG>(c.drive_mode)) continue;
    const NormalizedSystem s = normalize(c);
    const auto lib = predict_windows_lossless(s);
    const auto ref = oracle::lossless_roots(s);
    ASSERT_EQ(lib.size(), ref.size()) << name;
    for (std::size_t k = 0; k < lib.size(); ++k) EXPECT_NEAR(lib[k], ref[k], 1e-9) << name;
  }
}

TEST(PredictLossless, AtomInEvenCavityAddsRoot) {
  const auto r = predict_windows_lossless(normalize(*presets::find("fig4c2")));
  EXPECT_EQ(r.size(), 5u);
}

TEST(PredictLossless, ThreeCavityRootsMatchDetectedCenters) {
  const PhysicalConfig c = quiet(presets::chain(3), 0.01);
  const NormalizedSystem s = normalize(c);
  const auto roots = predict_windows_lossless(s);
  const WindowReport rep = detect_windows(spectrum(s, -3.0, 3.0, 20001, Method::cf));
  ASSERT_EQ(roots.size(), 3u);
  ASSERT_EQ(rep.count, 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(rep.windows[k].center_x, roots[k], 0.01);
}

TEST(PredictLossless, DecoupledHoppingRestartsChain) {
  PhysicalConfig c = presets::chain(3);
  c.hopping[0] = 0.0;
  const NormalizedSystem s = normalize(c);
  const auto lib = predict_windows_lossless(s);
  const auto ref = oracle::lossless_roots(s);
  ASSERT_EQ(lib.size(), ref.size());
  for (std::size_t k = 0; k < lib.size(); ++k) EXPECT_NEAR(lib[k], ref[k], 1e-9);
}

TEST(WindowsProperty, RandomLosslessRootsMatchOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const NormalizedSystem s = normalize(oracle::random_config(rng, trial % 2 == 0));
    const auto lib = predict_windows_lossless(s);
    const auto ref = oracle::lossless_roots(s);
    ASSERT_EQ(lib.size(), ref.size()) << "trial " << trial;
    for (std::size_t k = 0; k < lib.size(); ++k) EXPECT_NEAR(lib[k], ref[k], 1e-7 * (1.0 + std::abs(ref[k])));
  }
}

namespace {

/// Weak-dissipation chain: g_n ∈ [κ_N, 2κ_N], G and g_a ∈ [0.4, 0.9]κ_N,
/// inner decays 10⁻³ of κ_N.
PhysicalConfig weak_config(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> hop(15.0, 30.0);
  std::uniform_real_distribution<double> cpl(6.0, 13.5);
  PhysicalConfig c = presets::chain(n);
  for (auto& g : c.hopping) g = hop(rng);
  for (std::size_t k = 0; k + 1 < c.kappa.size(); ++k) c.kappa[k] = 0.015;
  c.gamma_m = 0.015;
  std::get<DirectG>(c.drive_mode).G_mag = cpl(rng);
  c.atom = Atom{1, cpl(rng), 0.015};
  return c;
}

}  // namespace

TEST(WindowsProperty, CountBoundAndParity) {
  std::mt19937_64 rng(41);
  int even_checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 4;
    PhysicalConfig with = weak_config(rng, n);
    PhysicalConfig without = with;
    without.atom.reset();
    const std::size_t base = report(without, 40001).count;
    EXPECT_LE(base, static_cast<std::size_t>(n));
    for (int pos = 1; pos <= n; ++pos) {
      with.atom->position = pos;
      const std::size_t count = report(with, 40001).count;
      if (pos % 2 == 1) {
        EXPECT_LE(count, base) << "trial " << trial << " atom " << pos;
      } else {
        EXPECT_LE(count, static_cast<std::size_t>(n + 1));
        if (base == static_cast<std::size_t>(n)) {
          EXPECT_EQ(count, base + 1) << "trial " << trial << " atom " << pos;
          ++even_checked;
        }
      }
    }
  }
  EXPECT_GT(even_checked, 20);
}
