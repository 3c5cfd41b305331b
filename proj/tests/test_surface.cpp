#include <gtest/gtest.h>

#include <cmath>

#include "gen.hpp"
#include "kpzu/surface.hpp"
#include "kpzu/walk_kernel.hpp"

using namespace kpzu;

TEST(Surface, ZeroNoiseStaysFlat) {
  const Domain dom{6, 12, 0};
  for (const auto& r : {GrowthRule::linear(), GrowthRule::kpz_quadratic(), GrowthRule::kpz_sqrt(),
                        GrowthRule::polymer(1.0)}) {
    const auto s = grow(r, sample_sheet(NoiseLaw::zero(), 1, dom), 16);
    s.heights.for_each_site([&](long, long, double v) { ASSERT_EQ(v, 0.0) << r.name(); });
    EXPECT_DOUBLE_EQ(s.raw(0, 12), 12.0 * r.psi00());
  }
}

// linear growth is the heat-kernel average of the noise
TEST(Surface, LinearIsDuhamelSum) {
  const long N = 16;
  const Domain dom{4, 10, 0};
  const auto sheet = sample_sheet(NoiseLaw::uniform(1.0), 77, dom);
  const auto s = grow(GrowthRule::linear(), sheet, N);
  const WalkKernel k(10);
  const double scale = std::pow(double(N), -0.25);
  for (long t = 1; t <= 10; ++t) {
    for (long x = dom.lo(t); x <= dom.hi(t); x += 2) {
      if (std::abs(x) > 4) continue;
      double d = 0;
      for (long s2 = 1; s2 <= t; ++s2)
        for (long z = x - (t - s2); z <= x + (t - s2); z += 2) d += k.p(x - z, t - s2) * sheet(z, s2);
      EXPECT_NEAR(s(x, t), scale * d, 1e-13);
    }
  }
}

// the fast paths agree with a direct evaluation of psi
TEST(SurfaceProperty, MatchesNaiveRecursion) {
  gen::for_all(30, 41, [](gen::Gen& g) {
    const std::vector<GrowthRule> rules{GrowthRule::linear(), GrowthRule::quadratic(g.real(0.05, 0.3)),
                                        GrowthRule::kpz_sqrt(), GrowthRule::polymer(g.real(0.2, 1.0))};
    const auto& r = rules[g.integer(0, 3)];
    const long N = g.integer(16, 4096);
    const Domain dom{g.integer(0, 5), g.integer(1, 8), 0};
    const auto sheet = sample_sheet(g.law(), g.seed(), dom);
    const auto s = grow(r, sheet, N);
    LatticeField<double> raw(dom, 0.0);
    const double sc = std::pow(double(N), -0.25);
    for (long t = 1; t <= dom.horizon; ++t)
      for (long x = dom.lo(t); x <= dom.hi(t); x += 2)
        raw(x, t) = r.psi(raw.at(x - 1, t - 1), raw.at(x + 1, t - 1)) + sc * sheet(x, t);
    raw.for_each_site([&](long x, long t, double v) {
      EXPECT_NEAR(s.raw(x, t), v, 1e-11 * std::max(1.0, std::abs(v)));
    });
  });
}

TEST(SurfaceProperty, HeightShiftEquivariance) {
  gen::for_all(20, 42, [](gen::Gen& g) {
    const Domain dom{3, 6, 0};
    const auto sheet = sample_sheet(g.law(), g.seed(), dom);
    const double c = g.real(-10, 10);
    const auto r = GrowthRule::kpz_sqrt();
    const auto a = grow(r, sheet, 64), b = grow(r, sheet, 64, {DriftMode::None, {}, c});
    a.heights.for_each_site([&](long x, long t, double v) { EXPECT_NEAR(b(x, t), v + c, 1e-11); });
  });
}

TEST(SurfaceProperty, LightCone) {
  gen::for_all(15, 43, [](gen::Gen& g) {
    const auto law = g.law();
    const auto seed = g.seed();
    const Domain small{1, 5, 0}, big{6, 9, 0};
    const auto a = grow(GrowthRule::kpz_sqrt(), sample_sheet(law, seed, small), 256);
    const auto b = grow(GrowthRule::kpz_sqrt(), sample_sheet(law, seed, big), 256);
    a.heights.for_each_site([&](long x, long t, double v) { ASSERT_EQ(v, b(x, t)); });
  });
}

TEST(Surface, DriftModes) {
  const auto law = NoiseLaw::rademacher();
  EXPECT_EQ(step_drift(law, DriftMode::None, 1.0, 16), 0.0);
  EXPECT_NEAR(step_drift(law, DriftMode::LogMgf, 2.0, 16), std::log(std::cosh(1.0)) / 2.0, 1e-15);
  EXPECT_THROW(step_drift(law, DriftMode::LogMgf, 0.0, 16), ModeError);
  // logmgf - cumulant = O(N^{-3/2}) for symmetric laws
  for (long N : {256L, 4096L, 65536L}) {
    const double d = step_drift(law, DriftMode::LogMgf, 1.0, N) - step_drift(law, DriftMode::Cumulant, 1.0, N);
    EXPECT_LT(std::abs(d), 0.1 * std::pow(double(N), -1.5));
  }
}

TEST(Surface, DriftIsSubtractedEachStep) {
  const Domain dom{2, 5, 0};
  const auto sheet = sample_sheet(NoiseLaw::rademacher(), 5, dom);
  const auto a = grow(GrowthRule::linear(), sheet, 16);
  const auto b = grow(GrowthRule::linear(), sheet, 16, {DriftMode::Cumulant, 1.0, 0.0});
  EXPECT_NEAR(a(0, 4) - b(0, 4), 4 * b.drift_per_step, 1e-14);
  EXPECT_NEAR(a.raw(0, 4), b.raw(0, 4), 1e-14);
}

TEST(Surface, BlowUpAndGuards) {
  const Domain dom{40, 40, 0};
  const auto sheet = sample_sheet(NoiseLaw::rademacher(), 3, dom);
  EXPECT_THROW(grow(GrowthRule::kpz_quadratic(), sheet, 1), BlowUpError);
  auto tight = GrowthRule::kpz_sqrt();
  tight.set_phi_radius(1e-3);
  EXPECT_THROW(grow(tight, sheet, 16), BlowUpError);
  EXPECT_THROW(grow(GrowthRule::linear(), sample_sheet(NoiseLaw::rademacher(), 3, Domain{2, 2, 1}), 16),
               BoundsError);
  EXPECT_THROW(grow(GrowthRule::linear(), sheet, 0), DomainError);
}
