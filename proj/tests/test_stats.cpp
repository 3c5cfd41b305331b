#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gen.hpp"
#include "kpzu/stats.hpp"

using namespace kpzu;

TEST(Stats, Digest) {
  const auto d = digest({1, 2, 3, 4, 10});
  EXPECT_EQ(d.count, 5u);
  EXPECT_DOUBLE_EQ(d.mean, 4.0);
  EXPECT_DOUBLE_EQ(d.variance, 12.5);
  EXPECT_DOUBLE_EQ(d.median, 3.0);
  EXPECT_DOUBLE_EQ(d.q1, 2.0);
  EXPECT_DOUBLE_EQ(d.q3, 4.0);
  EXPECT_GT(d.skewness, 0.0);
  EXPECT_DOUBLE_EQ(d.stderr_mean(), std::sqrt(2.5));
}

TEST(Stats, MedianWithInfinities) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(median({1.0, inf, inf}), inf);
  EXPECT_EQ(median({1.0, 2.0, inf}), 2.0);
  EXPECT_EQ(median({inf, inf, inf, inf}), inf);
}

// reference values from scipy.special.kolmogorov / scipy.stats.ks_2samp
TEST(Stats, KolmogorovQ) {
  EXPECT_NEAR(kolmogorov_q(1.36), 0.049485876755377876, 1e-12);
  EXPECT_NEAR(kolmogorov_q(0.5), 0.9639452436648751, 1e-12);
  EXPECT_EQ(kolmogorov_q(0.0), 1.0);
  EXPECT_LT(kolmogorov_q(5.0), 1e-20);
}

TEST(Stats, TwoSampleReference) {
  std::vector<double> a, b;
  for (int i = 0; i < 60; ++i) a.push_back(std::fmod(i * 0.37, 1.0));
  for (int i = 0; i < 70; ++i) b.push_back(std::fmod(i * 0.61, 1.0) + 0.1);
  const auto r = ks_two_sample(a, b);
  EXPECT_NEAR(r.D, 0.12142857142857143, 1e-12);
  EXPECT_NEAR(r.p, 0.699352686513665, 1e-9);
}

TEST(Stats, OneSampleReference) {
  std::vector<double> x;
  for (int i = 0; i < 80; ++i) x.push_back(2 * std::sin(i));
  const auto r = ks_one_sample(x, [](double v) { return 0.5 * std::erfc(-v / std::sqrt(2.0)); });
  EXPECT_NEAR(r.D, 0.19857541067733941, 1e-12);
}

TEST(Stats, KSEdgeCases) {
  std::vector<double> a(60, 1.0);
  EXPECT_EQ(ks_two_sample(a, a).D, 0.0);
  EXPECT_EQ(ks_two_sample(a, a).p, 1.0);
  EXPECT_THROW(ks_two_sample(std::vector<double>(49, 0.0), a), SizeError);
  std::vector<double> lo(100), hi(100);
  for (int i = 0; i < 100; ++i) {
    lo[i] = i;
    hi[i] = 1000 + i;
  }
  EXPECT_EQ(ks_two_sample(lo, hi).D, 1.0);
}

TEST(StatsProperty, NullPValuesRoughlyUniform) {
  int small = 0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    const auto a = normal_sample(200, derive_seed(1, r)), b = normal_sample(150, derive_seed(2, r));
    small += ks_two_sample(a, b).p < 0.05;
  }
  // the asymptotic Q is slightly conservative at these sizes
  EXPECT_GT(small, 5);
  EXPECT_LT(small, 40);
}

TEST(StatsProperty, KSIsSymmetricAndShiftInvariant) {
  gen::for_all(30, 81, [](gen::Gen& g) {
    const auto a = normal_sample(g.integer(50, 300), g.seed());
    auto b = normal_sample(g.integer(50, 300), g.seed(), g.real(0.5, 2));
    const auto r1 = ks_two_sample(a, b), r2 = ks_two_sample(b, a);
    EXPECT_DOUBLE_EQ(r1.D, r2.D);
    const double s = g.real(-5, 5);
    auto as = a, bs = b;
    for (auto& v : as) v += s;
    for (auto& v : bs) v += s;
    EXPECT_NEAR(ks_two_sample(as, bs).D, r1.D, 1e-12);
    EXPECT_GE(r1.p, 0.0);
    EXPECT_LE(r1.p, 1.0);
  });
}

TEST(Stats, Holm) {
  const auto adj = holm_adjust({0.01, 0.04, 0.03, 0.005});
  EXPECT_DOUBLE_EQ(adj[0], 0.03);
  EXPECT_DOUBLE_EQ(adj[1], 0.06);
  EXPECT_DOUBLE_EQ(adj[2], 0.06);
  EXPECT_DOUBLE_EQ(adj[3], 0.02);
  EXPECT_EQ(holm_adjust({0.9, 0.8})[0], 1.0);
}

TEST(StatsProperty, HolmDominatesRaw) {
  gen::for_all(50, 82, [](gen::Gen& g) {
    std::vector<double> p(g.integer(1, 20));
    for (auto& v : p) v = g.real(0, 1);
    const auto adj = holm_adjust(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_GE(adj[i], p[i]);
      EXPECT_LE(adj[i], 1.0);
      for (std::size_t j = 0; j < p.size(); ++j)
        if (p[i] <= p[j]) EXPECT_LE(adj[i], adj[j]);
    }
  });
}

TEST(Stats, NormalSample) {
  const auto x = normal_sample(100000, 4, 2.0);
  const auto d = digest(x);
  EXPECT_NEAR(d.mean, 0.0, 0.03);
  EXPECT_NEAR(d.variance, 4.0, 0.06);
  EXPECT_EQ(normal_sample(7, 4), normal_sample(7, 4));
}

TEST(Ensemble, DeterministicAcrossThreads) {
  EnsembleConfig cfg;
  cfg.rule = GrowthRule::kpz_sqrt();
  cfg.N = 16;
  cfg.kernel_horizon = 1000;
  const ProbeSpec probes;
  const auto a = run_ensemble(cfg, probes, 30, 11, 1);
  const auto b = run_ensemble(cfg, probes, 30, 11, 3);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_THROW(run_ensemble(cfg, probes, 1, 11), SizeError);
}

TEST(Ensemble, ProbeWindowCoversTriangles) {
  ProbeSpec p;
  const auto dom = probe_window(p, 64);
  EXPECT_GE(dom.half_width, 4 + 1);
  EXPECT_GE(dom.horizon, 64);
}

TEST(Invariance, DesignChecks) {
  EnsembleConfig a, b;
  a.rule = GrowthRule::kpz_sqrt();
  b.rule = GrowthRule::polymer(2.0);
  EXPECT_THROW(check_design({a, b}), DesignError);
  b.rule = GrowthRule::polymer(1.0);
  b.law = NoiseLaw::uniform(1.0);
  EXPECT_THROW(check_design({a, b}), DesignError);
  EXPECT_THROW(check_design({a}), DesignError);
  b.law = NoiseLaw::uniform(std::sqrt(3.0));
  EXPECT_NO_THROW(check_design({a, b}));
}

TEST(Invariance, BlowUpIsRecordedAsFailure) {
  EnsembleConfig a, b;
  a.rule = GrowthRule::kpz_quadratic();
  b.rule = GrowthRule::quadratic(1.0, "copy");
  a.kernel_horizon = b.kernel_horizon = 1000;
  const auto v = invariance_suite({a, b}, {64}, ProbeSpec{}, 50, 3, 1);
  ASSERT_EQ(v.levels.size(), 1u);
  EXPECT_FALSE(v.levels[0].failure.empty());
  EXPECT_NE(v.levels[0].failure.find("seed"), std::string::npos);
  EXPECT_FALSE(v.pass);
}

TEST(Invariance, LinearRuleAcrossLaws) {
  EnsembleConfig a, b;
  a.law = NoiseLaw::rademacher();
  b.law = NoiseLaw::uniform(std::sqrt(3.0));
  a.kernel_horizon = b.kernel_horizon = 1000;
  const auto v = invariance_suite({a, b}, {16, 64}, ProbeSpec{}, 400, 5, 1);
  ASSERT_EQ(v.levels.size(), 2u);
  EXPECT_EQ(v.levels[1].pairs.size(), 4u);
  EXPECT_TRUE(v.ks_pass);
}
