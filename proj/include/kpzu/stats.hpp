#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "kpzu/errors.hpp"
#include "kpzu/noise.hpp"
#include "kpzu/parallel.hpp"
#include "kpzu/renorm.hpp"
#include "kpzu/rule.hpp"
#include "kpzu/scaling.hpp"
#include "kpzu/surface.hpp"

namespace kpzu {

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

struct Digest {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double q1 = 0.0, median = 0.0, q3 = 0.0;

  double stderr_mean() const { return count ? std::sqrt(variance / double(count)) : 0.0; }
};

/// Linear-interpolated quantile of sorted data (type 7).
inline double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = q * double(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, s.size() - 1);
  const double frac = h - double(lo);
  if (frac == 0.0 || s[lo] == s[hi]) return s[lo];
  return s[lo] + frac * (s[hi] - s[lo]);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.5);
}

inline Digest digest(const std::vector<double>& x) {
  Digest d;
  d.count = x.size();
  if (x.empty()) return d;
  d.mean = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    const double e = v - d.mean;
    m2 += e * e;
    m3 += e * e * e;
  }
  const double n = double(x.size());
  d.variance = x.size() > 1 ? m2 / (n - 1) : 0.0;
  d.skewness = m2 > 0 ? (m3 / n) / std::pow(m2 / n, 1.5) : 0.0;
  std::vector<double> s(x);
  std::sort(s.begin(), s.end());
  d.q1 = quantile_sorted(s, 0.25);
  d.median = quantile_sorted(s, 0.5);
  d.q3 = quantile_sorted(s, 0.75);
  return d;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov
// ---------------------------------------------------------------------------

/// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-18) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KSResult {
  double D = 0.0;
  double p = 1.0;
};

inline KSResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 50 || b.size() < 50) {
    throw SizeError("two-sample KS needs at least 50 points per sample (got " +
                    std::to_string(a.size()) + " and " + std::to_string(b.size()) + ")");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = double(a.size()), nb = double(b.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    D = std::max(D, std::abs(double(i) / na - double(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {D, kolmogorov_q((ne + 0.12 + 0.11 / ne) * D)};
}

/// One-sample KS against a continuous CDF.
template <class Cdf>
KSResult ks_one_sample(std::vector<double> a, const Cdf& cdf) {
  if (a.size() < 50) throw SizeError("one-sample KS needs at least 50 points");
  std::sort(a.begin(), a.end());
  const double n = double(a.size());
  double D = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double F = cdf(a[i]);
    D = std::max({D, double(i + 1) / n - F, F - double(i) / n});
  }
  const double ne = std::sqrt(n);
  return {D, kolmogorov_q((ne + 0.12 + 0.11 / ne) * D)};
}

/// Holm step-down adjusted p-values, in the input order.
inline std::vector<double> holm_adjust(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return p[x] < p[y]; });
  std::vector<double> adj(m);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    running = std::max(running, std::min(1.0, double(m - k) * p[order[k]]));
    adj[order[k]] = running;
  }
  return adj;
}

/// Standard normal draws from a counter engine (Box-Muller).
inline std::vector<double> normal_sample(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  CounterEngine eng(seed);
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const double r = std::sqrt(-2.0 * std::log(eng.uniform()));
    const double a = 2.0 * std::numbers::pi * eng.uniform();
    out.push_back(sd * r * std::cos(a));
    if (out.size() < n) out.push_back(sd * r * std::sin(a));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

struct Probe {
  double x = 0.0;
  double t = 0.0;
};

enum class Observable { FTilde, ExpBetaFTilde };

struct ProbeSpec {
  std::vector<Probe> points{{0.0, 0.25}, {0.0, 1.0}, {0.5, 0.5}, {-0.5, 1.0}};
  Observable observable = Observable::FTilde;
};

/// One (rule, law, N) configuration of the rescaled surface.
struct EnsembleConfig {
  GrowthRule rule = GrowthRule::linear();
  NoiseLaw law = NoiseLaw::rademacher();
  long N = 64;
  Matching matching = Matching::Reduced;
  long kernel_horizon = 10000;
  std::string label;
};

struct EnsembleSummary {
  std::string label;
  long N = 0;
  std::size_t n_replicas = 0;
  std::uint64_t seed0 = 0;
  std::vector<Probe> probes;
  std::vector<std::vector<double>> samples;  // [probe][replica]
  std::vector<Digest> digests;
  double drift_per_t = 0.0;
};

/// Window holding every probe's interpolation triangle.
inline Domain probe_window(const ProbeSpec& probes, long N) {
  double xmax = 0.0, tmax = 0.0;
  for (const auto& p : probes.points) {
    if (!(p.t >= 0.0)) throw DomainError("probe times must be >= 0");
    xmax = std::max(xmax, std::abs(p.x));
    tmax = std::max(tmax, p.t);
  }
  const double n = double(N);
  return Domain{static_cast<long>(std::ceil(xmax * std::sqrt(n))) + 2,
                static_cast<long>(std::ceil(tmax * n)) + 1, 0};
}

/// Rescaled surface of one replica.
inline RescaledSurface replica_surface(const EnsembleConfig& cfg, const RenormConstants& k,
                                       const NoiseSheet& sheet) {
  if (k.b != 0.0) {
    const auto s = grow(cfg.rule, sheet, cfg.N, {DriftMode::LogMgf, k.b, 0.0});
    return rescale(s, k, DriftMode::LogMgf);
  }
  const auto s = grow(cfg.rule, sheet, cfg.N, {});
  return rescale(s, k, DriftMode::Cumulant);
}

/// Rethrows a replica failure with the replica's seed in the message.
inline void annotate_and_rethrow(std::size_t replica, std::uint64_t seed) {
  const std::string tag =
      " [replica " + std::to_string(replica) + ", seed " + std::to_string(seed) + "]";
  try {
    throw;
  } catch (const BlowUpError& e) {
    throw BlowUpError(e.what() + tag, e.x(), e.t());
  } catch (const CapacityError& e) {
    throw CapacityError(e.what() + tag);
  } catch (const DomainError& e) {
    throw DomainError(e.what() + tag);
  }
}

inline EnsembleSummary run_ensemble(const EnsembleConfig& cfg, const ProbeSpec& probes,
                                    std::size_t n, std::uint64_t seed0, unsigned threads = 0) {
  if (n < 2) throw SizeError("an ensemble needs at least 2 replicas");
  const RenormConstants k =
      compute_constants(cfg.rule, cfg.law, cfg.N, cfg.kernel_horizon, cfg.matching);
  const Domain dom = probe_window(probes, cfg.N);
  EnsembleSummary sum;
  sum.label = cfg.label.empty() ? cfg.rule.name() + "/" + to_string(cfg.law.family()) : cfg.label;
  sum.N = cfg.N;
  sum.n_replicas = n;
  sum.seed0 = seed0;
  sum.probes = probes.points;
  sum.drift_per_t = k.b != 0.0 ? k.drift_logmgf_per_t : k.drift_cumulant_per_t;
  sum.samples.assign(probes.points.size(), std::vector<double>(n));
  parallel_for(n, threads, [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(seed0, r);
    try {
      const auto sheet = sample_sheet(cfg.law, seed, dom);
      const auto f = replica_surface(cfg, k, sheet);
      for (std::size_t p = 0; p < probes.points.size(); ++p) {
        double v = f(probes.points[p].x, probes.points[p].t);
        if (probes.observable == Observable::ExpBetaFTilde) v = std::exp(k.b * v);
        sum.samples[p][r] = v;
      }
    } catch (...) {
      annotate_and_rethrow(r, seed);
    }
  });
  for (const auto& s : sum.samples) sum.digests.push_back(digest(s));
  return sum;
}

// ---------------------------------------------------------------------------
// Invariance
// ---------------------------------------------------------------------------

struct PairResult {
  std::size_t a = 0, b = 0;  // config indices
  std::size_t probe = 0;
  double D = 0.0;
  double p = 1.0;
  double p_holm = 1.0;
};

struct InvarianceLevel {
  long N = 0;
  std::vector<EnsembleSummary> ensembles;  // one per config
  std::vector<PairResult> pairs;
  double median_D = 0.0;
  double min_p_holm = 1.0;
  std::string failure;  // non-empty if a replica failed
};

struct InvarianceVerdict {
  std::vector<InvarianceLevel> levels;  // along N_grid
  bool ks_pass = false;                 // Holm-adjusted p > alpha at the largest N
  bool trend_pass = false;              // median D strictly decreasing
  bool pass = false;
  double alpha = 0.01;
};

/// Rejects comparison sets whose members have different scaling limits.
inline void check_design(const std::vector<EnsembleConfig>& configs) {
  if (configs.size() < 2) throw DesignError("invariance needs at least two configurations");
  const double beta = configs[0].rule.beta(), mu2 = configs[0].law.moment(2);
  for (const auto& c : configs) {
    if (std::abs(c.rule.beta() - beta) > 1e-6 * std::max(1.0, std::abs(beta))) {
      throw DesignError("rules have different beta (" + std::to_string(beta) + " vs " +
                        std::to_string(c.rule.beta()) + "); their limits differ");
    }
    if (std::abs(c.law.moment(2) - mu2) > 1e-9 * std::max(1.0, mu2)) {
      throw DesignError("laws have different second moments (" + std::to_string(mu2) +
                        " vs " + std::to_string(c.law.moment(2)) + "); their limits differ");
    }
  }
}

inline InvarianceVerdict invariance_suite(std::vector<EnsembleConfig> configs,
                                          const std::vector<long>& N_grid,
                                          const ProbeSpec& probes, std::size_t n,
                                          std::uint64_t seed0, unsigned threads = 0,
                                          double alpha = 0.01) {
  check_design(configs);
  if (N_grid.empty()) throw DomainError("empty N grid");
  InvarianceVerdict v;
  v.alpha = alpha;
  for (std::size_t g = 0; g < N_grid.size(); ++g) {
    InvarianceLevel lvl;
    lvl.N = N_grid[g];
    try {
      for (std::size_t c = 0; c < configs.size(); ++c) {
        configs[c].N = lvl.N;
        const auto s = derive_seed(derive_seed(seed0, 1000 + g), c);
        lvl.ensembles.push_back(run_ensemble(configs[c], probes, n, s, threads));
      }
    } catch (const Error& e) {
      lvl.failure = e.what();
      v.levels.push_back(std::move(lvl));
      continue;
    }
    std::vector<double> ps, Ds;
    for (std::size_t a = 0; a < configs.size(); ++a) {
      for (std::size_t b = a + 1; b < configs.size(); ++b) {
        for (std::size_t p = 0; p < probes.points.size(); ++p) {
          const auto r = ks_two_sample(lvl.ensembles[a].samples[p], lvl.ensembles[b].samples[p]);
          lvl.pairs.push_back({a, b, p, r.D, r.p, 1.0});
          ps.push_back(r.p);
          Ds.push_back(r.D);
        }
      }
    }
    const auto adj = holm_adjust(ps);
    for (std::size_t i = 0; i < adj.size(); ++i) lvl.pairs[i].p_holm = adj[i];
    lvl.min_p_holm = adj.empty() ? 1.0 : *std::min_element(adj.begin(), adj.end());
    lvl.median_D = median(Ds);
    v.levels.push_back(std::move(lvl));
  }
  const auto& last = v.levels.back();
  v.ks_pass = last.failure.empty() && last.min_p_holm > alpha;
  v.trend_pass = true;
  for (std::size_t g = 0; g < v.levels.size(); ++g) {
    if (!v.levels[g].failure.empty()) v.trend_pass = false;
    if (g > 0 && !(v.levels[g].median_D < v.levels[g - 1].median_D)) v.trend_pass = false;
  }
  v.pass = v.ks_pass && v.trend_pass;
  return v;
}

}  // namespace kpzu
