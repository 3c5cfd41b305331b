#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "kpzu/errors.hpp"
#include "kpzu/lattice.hpp"
#include "kpzu/noise.hpp"
#include "kpzu/polymer.hpp"
#include "kpzu/rule.hpp"
#include "kpzu/walk_kernel.hpp"

namespace kpzu {

/// Which polymer a rule is compared with.
///
/// Paper: the polymer at the rule's own beta, with c = d4/24 + beta^3/12.
/// Reduced: the polymer whose reduced nonlinearity has the same second
/// derivative as the rule, i.e. inverse temperature 4 beta, paired with
/// c = (phi'''' - phi_poly'''')/24 = d4/24 + beta^3/3.
enum class Matching { Paper, Reduced };

inline std::string to_string(Matching m) { return m == Matching::Paper ? "paper" : "reduced"; }

inline double polymer_beta(const GrowthRule& r, Matching m) {
  return m == Matching::Paper ? r.beta() : 4.0 * r.beta();
}
inline double effective_c(const GrowthRule& r, Matching m) {
  const double b3 = r.beta() * r.beta() * r.beta();
  return m == Matching::Paper ? r.c() : r.d4() / 24.0 + b3 / 3.0;
}

struct RenormConstants {
  Matching matching = Matching::Paper;
  double beta = 0.0;  // rule beta
  double b = 0.0;     // polymer inverse temperature (before the N^{-1/4})
  double c = 0.0;     // rule c
  double c_eff = 0.0;
  double psi00 = 0.0;
  double mu2 = 0.0, mu3 = 0.0, mu4 = 0.0;
  KernelConstants kernel;
  double V = 0.0;
  double V_alt = 0.0;  // c_eff (C1 mu4 + C2 mu2^2)
  /// Height subtracted per unit of rescaled time, f_N(., N t) ~ drift * t.
  double drift_cumulant_per_t = 0.0;
  double drift_logmgf_per_t = 0.0;
  bool has_logmgf = false;
  long N = 1;
};

/// Kernel sums are shared between calls with the same horizon.
inline const KernelConstants& cached_kernel_constants(long horizon) {
  static std::mutex mu;
  static std::map<long, KernelConstants> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(horizon);
  if (it == cache.end()) it = cache.emplace(horizon, constants_c1_c2(horizon)).first;
  return it->second;
}

inline RenormConstants compute_constants(const GrowthRule& rule, const NoiseLaw& law, long N,
                                         long kernel_horizon = 10000,
                                         Matching matching = Matching::Paper) {
  if (N < 1) throw DomainError("N must be a positive integer");
  if (kernel_horizon < 1000) throw DomainError("kernel horizon must be at least 1000");
  RenormConstants k;
  k.matching = matching;
  k.beta = rule.beta();
  k.b = polymer_beta(rule, matching);
  k.c = rule.c();
  k.c_eff = effective_c(rule, matching);
  k.psi00 = rule.psi00();
  k.mu2 = law.moment(2);
  k.mu3 = law.moment(3);
  k.mu4 = law.moment(4);
  k.kernel = cached_kernel_constants(kernel_horizon);
  k.N = N;
  const auto& kc = k.kernel;
  const double s2 = kc.sum_sq * k.mu2;
  k.V = k.c_eff * (kc.C1 * (k.mu4 - k.mu2 * k.mu2) + s2 * s2);
  k.V_alt = k.c_eff * (kc.C1 * k.mu4 + kc.C2 * k.mu2 * k.mu2);
  const double n = static_cast<double>(N), b = k.b;
  k.drift_cumulant_per_t = k.V + 0.5 * b * std::sqrt(n) * k.mu2 +
                           b * b * std::pow(n, 0.25) * k.mu3 / 6.0 +
                           b * b * b * (k.mu4 - 3.0 * k.mu2 * k.mu2) / 24.0 + n * k.psi00;
  if (b != 0.0) {
    k.drift_logmgf_per_t = k.V + n * law.log_mgf(b * std::pow(n, -0.25)) / b + n * k.psi00;
    k.has_logmgf = true;
  }
  return k;
}

// ---------------------------------------------------------------------------
// K and Y
// ---------------------------------------------------------------------------

/// K(x,t) = 1/2 sum_{z, t - lag <= s <= t, s >= 1} Delta(x - z, t - s) w(z,s)
/// on the odd-parity window inside the sheet, where w is xi (beta != 0) or
/// N^{-1/4} y (beta = 0).
struct KField {
  LatticeField<double> values;
  long lag = 1;
  double epsilon = 0.0;

  double operator()(long x, long t) const { return values(x, t); }
  const Domain& domain() const noexcept { return values.domain(); }
};

inline long window_lag(long N, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  // ceil(N^eps) with a guard so that exact powers do not round up.
  return static_cast<long>(std::ceil(std::pow(static_cast<double>(N), epsilon) - 1e-12));
}

/// Sums a source field w (on a parity-0 window) against Delta with lag window.
inline KField k_field_from(const LatticeField<double>& w, const WalkKernel& kernel, long lag) {
  if (lag < 0) throw DomainError("lag must be >= 0");
  if (kernel.horizon() < lag) throw BoundsError("walk kernel horizon shorter than the K window");
  const Domain& src = w.domain();
  KField k{LatticeField<double>(src.centred(), 0.0), lag, 0.0};
  const Domain& dom = k.domain();
  for (long t = 0; t <= dom.horizon; ++t) {
    auto row = k.values.row(t);
    const long lo = dom.lo(t);
    for (std::size_t i = 0; i < row.size(); ++i) {
      const long x = lo + 2 * static_cast<long>(i);
      double sum = 0.0;
      for (long s = std::max(1L, t - lag); s <= t; ++s) {
        const long d = t - s;
        for (long z = x - d - 1; z <= x + d + 1; z += 2) sum += kernel.delta(x - z, d) * w(z, s);
      }
      row[i] = 0.5 * sum;
    }
  }
  return k;
}

inline KField k_field(const XiField& xi, const WalkKernel& kernel, double epsilon) {
  auto k = k_field_from(xi.values, kernel, window_lag(xi.N, epsilon));
  k.epsilon = epsilon;
  return k;
}

/// The beta = 0 variant: K built from N^{-1/4} y.
inline KField k_field_linear(const NoiseSheet& noise, long N, const WalkKernel& kernel,
                             double epsilon) {
  LatticeField<double> w(noise.domain(), 0.0);
  const double scale = std::pow(static_cast<double>(N), -0.25);
  for (long t = 1; t <= noise.domain().horizon; ++t) {
    const auto y = noise.values.row(t);
    auto out = w.row(t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * y[i];
  }
  auto k = k_field_from(w, kernel, window_lag(N, epsilon));
  k.epsilon = epsilon;
  return k;
}

/// Y(x,t) = prefactor * sum_{z, 1 <= s <= t} p(x - z, t - s) K(z,s)^4.
struct YField {
  LatticeField<double> values;
  double prefactor = 0.0;

  double operator()(long x, long t) const { return values(x, t); }
  const Domain& domain() const noexcept { return values.domain(); }
};

/// 16 c / b^4, or c itself when b = 0.
inline double y_prefactor(double c, double b) {
  return b == 0.0 ? c : 16.0 * c / (b * b * b * b);
}

/// Forward accumulation Y(x,t) = (Y(x-1,t-1) + Y(x+1,t-1))/2 + pref K(x,t)^4.
inline YField y_field(const KField& k, double prefactor) {
  YField y{LatticeField<double>(k.domain(), 0.0), prefactor};
  for (long t = 1; t <= k.domain().horizon; ++t) {
    const auto prev = y.values.row(t - 1);
    auto cur = y.values.row(t);
    const auto kr = k.values.row(t);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const double k2 = kr[i] * kr[i];
      cur[i] = 0.5 * (prev[i] + prev[i + 1]) + prefactor * k2 * k2;
    }
  }
  return y;
}

/// Direct double sum, O(t^2) per site.
inline double y_direct(const KField& k, const WalkKernel& kernel, double prefactor, long x,
                       long t) {
  if (!k.domain().contains(x, t)) throw BoundsError("probe outside the K window");
  if (kernel.horizon() < t) throw BoundsError("walk kernel horizon shorter than t");
  double sum = 0.0;
  for (long s = 1; s <= t; ++s) {
    const long d = t - s;
    for (long z = x - d; z <= x + d; z += 2) {
      const double kv = k(z, s);
      sum += kernel.p(x - z, d) * kv * kv * kv * kv;
    }
  }
  return prefactor * sum;
}

struct YFlatness {
  /// Per time slice, sup over the window of |Y(x,t) - mean_x Y(., t)|.
  std::vector<double> sup_dev;
  /// sup over the window of |Y(x+1,t) - Y(x-1,t)|.
  double sup_diff = 0.0;
  double sup_dev_max = 0.0;
};

/// Flatness over |x| <= half_width, 1 <= t <= horizon (lattice units).
inline YFlatness y_flatness_report(const YField& y, long half_width, long horizon) {
  const Domain& dom = y.domain();
  if (horizon > dom.horizon || half_width + 2 > dom.reach(horizon)) {
    throw BoundsError("flatness window exceeds the Y window");
  }
  YFlatness rep;
  for (long t = 1; t <= horizon; ++t) {
    double sum = 0.0, lo = INFINITY, hi = -INFINITY;
    long n = 0;
    for (long x = -half_width; x <= half_width; ++x) {
      if (!dom.on_parity(x, t)) continue;
      const double v = y(x, t);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++n;
      if (x + 1 <= half_width) {
        rep.sup_diff = std::max(rep.sup_diff, std::abs(y(x + 2, t) - v));
      }
    }
    const double mean = n ? sum / n : 0.0;
    const double dev = n ? std::max(hi - mean, mean - lo) : 0.0;
    rep.sup_dev.push_back(dev);
    rep.sup_dev_max = std::max(rep.sup_dev_max, dev);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Fourth moment of K
// ---------------------------------------------------------------------------

/// Kernel sums over the K window at time t: lags 0..min(lag, t - 1).
struct WindowSums {
  double d2 = 0.0;  // sum Delta^2
  double d4 = 0.0;  // sum Delta^4
};

inline WindowSums window_sums(const WalkKernel& kernel, long lag, long t) {
  WindowSums w;
  for (long d = 0; d <= std::min(lag, t - 1); ++d) {
    for (double v : kernel.delta_row_at(d)) {
      w.d2 += v * v;
      w.d4 += v * v * v * v;
    }
  }
  return w;
}

/// (1/16)[S4 (E xi^4 - (E xi^2)^2) + (S2 E xi^2)^2].
inline double k4_formula_printed(const WindowSums& w, double e2, double e4) {
  return (w.d4 * (e4 - e2 * e2) + (w.d2 * e2) * (w.d2 * e2)) / 16.0;
}

/// E[(1/2 sum a_i xi_i)^4] for independent centred xi_i:
/// (1/16)[S4 (E xi^4 - 3 (E xi^2)^2) + 3 (S2 E xi^2)^2].
inline double k4_formula_exact(const WindowSums& w, double e2, double e4) {
  return (w.d4 * (e4 - 3.0 * e2 * e2) + 3.0 * (w.d2 * e2) * (w.d2 * e2)) / 16.0;
}

/// E xi^2 and E xi^4 for xi = e^{th y}/m(th) - 1.
inline std::pair<double, double> xi_moments(const NoiseLaw& law, double th) {
  const double m1 = law.mgf(th), m2 = law.mgf(2 * th), m3 = law.mgf(3 * th),
               m4 = law.mgf(4 * th);
  // E(Z - 1)^k with Z = e^{th y}/m1, E Z^j = m_j / m1^j
  const double z2 = m2 / (m1 * m1), z3 = m3 / (m1 * m1 * m1), z4 = m4 / (m1 * m1 * m1 * m1);
  const double e2 = z2 - 1.0;
  const double e4 = z4 - 4.0 * z3 + 6.0 * z2 - 3.0;
  return {e2, e4};
}

}  // namespace kpzu
