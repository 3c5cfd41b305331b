#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "kpzu/errors.hpp"
#include "kpzu/lattice.hpp"
#include "kpzu/noise.hpp"
#include "kpzu/walk_kernel.hpp"

namespace kpzu {

/// xi(x,t) = exp(b N^{-1/4} y(x,t)) / m(b N^{-1/4}) - 1 on a noise sheet's
/// window; row 0 is zero.
struct XiField {
  LatticeField<double> values;
  double beta = 0.0;
  long N = 1;
  NoiseLaw law = NoiseLaw::rademacher();

  double operator()(long x, long t) const { return values(x, t); }
  const Domain& domain() const noexcept { return values.domain(); }
};

inline double tilt(double beta, long N) {
  return beta * std::pow(static_cast<double>(N), -0.25);
}

inline XiField xi_field(const NoiseSheet& noise, double beta, long N) {
  if (N < 1) throw DomainError("N must be a positive integer");
  const double th = tilt(beta, N);
  const double logm = noise.law.log_mgf(th);
  if (!noise.law.in_mgf_domain(2.0 * th)) {
    throw DomainError("2 beta N^{-1/4} outside the MGF domain");
  }
  XiField xi{LatticeField<double>(noise.domain(), 0.0), beta, N, noise.law};
  for (long t = 1; t <= noise.domain().horizon; ++t) {
    const auto y = noise.values.row(t);
    auto out = xi.values.row(t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::expm1(th * y[i] - logm);
  }
  return xi;
}

/// Point-to-line polymer at inverse temperature b N^{-1/4}.
struct PolymerField {
  LatticeField<double> fpoly;
  LatticeField<double> X;      // exp(b fpoly)
  LatticeField<double> Gamma;  // (X(x-1,t-1) + X(x+1,t-1)) / 2, row 0 set to 1
  XiField xi;
  double beta = 0.0;
  long N = 1;
  std::uint64_t seed = 0;

  const Domain& domain() const noexcept { return fpoly.domain(); }
};

/// fpoly(x,t) = b^-1 log((e^{b fpoly(x-1,t-1)} + e^{b fpoly(x+1,t-1)}) / 2)
///              + N^{-1/4} y(x,t) - b^-1 log m(b N^{-1/4}).
inline PolymerField grow_polymer(const NoiseSheet& noise, double beta, long N) {
  if (beta == 0.0 || !std::isfinite(beta)) throw DomainError("polymer needs beta != 0");
  const Domain& dom = noise.domain();
  PolymerField pf{LatticeField<double>(dom, 0.0), LatticeField<double>(dom, 1.0),
                  LatticeField<double>(dom, 1.0), xi_field(noise, beta, N), beta, N,
                  noise.seed};
  const double scale = std::pow(static_cast<double>(N), -0.25);
  const double logm = noise.law.log_mgf(beta * scale);
  for (long t = 1; t <= dom.horizon; ++t) {
    const auto prev = pf.fpoly.row(t - 1);
    const auto xprev = pf.X.row(t - 1);
    const auto y = noise.values.row(t);
    auto cur = pf.fpoly.row(t);
    auto xc = pf.X.row(t);
    auto gc = pf.Gamma.row(t);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const double a = beta * prev[i], b = beta * prev[i + 1];
      const double lse = std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
      cur[i] = (lse - std::numbers::ln2 - logm) / beta + scale * y[i];
      xc[i] = std::exp(beta * cur[i]);
      gc[i] = 0.5 * (xprev[i] + xprev[i + 1]);
    }
  }
  return pf;
}

inline PolymerField grow_polymer(const NoiseLaw& law, double beta, long N,
                                 std::uint64_t seed, const Domain& bounds) {
  return grow_polymer(sample_sheet(law, seed, bounds), beta, N);
}

namespace detail {

inline void require_cone(const PolymerField& pf, const WalkKernel& k, long x, long t) {
  if (!pf.domain().contains(x, t)) {
    throw BoundsError("(" + std::to_string(x) + "," + std::to_string(t) +
                      ") outside the polymer window");
  }
  if (k.horizon() < t) throw BoundsError("walk kernel horizon shorter than t");
}

}  // namespace detail

/// 1 + sum_{z, 1 <= s <= t} p(x - z, t - s) xi(z,s) Gamma(z,s); equals X(x,t).
inline double duhamel_expand(const PolymerField& pf, const WalkKernel& k, long x, long t) {
  detail::require_cone(pf, k, x, t);
  double sum = 1.0;
  for (long s = 1; s <= t; ++s) {
    const long d = t - s;
    for (long z = x - d; z <= x + d; z += 2) sum += k.p(x - z, d) * pf.xi(z, s) * pf.Gamma(z, s);
  }
  return sum;
}

/// sum_{z, 1 <= s <= t} Delta(x - z, t - s) xi(z,s) Gamma(z,s) at an
/// odd-parity x; equals X(x+1,t) - X(x-1,t).
inline double x_difference_series(const PolymerField& pf, const WalkKernel& k, long x,
                                  long t) {
  detail::require_cone(pf, k, x - 1, t);
  detail::require_cone(pf, k, x + 1, t);
  double sum = 0.0;
  for (long s = 1; s <= t; ++s) {
    const long d = t - s;
    for (long z = x - d - 1; z <= x + d + 1; z += 2) {
      sum += k.delta(x - z, d) * pf.xi(z, s) * pf.Gamma(z, s);
    }
  }
  return sum;
}

struct LogOdds {
  double diff = 0.0;  // fpoly(x+1,t) - fpoly(x-1,t)
  double r = 0.0;     // (X(x+1,t) - X(x-1,t)) / (X(x+1,t) + X(x-1,t))
  double rhs = 0.0;   // b^-1 (log(1 + r) - log(1 - r))
};

inline double log_odds(double r, double beta) {
  return (std::log1p(r) - std::log1p(-r)) / beta;
}

inline LogOdds log_odds_diff(const PolymerField& pf, long x, long t) {
  const double xp = pf.X.at(x + 1, t), xm = pf.X.at(x - 1, t);
  LogOdds o;
  o.diff = pf.fpoly(x + 1, t) - pf.fpoly(x - 1, t);
  o.r = (xp - xm) / (xp + xm);
  o.rhs = log_odds(o.r, pf.beta);
  return o;
}

}  // namespace kpzu
