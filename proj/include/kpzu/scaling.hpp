#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "kpzu/errors.hpp"
#include "kpzu/lattice.hpp"
#include "kpzu/noise.hpp"
#include "kpzu/polymer.hpp"
#include "kpzu/renorm.hpp"
#include "kpzu/rule.hpp"
#include "kpzu/surface.hpp"
#include "kpzu/walk_kernel.hpp"

namespace kpzu {

// ---------------------------------------------------------------------------
// Interpolation
// ---------------------------------------------------------------------------

/// Corner of the triangle containing a point and its barycentric weight.
struct Corner {
  long x = 0, t = 0;
  double w = 0.0;
};

/// Triangle of the even-sublattice triangulation containing lattice-unit
/// (X, T). In shear coordinates a = (X + T)/2, b = (T - X)/2 the lattice is
/// Z^2 and every unit square is cut along its (i+1, j)-(i, j+1) diagonal.
inline std::array<Corner, 3> locate(double X, double T) {
  const double a = 0.5 * (X + T), b = 0.5 * (T - X);
  const double fi = std::floor(a), fj = std::floor(b);
  const double al = a - fi, be = b - fj;
  const long i = static_cast<long>(fi), j = static_cast<long>(fj);
  auto at = [](long p, long q, double w) { return Corner{p - q, p + q, w}; };
  if (al + be <= 1.0) {
    return {at(i, j, 1.0 - al - be), at(i + 1, j, al), at(i, j + 1, be)};
  }
  return {at(i + 1, j + 1, al + be - 1.0), at(i + 1, j, 1.0 - be), at(i, j + 1, 1.0 - al)};
}

/// Piecewise-affine interpolant of a parity-0 field at lattice-unit (X, T).
template <class Field>
double interpolate_lattice(const Field& f, const Domain& dom, double X, double T) {
  if (!(T >= 0.0) || !std::isfinite(X)) throw BoundsError("interpolation point outside the window");
  double v = 0.0;
  for (const Corner& c : locate(X, T)) {
    if (c.w == 0.0) continue;
    if (!dom.contains(c.x, c.t)) {
      throw BoundsError("interpolation corner (" + std::to_string(c.x) + "," +
                        std::to_string(c.t) + ") outside the stored window");
    }
    v += c.w * f(c.x, c.t);
  }
  return v;
}

/// Renormalised surface g(X, T) = f_N(X, T) - D T / N on the lattice, read at
/// rescaled (x, t) through (X, T) = (sqrt(N) x, N t).
class RescaledSurface {
 public:
  RescaledSurface(LatticeField<double> g, long N, double drift_per_t)
      : g_(std::move(g)), N_(N), drift_per_t_(drift_per_t) {}

  double operator()(double x, double t) const {
    const double n = static_cast<double>(N_);
    return interpolate_lattice(g_, g_.domain(), std::sqrt(n) * x, n * t);
  }
  double lattice(long X, long T) const { return g_.at(X, T); }
  long N() const noexcept { return N_; }
  double drift_per_t() const noexcept { return drift_per_t_; }
  const LatticeField<double>& values() const noexcept { return g_; }

 private:
  LatticeField<double> g_;
  long N_;
  double drift_per_t_;
};

inline RescaledSurface rescale(const SurfaceField& s, const RenormConstants& k, DriftMode mode) {
  if (k.N != s.N) throw DesignError("constants computed for a different N");
  double D = 0.0;
  if (mode == DriftMode::LogMgf) {
    if (!k.has_logmgf) throw ModeError("logmgf renormalisation needs beta != 0");
    D = k.drift_logmgf_per_t;
  } else if (mode == DriftMode::Cumulant) {
    D = k.drift_cumulant_per_t;
  } else {
    throw ModeError("rescale needs the cumulant or logmgf mode");
  }
  LatticeField<double> g(s.domain(), 0.0);
  const double per_step = s.psi00 + s.drift_per_step - D / static_cast<double>(s.N);
  for (long t = 0; t <= s.domain().horizon; ++t) {
    const auto src = s.heights.row(t);
    auto dst = g.row(t);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] + per_step * double(t);
  }
  return RescaledSurface(std::move(g), s.N, D);
}

/// The polymer is its own renormalised surface.
inline RescaledSurface rescale(const PolymerField& pf) {
  return RescaledSurface(pf.fpoly, pf.N, 0.0);
}

// ---------------------------------------------------------------------------
// Coupling
// ---------------------------------------------------------------------------

struct CouplingOptions {
  double a = 1.0;  // |x| <= a N
  double b = 1.0;  // t <= b N
  double epsilon = 0.008;
  Matching matching = Matching::Reduced;
};

/// delta(x,t) = f(x,t) - fpoly(x,t) - Y(x,t-1) on the even window.
///
/// Y lives on the odd sublattice; the Y(x, t-1) term is the heat-kernel
/// accumulation of every K^4 increment that has reached (x, t).
struct CouplingField {
  LatticeField<double> delta;
  double sup_delta = 0.0;
  double sup_r_minus_k = 0.0;
  double sup_fourth_power = 0.0;
  YFlatness flatness;
  double polymer_beta = 0.0;
  double y_prefactor = 0.0;
  long N = 1;
  long lag = 1;
  std::uint64_t seed = 0;
};

struct RatioReport {
  double sup_r_minus_k = 0.0;
  /// sup |diff^4 - 16 r^4 / b^4|
  double sup_fourth_power = 0.0;
};

/// r(x,t) against K(x,t) over the odd sites with |x| <= half_width,
/// 1 <= t <= horizon.
inline RatioReport ratio_vs_K_diagnostic(const PolymerField& pf, const KField& k,
                                         long half_width, long horizon) {
  RatioReport rep;
  const Domain& kd = k.domain();
  const double b4 = std::pow(pf.beta, 4);
  for (long t = 1; t <= horizon; ++t) {
    for (long x = -half_width; x <= half_width; ++x) {
      if (!kd.contains(x, t)) continue;
      const auto o = log_odds_diff(pf, x, t);
      rep.sup_r_minus_k = std::max(rep.sup_r_minus_k, std::abs(o.r - k(x, t)));
      const double r2 = o.r * o.r, d2 = o.diff * o.diff;
      rep.sup_fourth_power = std::max(rep.sup_fourth_power, std::abs(d2 * d2 - 16.0 * r2 * r2 / b4));
    }
  }
  return rep;
}

inline Domain coupling_window(long N, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("coupling window needs a, b > 0");
  return Domain{static_cast<long>(std::ceil(a * N)), static_cast<long>(std::ceil(b * N)), 0};
}

inline CouplingField coupling_delta(const GrowthRule& rule, const NoiseLaw& law, long N,
                                    std::uint64_t seed, const CouplingOptions& opt = {}) {
  const Domain dom = coupling_window(N, opt.a, opt.b);
  const long X = dom.half_width, T = dom.horizon;
  const NoiseSheet sheet = sample_sheet(law, seed, dom);
  const double bp = polymer_beta(rule, opt.matching);
  const double ce = effective_c(rule, opt.matching);
  const WalkKernel kernel(window_lag(N, opt.epsilon));

  CouplingField out;
  out.N = N;
  out.seed = seed;
  out.polymer_beta = bp;
  out.y_prefactor = y_prefactor(ce, bp);

  std::optional<SurfaceField> f;
  LatticeField<double> fref;
  KField k;
  if (bp != 0.0) {
    f = grow(rule, sheet, N, {DriftMode::LogMgf, bp, 0.0});
    PolymerField pf = grow_polymer(sheet, bp, N);
    k = k_field(pf.xi, kernel, opt.epsilon);
    const auto ratio = ratio_vs_K_diagnostic(pf, k, X, T);
    out.sup_r_minus_k = ratio.sup_r_minus_k;
    out.sup_fourth_power = ratio.sup_fourth_power;
    fref = std::move(pf.fpoly);
  } else {
    f = grow(rule, sheet, N, {});
    fref = grow(GrowthRule::linear(), sheet, N, {}).heights;
    k = k_field_linear(sheet, N, kernel, opt.epsilon);
  }
  out.lag = k.lag;
  const YField y = y_field(k, out.y_prefactor);
  out.flatness = y_flatness_report(y, std::max(0L, X - 3), T);

  out.delta = LatticeField<double>(dom, 0.0);
  for (long t = 1; t <= T; ++t) {
    const long lo = dom.lo(t);
    auto row = out.delta.row(t);
    for (std::size_t i = 0; i < row.size(); ++i) {
      const long x = lo + 2 * static_cast<long>(i);
      const double d = (*f)(x, t) - fref(x, t) - y(x, t - 1);
      row[i] = d;
      if (std::abs(x) <= X) out.sup_delta = std::max(out.sup_delta, std::abs(d));
    }
  }
  return out;
}

}  // namespace kpzu
