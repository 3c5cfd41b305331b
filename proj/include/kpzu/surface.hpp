#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "kpzu/errors.hpp"
#include "kpzu/lattice.hpp"
#include "kpzu/noise.hpp"
#include "kpzu/rule.hpp"

namespace kpzu {

enum class DriftMode { None, Cumulant, LogMgf };

inline std::string to_string(DriftMode m) {
  switch (m) {
    case DriftMode::None: return "none";
    case DriftMode::Cumulant: return "cumulant";
    case DriftMode::LogMgf: return "logmgf";
  }
  return "none";
}

/// Height removed per lattice step at inverse temperature b:
/// logmgf is b^-1 log m(b N^{-1/4}); cumulant is its expansion through the
/// fourth cumulant.
inline double step_drift(const NoiseLaw& law, DriftMode mode, double b, long N) {
  if (N < 1) throw DomainError("N must be a positive integer");
  if (mode == DriftMode::None) return 0.0;
  const double n = static_cast<double>(N);
  if (mode == DriftMode::LogMgf) {
    if (b == 0.0) throw ModeError("logmgf drift is undefined at beta = 0");
    return law.log_mgf(b * std::pow(n, -0.25)) / b;
  }
  const double m2 = law.moment(2), m3 = law.moment(3), m4 = law.moment(4);
  return 0.5 * b * m2 / std::sqrt(n) + b * b * m3 * std::pow(n, -0.75) / 6.0 +
         b * b * b * (m4 - 3.0 * m2 * m2) / (24.0 * n);
}

/// Heights on the even sublattice window of a noise sheet.
///
/// Stored heights are f(x, t) = f_N(x, t) - (psi00 + drift_per_step) t, where
/// f_N is the raw recursion; both offsets are kept so f_N can be recovered.
struct SurfaceField {
  LatticeField<double> heights;
  long N = 1;
  std::string rule;
  DriftMode drift = DriftMode::None;
  double drift_per_step = 0.0;
  double psi00 = 0.0;
  std::uint64_t seed = 0;

  double operator()(long x, long t) const { return heights(x, t); }
  double at(long x, long t) const { return heights.at(x, t); }
  const Domain& domain() const noexcept { return heights.domain(); }
  double raw(long x, long t) const {
    return heights.at(x, t) + (psi00 + drift_per_step) * static_cast<double>(t);
  }
};

struct GrowOptions {
  DriftMode drift = DriftMode::None;
  /// Inverse temperature of the drift; defaults to the rule's beta.
  std::optional<double> drift_beta;
  /// Flat initial height.
  double initial = 0.0;
};

namespace detail {

template <class Phi>
void evolve(LatticeField<double>& f, const LatticeField<double>& y, double scale,
            double drift, double radius, const Phi& phi) {
  const Domain& dom = f.domain();
  for (long t = 1; t <= dom.horizon; ++t) {
    const auto prev = f.row(t - 1);
    auto cur = f.row(t);
    const auto noise = y.row(t);
    const long lo = dom.lo(t);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      // parents x - 1 and x + 1 sit at indices i and i + 1 of row t - 1
      const double l = prev[i], r = prev[i + 1];
      const double u = r - l;
      if (!(std::abs(u) <= radius)) {
        throw BlowUpError("surface gradient " + std::to_string(u) + " left the rule's "
                          "neighbourhood at (" + std::to_string(lo + 2 * long(i)) + "," +
                          std::to_string(t) + "); N is too small for this rule",
                          lo + 2 * static_cast<long>(i), t);
      }
      const double v = 0.5 * (l + r) + phi(u) + scale * noise[i] - drift;
      if (!std::isfinite(v)) {
        throw BlowUpError("non-finite height at (" + std::to_string(lo + 2 * long(i)) +
                          "," + std::to_string(t) + ")", lo + 2 * static_cast<long>(i), t);
      }
      cur[i] = v;
    }
  }
}

}  // namespace detail

/// Runs f(x,t) = (f(x-1,t-1) + f(x+1,t-1))/2 + phi(f(x+1,t-1) - f(x-1,t-1))
///             + N^{-1/4} y(x,t) - drift
/// over the sheet's window.
inline SurfaceField grow(const GrowthRule& rule, const NoiseSheet& noise, long N,
                         const GrowOptions& opt = {}) {
  if (N < 1) throw DomainError("N must be a positive integer");
  const Domain& dom = noise.domain();
  if (dom.parity != 0) throw BoundsError("surfaces live on the even sublattice");
  SurfaceField s;
  s.heights = LatticeField<double>(dom, 0.0);
  for (auto& h : s.heights.row(0)) h = opt.initial;
  s.N = N;
  s.rule = rule.name();
  s.drift = opt.drift;
  s.drift_per_step =
      step_drift(noise.law, opt.drift, opt.drift_beta.value_or(rule.beta()), N);
  s.psi00 = rule.psi00();
  s.seed = noise.seed;

  const double scale = std::pow(static_cast<double>(N), -0.25);
  const double radius = rule.phi_radius();
  const double a = rule.param();
  switch (rule.kind()) {
    case RuleKind::Linear:
      detail::evolve(s.heights, noise.values, scale, s.drift_per_step, radius,
                     [](double) { return 0.0; });
      break;
    case RuleKind::Quadratic:
      detail::evolve(s.heights, noise.values, scale, s.drift_per_step, radius,
                     [a](double u) { return a * u * u; });
      break;
    default:
      detail::evolve(s.heights, noise.values, scale, s.drift_per_step, radius,
                     [&rule](double u) { return rule.phi(u); });
      break;
  }
  return s;
}

}  // namespace kpzu
