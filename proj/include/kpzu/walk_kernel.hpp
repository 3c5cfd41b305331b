#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "kpzu/errors.hpp"
#include "kpzu/noise.hpp"
#include "kpzu/power_series.hpp"

namespace kpzu {

/// Heat kernel of the simple symmetric random walk and its spatial
/// difference Delta(x, t) = p(x + 1, t) - p(x - 1, t).
///
/// Row t of p is stored on x = -t, -t + 2, ..., t and row t of Delta on
/// x = -t - 1, ..., t + 1; all other entries vanish.
class WalkKernel {
 public:
  /// Entry budget for the tabulated kernel (two triangular tables).
  static constexpr std::size_t kMaxEntries = std::size_t{1} << 26;

  WalkKernel() : WalkKernel(0) {}

  explicit WalkKernel(long horizon) : horizon_(horizon) {
    if (horizon < 0) throw DomainError("kernel horizon must be >= 0");
    const auto T = static_cast<std::size_t>(horizon);
    if ((T + 1) * (T + 3) > kMaxEntries) {
      throw CapacityError("walk kernel horizon " + std::to_string(horizon) +
                          " exceeds the tabulation budget; use the streaming "
                          "constants instead");
    }
    p_.resize(T + 1);
    d_.resize(T + 1);
    p_[0] = {1.0};
    for (std::size_t t = 1; t <= T; ++t) {
      const auto& prev = p_[t - 1];
      auto& row = p_[t];
      row.assign(t + 1, 0.0);
      // p(x, t) = (p(x - 1, t - 1) + p(x + 1, t - 1)) / 2
      for (std::size_t i = 0; i <= t; ++i) {
        const double left = i >= 1 ? prev[i - 1] : 0.0;
        const double right = i < t ? prev[i] : 0.0;
        row[i] = 0.5 * (left + right);
      }
    }
    for (std::size_t t = 0; t <= T; ++t) d_[t] = delta_row(p_[t]);
  }

  long horizon() const noexcept { return horizon_; }

  double p(long x, long t) const noexcept {
    if (t < 0 || t > horizon_ || std::labs(x) > t || ((x + t) & 1)) return 0.0;
    return p_[t][static_cast<std::size_t>((x + t) / 2)];
  }

  double delta(long x, long t) const noexcept {
    if (t < 0 || t > horizon_ || std::labs(x) > t + 1 || !((x + t) & 1)) return 0.0;
    return d_[t][static_cast<std::size_t>((x + t + 1) / 2)];
  }

  /// Row t of p on x = -t, -t + 2, ..., t.
  const std::vector<double>& p_row(long t) const { return p_.at(t); }
  /// Row t of Delta on x = -t - 1, -t + 1, ..., t + 1.
  const std::vector<double>& delta_row_at(long t) const { return d_.at(t); }

  /// Delta row from a p row (p on -t..t step 2 -> Delta on -t-1..t+1 step 2).
  static std::vector<double> delta_row(const std::vector<double>& prow) {
    const std::size_t n = prow.size();
    std::vector<double> d(n + 1, 0.0);
    // Delta(x) = p(x + 1) - p(x - 1); entry j sits at x = -t - 1 + 2 j.
    for (std::size_t j = 0; j <= n; ++j) {
      const double plus = j < n ? prow[j] : 0.0;
      const double minus = j >= 1 ? prow[j - 1] : 0.0;
      d[j] = plus - minus;
    }
    return d;
  }

 private:
  long horizon_;
  std::vector<std::vector<double>> p_;
  std::vector<std::vector<double>> d_;
};

inline WalkKernel build_kernel(long horizon) { return WalkKernel(horizon); }

/// Kernel sums and the truncation report that accompanies them.
struct KernelConstants {
  long horizon = 0;
  double C1 = 0.0;      // sum_{x, t <= T} Delta^4
  double C2 = 0.0;      // sum_sq^2 - C1
  double sum_sq = 0.0;  // sum_{x, t <= T} Delta^2
  /// sup over 1 <= t <= T of t^{3/2} sum_x Delta(x, t)^2.
  double fitted_decay = 0.0;
  /// Constant C used for the tail: max(fitted_decay, 2/sqrt(pi)).
  double decay_constant = 0.0;
  double sum_sq_tail_bound = 0.0;  // bound on sum over t > T of Delta^2
  double C1_tail_bound = 0.0;      // 4 x the above
  /// C2 over the infinite horizon lies in [C2 - C2_tail_lower, C2 + C2_tail_upper].
  double C2_tail_lower = 0.0;
  double C2_tail_upper = 0.0;
};

/// Streams the kernel row by row (memory O(T)) and accumulates the sums.
inline KernelConstants constants_c1_c2(long horizon) {
  if (horizon < 1) throw DomainError("constants need horizon >= 1");
  KernelConstants k;
  k.horizon = horizon;
  std::vector<double> row{1.0}, next;
  row.reserve(static_cast<std::size_t>(horizon) + 2);
  next.reserve(static_cast<std::size_t>(horizon) + 2);
  for (long t = 0; t <= horizon; ++t) {
    if (t > 0) {
      next.assign(row.size() + 1, 0.0);
      for (std::size_t i = 0; i < next.size(); ++i) {
        const double left = i >= 1 ? row[i - 1] : 0.0;
        const double right = i < row.size() ? row[i] : 0.0;
        next[i] = 0.5 * (left + right);
      }
      row.swap(next);
    }
    double s2 = 0.0, s4 = 0.0;
    const std::size_t n = row.size();
    for (std::size_t j = 0; j <= n; ++j) {
      const double d = (j < n ? row[j] : 0.0) - (j >= 1 ? row[j - 1] : 0.0);
      const double d2 = d * d;
      s2 += d2;
      s4 += d2 * d2;
    }
    k.sum_sq += s2;
    k.C1 += s4;
    if (t >= 1) {
      k.fitted_decay = std::max(k.fitted_decay, std::pow(double(t), 1.5) * s2);
    }
  }
  k.C2 = k.sum_sq * k.sum_sq - k.C1;
  // sum_x Delta(x, t)^2 <= (2 / sqrt(pi)) t^{-3/2} for every t >= 1, and
  // sum_{t > T} t^{-3/2} <= 2 / sqrt(T).
  k.decay_constant = std::max(k.fitted_decay, 2.0 / std::sqrt(std::numbers::pi));
  k.sum_sq_tail_bound = k.decay_constant * 2.0 / std::sqrt(double(horizon));
  k.C1_tail_bound = 4.0 * k.sum_sq_tail_bound;
  const double s = k.sum_sq, tau = k.sum_sq_tail_bound;
  k.C2_tail_upper = 2.0 * s * tau + tau * tau;
  k.C2_tail_lower = k.C1_tail_bound;
  return k;
}

// ---------------------------------------------------------------------------
// Generating functions of the lazy difference walk
// ---------------------------------------------------------------------------

/// P(z) = 1 - sqrt(1 - z): first-return generating function.
template <class T = double>
PowerSeries<T> series_P(std::size_t order) {
  auto s = sqrt_one_minus_z<T>(order);
  s *= T(-1);
  s[0] += T(1);
  s.set_radius_note("|z| <= 1");
  return s;
}

template <class T = double>
struct OSOPair {
  PowerSeries<T> O;
  PowerSeries<T> SO;
};

/// O(z) = (1 - z/2 - sqrt(1 - z)) / (z^2 / 8) and
/// SO(z) = z/2 + (1 - z/2 - sqrt(1 - z)) / 2, expanded to `order`.
template <class T = double>
OSOPair<T> series_O_SO(std::size_t order) {
  const auto a = sqrt_one_minus_z<T>(order + 2);
  PowerSeries<T> O(order), SO(order);
  // 1 - z/2 - sqrt(1 - z) = -sum_{k >= 2} a_k z^k
  for (std::size_t k = 0; k <= order; ++k) O[k] = T(-8) * a[k + 2];
  if (order >= 1) SO[1] = T(1) / T(2);
  for (std::size_t k = 2; k <= order; ++k) SO[k] = -a[k] / T(2);
  O.set_radius_note("|z| <= 1");
  SO.set_radius_note("|z| <= 1");
  return {std::move(O), std::move(SO)};
}

/// R(z) = -1 + 1 / sqrt(1 - z).
template <class T = double>
PowerSeries<T> series_R(std::size_t order) {
  auto r = inv_sqrt_one_minus_z<T>(order);
  r[0] -= T(1);
  return r;
}

/// E(z) = (1 - z)^{-1/2} / (1 - mu P(z)); coefficient t is E[mu^{N_t}].
template <class T = double>
PowerSeries<T> series_E(const T& mu, std::size_t order) {
  if (mu < T(1)) throw DomainError("series_E requires mu >= 1");
  auto denom = series_P<T>(order) * (-mu);
  denom[0] += T(1);
  auto e = inv_sqrt_one_minus_z<T>(order) * denom.inverse();
  e.set_radius_note("|z| < 1/mu-dependent radius");
  return e;
}

struct IntersectionMoments {
  double E_mu_Nt = 1.0;
  double E_Nt = 0.0;
  double E_Nt2 = 0.0;
};

/// Exact moments of N_t, the number of returns to 0 at times 1..t of the lazy
/// walk that stays put w.p. 1/2 and steps +-1 w.p. 1/4 each, by weighted
/// enumeration of all 3^t paths.
inline IntersectionMoments brute_intersections(int t, double mu) {
  if (t < 0) throw DomainError("t must be >= 0");
  if (t > 14) throw CapacityError("brute-force enumeration limited to t <= 14");
  IntersectionMoments m{0.0, 0.0, 0.0};
  // Depth-first over paths; weights are dyadic so the sums are exact.
  struct Frame {
    int pos, depth, returns;
    double weight;
  };
  std::vector<Frame> stack{{0, 0, 0, 1.0}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.depth == t) {
      m.E_mu_Nt += f.weight * std::pow(mu, f.returns);
      m.E_Nt += f.weight * f.returns;
      m.E_Nt2 += f.weight * double(f.returns) * f.returns;
      continue;
    }
    for (int step = -1; step <= 1; ++step) {
      const int pos = f.pos + step;
      const double w = f.weight * (step == 0 ? 0.5 : 0.25);
      stack.push_back({pos, f.depth + 1, f.returns + (pos == 0), w});
    }
  }
  return m;
}

/// Monte Carlo estimate of E[N_t] and E[N_t^2] for the lazy walk.
inline IntersectionMoments mc_intersections(int t, std::size_t samples,
                                            std::uint64_t seed) {
  CounterEngine eng(seed);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    int pos = 0, returns = 0;
    for (int s = 1; s <= t; ++s) {
      // two random bits: 00 -> -1, 11 -> +1, otherwise stay
      const auto b = eng() >> 62;
      pos += b == 0 ? -1 : (b == 3 ? 1 : 0);
      returns += pos == 0;
    }
    s1 += returns;
    s2 += double(returns) * returns;
  }
  return {std::nan(""), s1 / double(samples), s2 / double(samples)};
}

/// mu = m(2 beta N^{-1/4}) / m(beta N^{-1/4})^2, the per-intersection weight
/// of the second moment of the polymer partition function.
inline double mu_of(const NoiseLaw& law, double beta, long N) {
  if (N < 1) throw DomainError("N must be a positive integer");
  const double theta = beta * std::pow(double(N), -0.25);
  const double m1 = law.mgf(theta);
  const double m2 = law.mgf(2.0 * theta);
  const double mu = m2 / (m1 * m1);
  if (mu < 1.0 - 1e-14) {
    throw DomainError("mu < 1 violates Cauchy-Schwarz; check the law's MGF");
  }
  return std::max(mu, 1.0);
}

/// SO(n) and O(n), n = 0..order, by propagating the lazy walk on the
/// half-line: SO keeps paths strictly above 0 before time n, O keeps paths
/// at or above 0.
template <class T = double>
struct Excursions {
  std::vector<T> SO;
  std::vector<T> O;
};

template <class T = double>
Excursions<T> excursion_probabilities(std::size_t order) {
  Excursions<T> e{std::vector<T>(order + 1, T(0)), std::vector<T>(order + 1, T(0))};
  e.O[0] = T(1);
  const T half(T(1) / T(2)), quarter(T(1) / T(4));
  auto step = [&](const std::vector<T>& d) {
    std::vector<T> nd(d.size() + 1, T(0));
    for (std::size_t p = 0; p < d.size(); ++p) {
      nd[p] += half * d[p];
      nd[p + 1] += quarter * d[p];
      if (p >= 1) nd[p - 1] += quarter * d[p];
    }
    return nd;
  };
  std::vector<T> so{T(1)}, o{T(1)};
  for (std::size_t n = 1; n <= order; ++n) {
    so = step(so);
    o = step(o);
    e.SO[n] = so[0];
    e.O[n] = o[0];
    so[0] = T(0);
  }
  return e;
}

}  // namespace kpzu
