#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "kpzu/errors.hpp"
#include "kpzu/lattice.hpp"

namespace kpzu {

// ---------------------------------------------------------------------------
// Counter-based randomness
// ---------------------------------------------------------------------------

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Key for the random stream attached to lattice site (x, t) under `seed`.
/// A pure function of its arguments: no state is shared between sites.
constexpr std::uint64_t site_key(std::uint64_t seed, long x, long t) noexcept {
  std::uint64_t h = splitmix64(seed ^ 0x5851F42D4C957F2DULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(x) * 0xD6E8FEB86659FD93ULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(t) * 0xA0761D6478BD642FULL);
  return h;
}

/// Derives the seed of replica `index` from a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Short sequential stream for a single site.
class SiteStream {
 public:
  constexpr explicit SiteStream(std::uint64_t key) noexcept : key_(key) {}
  constexpr std::uint64_t next() noexcept { return splitmix64(key_ + ++ctr_); }
  /// Uniform on (0, 1), never exactly 0 or 1.
  constexpr double uniform() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

/// General-purpose engine for Monte Carlo outside the lattice
/// (satisfies UniformRandomBitGenerator).
class CounterEngine {
 public:
  using result_type = std::uint64_t;
  explicit CounterEngine(std::uint64_t seed) noexcept : key_(splitmix64(seed)) {}
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept { return splitmix64(key_ + ++ctr_); }
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

// ---------------------------------------------------------------------------
// Noise laws
// ---------------------------------------------------------------------------

enum class NoiseFamily {
  Rademacher,
  UniformCentered,
  GaussianTruncated,
  TwoPoint,
  Zero,  // debugging only: y == 0
};

inline std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::Rademacher: return "rademacher";
    case NoiseFamily::UniformCentered: return "uniform";
    case NoiseFamily::GaussianTruncated: return "gaussian-truncated";
    case NoiseFamily::TwoPoint: return "two-point";
    case NoiseFamily::Zero: return "zero";
  }
  return "unknown";
}

namespace detail {

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}
inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace detail

/// A centred noise distribution with closed-form moments and MGF.
class NoiseLaw {
 public:
  static constexpr int kMaxMoment = 8;

  static NoiseLaw rademacher() { return NoiseLaw(NoiseFamily::Rademacher, 1.0, 0.0); }

  static NoiseLaw uniform(double halfwidth) {
    if (!(halfwidth > 0.0)) throw DomainError("uniform halfwidth must be > 0");
    return NoiseLaw(NoiseFamily::UniformCentered, halfwidth, 0.0);
  }

  /// N(0, sigma^2) conditioned on |y| <= cutoff * sigma.
  static NoiseLaw gaussian_truncated(double sigma, double cutoff = 8.0) {
    if (!(sigma > 0.0) || !(cutoff > 0.0)) {
      throw DomainError("truncated gaussian needs sigma > 0 and cutoff > 0");
    }
    return NoiseLaw(NoiseFamily::GaussianTruncated, sigma, cutoff);
  }

  /// Takes the value a with probability p and -p a / (1 - p) otherwise.
  static NoiseLaw two_point(double a, double p) {
    if (!(p > 0.0 && p < 1.0) || a == 0.0 || !std::isfinite(a)) {
      throw DomainError("two-point law needs a != 0 and 0 < p < 1");
    }
    return NoiseLaw(NoiseFamily::TwoPoint, a, p);
  }

  static NoiseLaw zero() { return NoiseLaw(NoiseFamily::Zero, 0.0, 0.0); }

  NoiseFamily family() const noexcept { return family_; }
  double param1() const noexcept { return p1_; }
  double param2() const noexcept { return p2_; }
  bool is_degenerate() const noexcept { return family_ == NoiseFamily::Zero; }

  /// Largest |y| in the support.
  double support_radius() const noexcept {
    switch (family_) {
      case NoiseFamily::Rademacher: return 1.0;
      case NoiseFamily::UniformCentered: return p1_;
      case NoiseFamily::GaussianTruncated: return p1_ * p2_;
      case NoiseFamily::TwoPoint: return std::max(std::abs(p1_), std::abs(other_point()));
      case NoiseFamily::Zero: return 0.0;
    }
    return 0.0;
  }

  /// Interval on which mgf() is evaluated. All families are bounded, so the
  /// true MGF is entire; the interval keeps exp() finite in double precision.
  std::pair<double, double> mgf_domain() const noexcept {
    const double r = support_radius();
    if (r == 0.0) return {-std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity()};
    const double m = 600.0 / r;
    return {-m, m};
  }
  bool in_mgf_domain(double theta) const noexcept {
    const auto [lo, hi] = mgf_domain();
    return theta > lo && theta < hi;
  }

  /// Analytic k-th moment, 1 <= k <= 8.
  double moment(int k) const {
    if (k < 1 || k > kMaxMoment) {
      throw UnsupportedMomentError("moment order " + std::to_string(k) +
                                   " not supported for " + to_string(family_));
    }
    switch (family_) {
      case NoiseFamily::Rademacher:
        return k % 2 == 0 ? 1.0 : 0.0;
      case NoiseFamily::UniformCentered:
        return k % 2 == 0 ? std::pow(p1_, k) / (k + 1) : 0.0;
      case NoiseFamily::GaussianTruncated:
        return k % 2 == 0 ? truncated_even_moment(k) : 0.0;
      case NoiseFamily::TwoPoint:
        return p2_ * std::pow(p1_, k) + (1.0 - p2_) * std::pow(other_point(), k);
      case NoiseFamily::Zero:
        return 0.0;
    }
    return 0.0;
  }

  /// E exp(theta y).
  double mgf(double theta) const {
    if (!in_mgf_domain(theta)) {
      throw DomainError("mgf argument " + std::to_string(theta) +
                        " outside the domain of " + to_string(family_));
    }
    switch (family_) {
      case NoiseFamily::Rademacher:
        return std::cosh(theta);
      case NoiseFamily::UniformCentered: {
        const double z = p1_ * theta;
        if (std::abs(z) < 1e-4) return 1.0 + z * z / 6.0 + z * z * z * z / 120.0;
        return std::sinh(z) / z;
      }
      case NoiseFamily::GaussianTruncated: {
        const double s = p1_, c = p2_;
        const double norm = std::erf(c / std::numbers::sqrt2);
        const double mass = detail::normal_cdf(c - s * theta) -
                            detail::normal_cdf(-c - s * theta);
        return std::exp(0.5 * s * s * theta * theta) * mass / norm;
      }
      case NoiseFamily::TwoPoint:
        return p2_ * std::exp(theta * p1_) +
               (1.0 - p2_) * std::exp(theta * other_point());
      case NoiseFamily::Zero:
        return 1.0;
    }
    return 1.0;
  }

  double log_mgf(double theta) const { return std::log(mgf(theta)); }

  /// One draw from the law using the given site stream.
  double sample(SiteStream& s) const {
    switch (family_) {
      case NoiseFamily::Rademacher:
        return (s.next() >> 63) ? 1.0 : -1.0;
      case NoiseFamily::UniformCentered:
        return p1_ * (2.0 * s.uniform() - 1.0);
      case NoiseFamily::GaussianTruncated:
        for (;;) {
          const double u1 = s.uniform(), u2 = s.uniform();
          const double z = std::sqrt(-2.0 * std::log(u1)) *
                           std::cos(2.0 * std::numbers::pi * u2);
          if (std::abs(z) <= p2_) return p1_ * z;
        }
      case NoiseFamily::TwoPoint:
        return s.uniform() < p2_ ? p1_ : other_point();
      case NoiseFamily::Zero:
        return 0.0;
    }
    return 0.0;
  }

  friend bool operator==(const NoiseLaw&, const NoiseLaw&) = default;

 private:
  NoiseLaw(NoiseFamily f, double p1, double p2) : family_(f), p1_(p1), p2_(p2) {}

  double other_point() const noexcept { return -p2_ * p1_ / (1.0 - p2_); }

  // Integration by parts on [-c, c] for the standard normal:
  // I_n = -2 c^{n-1} pdf(c) + (n - 1) I_{n-2},  I_0 = erf(c / sqrt 2).
  double truncated_even_moment(int k) const {
    const double c = p2_;
    const double i0 = std::erf(c / std::numbers::sqrt2);
    double in = i0;
    for (int n = 2; n <= k; n += 2) {
      in = -2.0 * std::pow(c, n - 1) * detail::normal_pdf(c) + (n - 1) * in;
    }
    return std::pow(p1_, k) * in / i0;
  }

  NoiseFamily family_;
  double p1_;
  double p2_;
};

/// Noise value at site (x, t). Depends only on (law, seed, x, t).
inline double noise_at(const NoiseLaw& law, std::uint64_t seed, long x, long t) {
  SiteStream s(site_key(seed, x, t));
  return law.sample(s);
}

/// I.i.d. noise on a lattice window.
struct NoiseSheet {
  LatticeField<double> values;
  std::uint64_t seed = 0;
  NoiseLaw law = NoiseLaw::rademacher();

  double operator()(long x, long t) const { return values(x, t); }
  const Domain& domain() const noexcept { return values.domain(); }
};

/// Fills `bounds` with noise. Row t = 0 is left at zero: the recursion only
/// consumes noise at times t >= 1.
inline NoiseSheet sample_sheet(const NoiseLaw& law, std::uint64_t seed,
                               const Domain& bounds) {
  NoiseSheet sheet{LatticeField<double>(bounds, 0.0), seed, law};
  for (long t = 1; t <= bounds.horizon; ++t) {
    auto row = sheet.values.row(t);
    const long lo = bounds.lo(t);
    for (std::size_t i = 0; i < row.size(); ++i) {
      row[i] = noise_at(law, seed, lo + 2 * static_cast<long>(i), t);
    }
  }
  return sheet;
}

}  // namespace kpzu
