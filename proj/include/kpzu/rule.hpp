#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "kpzu/errors.hpp"
#include "kpzu/expression.hpp"

namespace kpzu {

/// Richardson-extrapolated finite-difference estimate.
struct DerivativeEstimate {
  double value = 0.0;
  double spread = 0.0;  // disagreement of the two estimates it was picked from
};

namespace detail {

// Central stencils with O(h^2) leading error, one per derivative order.
template <class F>
double central_difference(const F& f, int order, double h) {
  switch (order) {
    case 1: return (f(h) - f(-h)) / (2 * h);
    case 2: return (f(h) - 2 * f(0.0) + f(-h)) / (h * h);
    case 3: return (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h * h * h);
    case 4: {
      const double h4 = h * h * h * h;
      return (f(2 * h) - 4 * f(h) + 6 * f(0.0) - 4 * f(-h) + f(-2 * h)) / h4;
    }
    case 5: {
      const double h5 = h * h * h * h * h;
      return (f(3 * h) - 4 * f(2 * h) + 5 * f(h) - 5 * f(-h) + 4 * f(-2 * h) -
              f(-3 * h)) / (2 * h5);
    }
    default: throw DerivativeExtractionError("unsupported derivative order");
  }
}

}  // namespace detail

/// Derivative of f at 0 from steps h = 2^-4 .. 2^-9 and three Richardson
/// levels. Coarse steps lose to truncation and fine steps to round-off, so
/// the answer is the adjacent pair (over every level) that agrees best.
template <class F>
DerivativeEstimate richardson_derivative(const F& f, int order) {
  constexpr int kSteps = 6;
  std::vector<std::vector<double>> table(4);
  for (int i = 0; i < kSteps; ++i) {
    table[0].push_back(detail::central_difference(f, order, std::ldexp(1.0, -4 - i)));
  }
  double factor = 4.0;
  for (int lvl = 1; lvl <= 3; ++lvl, factor *= 4.0) {
    const auto& prev = table[lvl - 1];
    for (std::size_t i = 0; i + 1 < prev.size(); ++i) {
      table[lvl].push_back((factor * prev[i + 1] - prev[i]) / (factor - 1.0));
    }
  }
  DerivativeEstimate best{std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::infinity()};
  for (int lvl = 1; lvl <= 3; ++lvl) {
    const auto& row = table[lvl];
    for (std::size_t i = 0; i + 1 < row.size(); ++i) {
      const double d = std::abs(row[i + 1] - row[i]);
      if (std::isfinite(d) && d < best.spread) best = {row[i + 1], d};
    }
  }
  return best;
}

enum class RuleKind { Linear, Quadratic, Sqrt, Polymer, Custom };

/// A growth rule psi(u, v) with its Taylor data at the origin.
///
/// phi(u) = psi(u/2, -u/2) - psi(0, 0), so phi(0) = 0 always; psi00 keeps the
/// subtracted constant for anyone reconstructing the raw heights.
class GrowthRule {
 public:
  /// psi = (u + v)/2.
  static GrowthRule linear() {
    GrowthRule r(RuleKind::Linear, "linear", 0.0);
    r.set_constants(0.0, 0.0);
    return r;
  }

  /// psi = (u + v)/2 + a (u - v)^2, so phi(u) = a u^2 and beta = 2a.
  static GrowthRule quadratic(double a, std::string name = {}) {
    GrowthRule r(RuleKind::Quadratic, name.empty() ? "quadratic" : std::move(name), a);
    r.set_constants(2 * a, 0.0);
    return r;
  }

  /// psi = (u + v)/2 + (u - v)^2.
  static GrowthRule kpz_quadratic() { return quadratic(1.0, "kpz-quadratic"); }

  /// psi = (u + v)/2 + sqrt(1 + (u - v)^2).
  static GrowthRule kpz_sqrt() {
    GrowthRule r(RuleKind::Sqrt, "kpz-sqrt", 0.0);
    r.psi00_ = 1.0;
    r.set_constants(1.0, -3.0);
    return r;
  }

  /// Log-sum-exp rule psi = b^-1 log((e^{b u} + e^{b v}) / 2) with b = 4 beta,
  /// which has phi''(0) = beta and phi''''(0) = -8 beta^3. It is the polymer
  /// recursion at inverse temperature 4 beta.
  static GrowthRule polymer(double beta) {
    if (beta == 0.0 || !std::isfinite(beta)) {
      throw InadmissibleRuleError("polymer rule needs a finite beta != 0");
    }
    GrowthRule r(RuleKind::Polymer, "polymer", beta);
    r.set_constants(beta, -8.0 * beta * beta * beta);
    return r;
  }

  /// User expression in u and v. beta and d4 are read off phi numerically;
  /// a supplied beta overrides the numerical one.
  static GrowthRule custom(const std::string& expr,
                           std::optional<double> beta = std::nullopt) {
    GrowthRule r(RuleKind::Custom, "custom", 0.0);
    r.expr_ = Expression::parse(expr);
    r.psi00_ = r.expr_(0.0, 0.0);
    if (!std::isfinite(r.psi00_)) {
      throw InadmissibleRuleError("custom rule is not finite at the origin");
    }
    r.validate();
    r.extract_from_phi(beta);
    return r;
  }

  /// Same psi but with beta and d4 re-extracted by finite differences.
  GrowthRule numerically_extracted() const {
    GrowthRule r = *this;
    r.extract_from_phi(std::nullopt);
    return r;
  }

  RuleKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double param() const noexcept { return param_; }
  const std::string& expression() const noexcept { return expr_.source(); }

  double psi(double u, double v) const {
    switch (kind_) {
      case RuleKind::Linear: return 0.5 * (u + v);
      case RuleKind::Quadratic: return 0.5 * (u + v) + param_ * (u - v) * (u - v);
      case RuleKind::Sqrt: return 0.5 * (u + v) + std::sqrt(1.0 + (u - v) * (u - v));
      case RuleKind::Polymer: {
        const double b = 4.0 * param_;
        const double hi = b > 0 ? std::max(u, v) : std::min(u, v);
        return hi + (std::log1p(std::exp(-std::abs(b * (u - v)))) - std::numbers::ln2) / b;
      }
      case RuleKind::Custom: return expr_(u, v);
    }
    return 0.0;
  }

  /// phi(u) = psi(u/2, -u/2) - psi(0, 0).
  double phi(double u) const {
    switch (kind_) {
      case RuleKind::Linear: return 0.0;
      case RuleKind::Quadratic: return param_ * u * u;
      case RuleKind::Sqrt: return u * u / (std::sqrt(1.0 + u * u) + 1.0);
      case RuleKind::Polymer: {
        // b^-1 log cosh(b u / 2), b = 4 beta
        const double b = 4.0 * param_;
        const double a = std::abs(0.5 * b * u);
        return (a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2) / b;
      }
      case RuleKind::Custom: return expr_(0.5 * u, -0.5 * u) - psi00_;
    }
    return 0.0;
  }

  double psi00() const noexcept { return psi00_; }
  double beta() const noexcept { return beta_; }
  double d4() const noexcept { return d4_; }
  double c() const noexcept { return c_; }

  /// |phi argument| beyond which grow() reports a blow-up.
  double phi_radius() const noexcept { return phi_radius_; }
  GrowthRule& set_phi_radius(double r) {
    if (!(r > 0.0)) throw DomainError("phi radius must be positive");
    phi_radius_ = r;
    return *this;
  }

  /// Checks shift equivariance and symmetry on a grid of half-width 0.5.
  void validate() const {
    static constexpr std::array<double, 3> shifts{-0.3, 0.1, 0.25};
    for (int i = -4; i <= 4; ++i) {
      for (int j = -4; j <= 4; ++j) {
        const double u = 0.125 * i, v = 0.125 * j;
        const double p = psi(u, v);
        if (!std::isfinite(p)) {
          throw InadmissibleRuleError(name_ + ": psi not finite at (" +
                                      std::to_string(u) + "," + std::to_string(v) + ")");
        }
        const double tol = 1e-12 * std::max(1.0, std::abs(p));
        if (std::abs(p - psi(v, u)) > tol) {
          throw InadmissibleRuleError(name_ + ": psi(u,v) != psi(v,u) at (" +
                                      std::to_string(u) + "," + std::to_string(v) + ")");
        }
        for (double h : shifts) {
          if (std::abs(psi(u + h, v + h) - p - h) > 1e-10 * std::max(1.0, std::abs(p))) {
            throw InadmissibleRuleError(name_ + ": psi(u+h,v+h) != psi(u,v)+h at (" +
                                        std::to_string(u) + "," + std::to_string(v) +
                                        "), h=" + std::to_string(h));
          }
        }
      }
    }
  }

 private:
  GrowthRule(RuleKind k, std::string name, double param)
      : kind_(k), name_(std::move(name)), param_(param) {}

  void set_constants(double beta, double d4) {
    beta_ = beta;
    d4_ = d4;
    c_ = d4 / 24.0 + beta * beta * beta / 12.0;
  }

  void extract_from_phi(std::optional<double> beta) {
    auto f = [this](double u) { return phi(u); };
    const auto b = richardson_derivative(f, 2);
    const auto d = richardson_derivative(f, 4);
    auto check = [&](const DerivativeEstimate& e, const char* what) {
      const double scale = std::max(1.0, std::abs(e.value));
      if (!std::isfinite(e.value) || e.spread > 1e-5 * scale) {
        throw DerivativeExtractionError(std::string(what) + " of " + name_ +
                                        ": Richardson estimates disagree by " +
                                        std::to_string(e.spread));
      }
    };
    check(d, "phi''''(0)");
    if (!beta) check(b, "phi''(0)");
    set_constants(beta ? *beta : b.value, d.value);
  }

  RuleKind kind_;
  std::string name_;
  double param_;
  Expression expr_;
  double psi00_ = 0.0;
  double beta_ = 0.0;
  double d4_ = 0.0;
  double c_ = 0.0;
  double phi_radius_ = std::numeric_limits<double>::infinity();
};

/// Finite-difference phi^(k)(0), k = 1..5, against the values implied by
/// beta and d4 (odd ones vanish, phi'' = beta, phi'''' = d4 = 24c - 2 beta^3).
struct PhiTableReport {
  std::array<DerivativeEstimate, 5> estimate{};
  std::array<double, 5> expected{};
  std::array<double, 5> deviation{};
};

inline PhiTableReport phi_table_check(const GrowthRule& rule) {
  PhiTableReport rep;
  auto f = [&rule](double u) { return rule.phi(u); };
  rep.expected = {0.0, rule.beta(), 0.0, 24.0 * rule.c() - 2.0 * std::pow(rule.beta(), 3), 0.0};
  for (int k = 1; k <= 5; ++k) {
    rep.estimate[k - 1] = richardson_derivative(f, k);
    rep.deviation[k - 1] = std::abs(rep.estimate[k - 1].value - rep.expected[k - 1]);
  }
  return rep;
}

/// Named rules: linear, kpz-quadratic, kpz-sqrt, polymer (needs beta),
/// quadratic (needs beta, phi = beta u^2 / 2), custom (needs expr).
inline GrowthRule make_rule(const std::string& name, std::optional<double> beta = std::nullopt,
                            const std::string& expr = {}) {
  if (name == "linear") return GrowthRule::linear();
  if (name == "kpz-quadratic") return GrowthRule::kpz_quadratic();
  if (name == "kpz-sqrt") return GrowthRule::kpz_sqrt();
  if (name == "polymer") {
    if (!beta) throw InadmissibleRuleError("polymer rule needs beta");
    return GrowthRule::polymer(*beta);
  }
  if (name == "quadratic") {
    if (!beta) throw InadmissibleRuleError("quadratic rule needs beta");
    return GrowthRule::quadratic(0.5 * *beta);
  }
  if (name == "custom") return GrowthRule::custom(expr, beta);
  throw InadmissibleRuleError("unknown rule '" + name + "'");
}

}  // namespace kpzu
