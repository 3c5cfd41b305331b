#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kpzu/power_series.hpp"
#include "kpzu/walk_kernel.hpp"

namespace kpzu {

struct IdentityCheck {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Generating-function identities of the lazy difference walk, coefficientwise
/// to `order`, plus E(z) against path enumeration for t <= 12.
inline std::vector<IdentityCheck> gf_identity_suite(std::size_t order = 20) {
  using S = PowerSeries<double>;
  std::vector<IdentityCheck> out;
  auto max_abs = [](const S& s) {
    double m = 0.0;
    for (double v : s.coeffs()) m = std::max(m, std::abs(v));
    return m;
  };
  auto record = [&](std::string name, double err, double tol) {
    out.push_back({std::move(name), err, tol, err <= tol});
  };
  const S z = S::identity(order), one = S::constant(order, 1.0);

  // closed forms against the half-line enumeration
  const auto oso = series_O_SO(order);
  const auto ex = excursion_probabilities(order);
  double e_so = 0.0, e_o = 0.0;
  for (std::size_t n = 0; n <= order; ++n) {
    e_so = std::max(e_so, std::abs(oso.SO[n] - ex.SO[n]));
    e_o = std::max(e_o, std::abs(oso.O[n] - ex.O[n]));
  }
  record("SO(z) coefficients vs enumeration", e_so, 1e-12);
  record("O(z) coefficients vs enumeration", e_o, 1e-12);
  record("SO = z^2 O / 16 + z / 2", max_abs(oso.SO - (z * z * oso.O) * (1.0 / 16.0) - z * 0.5), 1e-12);
  record("O = SO O + 1", max_abs(oso.O - oso.SO * oso.O - one), 1e-12);

  // first-return and remainder series against enumeration
  const auto P = series_P(order);
  const auto R = series_R(order);
  record("P = 2 (SO - z/2) + z/2", max_abs(P - (oso.SO - z * 0.5) * 2.0 - z * 0.5), 1e-12);
  const int tmax = static_cast<int>(std::min<std::size_t>(order, 12));
  double e_p = 0.0, e_r = 0.0, tail = 1.0;
  for (int k = 1; k <= tmax; ++k) {
    const double first = brute_intersections(k - 1, 0.0).E_mu_Nt - brute_intersections(k, 0.0).E_mu_Nt;
    e_p = std::max(e_p, std::abs(P[k] - first));
    tail -= first;  // sum_{j > k} p(j)
    e_r = std::max(e_r, std::abs(R[k] - tail));
  }
  record("P(z) vs first-return enumeration", e_p, 1e-12);
  record("R(z) vs first-return tails", e_r, 1e-12);

  for (double mu : {1.0, 1.1, 2.0}) {
    const auto E = series_E(mu, order);
    const std::string tag = " (mu=" + std::string(mu == 1.0 ? "1" : mu == 2.0 ? "2" : "1.1") + ")";
    record("E = mu E P + R + 1" + tag, max_abs(E - E * P * mu - R - one) / std::max(1.0, max_abs(E)),
           1e-12);
    double err = 0.0;
    for (int t = 0; t <= 12 && t <= static_cast<int>(order); ++t) {
      err = std::max(err, std::abs(E[t] - brute_intersections(t, mu).E_mu_Nt) / std::max(1.0, E[t]));
    }
    record("E(z) vs enumeration" + tag, err, 1e-10);
  }
  return out;
}

}  // namespace kpzu
