#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "kpzu/errors.hpp"

namespace kpzu {

/// Truncated formal power series a_0 + a_1 z + ... + a_n z^n.
///
/// Every operation truncates to the smaller order of its operands, so the
/// coefficients it returns are exact (up to the arithmetic of T).
template <class T>
class PowerSeries {
 public:
  PowerSeries() = default;
  explicit PowerSeries(std::size_t order, T fill = T(0))
      : coeffs_(order + 1, fill) {}
  explicit PowerSeries(std::vector<T> coeffs, std::string radius_note = {})
      : coeffs_(std::move(coeffs)), radius_note_(std::move(radius_note)) {
    if (coeffs_.empty()) coeffs_.push_back(T(0));
  }

  std::size_t order() const noexcept { return coeffs_.size() - 1; }
  const T& operator[](std::size_t k) const { return coeffs_[k]; }
  T& operator[](std::size_t k) { return coeffs_[k]; }
  const std::vector<T>& coeffs() const noexcept { return coeffs_; }
  const std::string& radius_note() const noexcept { return radius_note_; }
  void set_radius_note(std::string s) { radius_note_ = std::move(s); }

  PowerSeries truncated(std::size_t n) const {
    std::vector<T> c(coeffs_.begin(),
                     coeffs_.begin() + static_cast<long>(std::min(n, order()) + 1));
    return PowerSeries(std::move(c), radius_note_);
  }

  /// z^k * (*this), keeping the order.
  PowerSeries shifted(std::size_t k) const {
    PowerSeries r(order());
    for (std::size_t i = k; i <= order(); ++i) r[i] = coeffs_[i - k];
    return r;
  }

  /// 1 / (*this); the constant term must be nonzero.
  PowerSeries inverse() const {
    if (coeffs_[0] == T(0)) {
      throw DomainError("power series with zero constant term has no inverse");
    }
    PowerSeries r(order());
    r[0] = T(1) / coeffs_[0];
    for (std::size_t k = 1; k <= order(); ++k) {
      T acc(0);
      for (std::size_t j = 1; j <= k; ++j) acc += coeffs_[j] * r[k - j];
      r[k] = -acc / coeffs_[0];
    }
    return r;
  }

  PowerSeries& operator+=(const PowerSeries& o) {
    resize_to(std::min(order(), o.order()));
    for (std::size_t k = 0; k <= order(); ++k) coeffs_[k] += o[k];
    return *this;
  }
  PowerSeries& operator-=(const PowerSeries& o) {
    resize_to(std::min(order(), o.order()));
    for (std::size_t k = 0; k <= order(); ++k) coeffs_[k] -= o[k];
    return *this;
  }
  PowerSeries& operator*=(const T& s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }

  friend PowerSeries operator+(PowerSeries a, const PowerSeries& b) { return a += b; }
  friend PowerSeries operator-(PowerSeries a, const PowerSeries& b) { return a -= b; }
  friend PowerSeries operator*(PowerSeries a, const T& s) { return a *= s; }
  friend PowerSeries operator*(const T& s, PowerSeries a) { return a *= s; }

  friend PowerSeries operator*(const PowerSeries& a, const PowerSeries& b) {
    const std::size_t n = std::min(a.order(), b.order());
    PowerSeries r(n);
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t j = 0; i + j <= n; ++j) r[i + j] += a[i] * b[j];
    }
    return r;
  }

  /// Constant series c, or c + (*this) for the affine helpers below.
  static PowerSeries constant(std::size_t order, const T& c) {
    PowerSeries r(order);
    r[0] = c;
    return r;
  }
  /// The series z.
  static PowerSeries identity(std::size_t order) {
    PowerSeries r(order);
    if (order >= 1) r[1] = T(1);
    return r;
  }

 private:
  void resize_to(std::size_t n) { coeffs_.resize(n + 1); }

  std::vector<T> coeffs_{T(0)};
  std::string radius_note_;
};

/// Binomial series of (1 - z)^{1/2}.
template <class T>
PowerSeries<T> sqrt_one_minus_z(std::size_t n) {
  PowerSeries<T> s(n);
  s[0] = T(1);
  for (std::size_t k = 1; k <= n; ++k) {
    // a_k = a_{k-1} (k - 3/2) / k
    s[k] = s[k - 1] * T(2 * static_cast<long>(k) - 3) / T(2 * static_cast<long>(k));
  }
  s.set_radius_note("|z| < 1");
  return s;
}

/// Binomial series of (1 - z)^{-1/2}.
template <class T>
PowerSeries<T> inv_sqrt_one_minus_z(std::size_t n) {
  PowerSeries<T> s(n);
  s[0] = T(1);
  for (std::size_t k = 1; k <= n; ++k) {
    s[k] = s[k - 1] * T(2 * static_cast<long>(k) - 1) / T(2 * static_cast<long>(k));
  }
  s.set_radius_note("|z| < 1");
  return s;
}

}  // namespace kpzu
