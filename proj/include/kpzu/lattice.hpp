#pragma once

#include <cstddef>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "kpzu/errors.hpp"

namespace kpzu {

/// A light-cone shaped window of one parity class of Z x Z_+.
///
/// Row t holds the sites |x| <= half_width + (horizon - t) with
/// x + t = parity (mod 2). Every site of row t >= 1 then has both parents
/// x - 1 and x + 1 in row t - 1, so a field on the window can be evolved
/// without boundary conditions and is exact on all of it.
struct Domain {
  long half_width = 0;
  long horizon = 0;
  int parity = 0;

  long reach(long t) const noexcept { return half_width + (horizon - t); }

  /// Smallest admissible x in row t.
  long lo(long t) const noexcept {
    const long r = reach(t);
    return ((-r + t - parity) % 2 == 0) ? -r : -r + 1;
  }
  long hi(long t) const noexcept {
    const long r = reach(t);
    return ((r + t - parity) % 2 == 0) ? r : r - 1;
  }
  std::size_t row_size(long t) const noexcept {
    const long l = lo(t), h = hi(t);
    return h < l ? 0 : static_cast<std::size_t>((h - l) / 2 + 1);
  }
  bool on_parity(long x, long t) const noexcept {
    return ((x + t - parity) % 2 + 2) % 2 == 0;
  }
  bool contains(long x, long t) const noexcept {
    return t >= 0 && t <= horizon && on_parity(x, t) &&
           std::labs(x) <= reach(t);
  }
  std::size_t site_count() const noexcept {
    std::size_t n = 0;
    for (long t = 0; t <= horizon; ++t) n += row_size(t);
    return n;
  }

  /// Window of the opposite parity one site narrower, so that every site
  /// also sees its two horizontal neighbours in *this.
  Domain centred() const noexcept {
    return Domain{half_width - 1, horizon, 1 - parity};
  }

  friend bool operator==(const Domain&, const Domain&) = default;
};

/// Values on the sites of a Domain, stored row by row.
template <class T = double>
class LatticeField {
 public:
  LatticeField() = default;
  explicit LatticeField(const Domain& dom, T init = T{}) : dom_(dom) {
    if (dom.horizon < 0 || dom.reach(dom.horizon) < 0) {
      throw BoundsError("empty lattice window");
    }
    offset_.resize(static_cast<std::size_t>(dom.horizon) + 2, 0);
    for (long t = 0; t <= dom.horizon; ++t) {
      offset_[t + 1] = offset_[t] + dom.row_size(t);
    }
    data_.assign(offset_.back(), init);
  }

  const Domain& domain() const noexcept { return dom_; }
  long horizon() const noexcept { return dom_.horizon; }
  bool contains(long x, long t) const noexcept { return dom_.contains(x, t); }

  T& operator()(long x, long t) { return data_[index(x, t)]; }
  const T& operator()(long x, long t) const { return data_[index(x, t)]; }

  /// Checked access.
  const T& at(long x, long t) const {
    if (!contains(x, t)) {
      throw BoundsError("site (" + std::to_string(x) + "," +
                        std::to_string(t) + ") outside lattice window");
    }
    return (*this)(x, t);
  }

  std::span<T> row(long t) {
    return {data_.data() + offset_[t], offset_[t + 1] - offset_[t]};
  }
  std::span<const T> row(long t) const {
    return {data_.data() + offset_[t], offset_[t + 1] - offset_[t]};
  }
  long row_lo(long t) const noexcept { return dom_.lo(t); }

  std::span<const T> values() const noexcept { return data_; }

  template <class F>
  void for_each_site(F&& f) const {
    for (long t = 0; t <= dom_.horizon; ++t) {
      const long l = dom_.lo(t);
      const auto r = row(t);
      for (std::size_t i = 0; i < r.size(); ++i) {
        f(l + 2 * static_cast<long>(i), t, r[i]);
      }
    }
  }

 private:
  std::size_t index(long x, long t) const noexcept {
    return offset_[t] + static_cast<std::size_t>((x - dom_.lo(t)) / 2);
  }

  Domain dom_{};
  std::vector<std::size_t> offset_;
  std::vector<T> data_;
};

}  // namespace kpzu
