#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cascade {

//! Piecewise-constant function of one variable.
//!
//! `values[0]` holds below `breaks[0]`, `values[k]` on `[breaks[k-1], breaks[k])`
//! and `values.back()` from the last break on. All integrals are exact.
class Profile1D {
 public:
  Profile1D() : values_{0.0} {}
  explicit Profile1D(double constant) : values_{constant} {}
  Profile1D(std::vector<double> breaks, std::vector<double> values)
      : breaks_(std::move(breaks)), values_(std::move(values)) {
    if (values_.size() != breaks_.size() + 1) {
      throw std::invalid_argument("piecewise profile needs one more value than breaks");
    }
    for (std::size_t k = 1; k < breaks_.size(); ++k) {
      if (!(breaks_[k] > breaks_[k - 1])) {
        throw std::invalid_argument("profile breaks must be strictly increasing");
      }
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("profile values must be finite");
    }
  }

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }
  bool is_constant() const { return breaks_.empty(); }

  double operator()(double x) const { return values_[piece(x)]; }

  std::size_t piece(double x) const {
    return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), x) -
                                    breaks_.begin());
  }

  //! Calls f(lo, hi, value) for each constant piece of [a, b], a <= b.
  template <class F>
  void for_each_piece(double a, double b, F&& f) const {
    double lo = a;
    std::size_t k = piece(a);
    while (lo < b) {
      const double hi = k < breaks_.size() ? std::min(b, breaks_[k]) : b;
      if (hi > lo) f(lo, hi, values_[k]);
      lo = hi;
      ++k;
    }
  }

  //! Integral of `shift + u` over [a, b] (oriented).
  double integral(double a, double b, double shift = 0.0) const {
    if (b < a) return -integral(b, a, shift);
    double s = 0.0;
    for_each_piece(a, b, [&](double lo, double hi, double v) { s += (v + shift) * (hi - lo); });
    return s;
  }

  //! Integral of (1 + u(z)) z^(d-1) over [a, b] with 0 <= a <= b.
  double radial_moment(double a, double b, int d) const {
    if (b < a) return -radial_moment(b, a, d);
    double s = 0.0;
    for_each_piece(a, b, [&](double lo, double hi, double v) {
      s += (1.0 + v) * (std::pow(hi, d) - std::pow(lo, d)) / d;
    });
    return s;
  }

  //! Integral of (1 + u)^- over [a, b].
  double negative_part_integral(double a, double b) const {
    double s = 0.0;
    for_each_piece(a, b, [&](double lo, double hi, double v) {
      s += std::max(0.0, -(1.0 + v)) * (hi - lo);
    });
    return s;
  }

  //! Profile of x -> u(2c - x).
  Profile1D mirrored(double c) const {
    std::vector<double> br(breaks_.size());
    std::vector<double> vals(values_.rbegin(), values_.rend());
    for (std::size_t k = 0; k < breaks_.size(); ++k) br[k] = 2.0 * c - breaks_[breaks_.size() - 1 - k];
    // Mirroring flips half-open intervals; values at the break points themselves
    // are measure zero and do not matter for any integral.
    return Profile1D(std::move(br), std::move(vals));
  }

  //! Profile of x -> u(x + a).
  Profile1D shifted(double a) const {
    std::vector<double> br = breaks_;
    for (double& b : br) b -= a;
    return Profile1D(std::move(br), values_);
  }

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
};

}  // namespace cascade
