// Copyright 2026 The ncl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Univariate polynomials in the monomial basis and piecewise polynomials
// with explicit knots. Integration is exact; real roots are isolated exactly
// (up to bisection precision) for degree <= 3 and by dense sampling above.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "ncl/errors.hpp"

namespace ncl {

/// sum_k c[k] x^k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coefficients) : c_(std::move(coefficients)) {
    for (double v : c_) detail::require(std::isfinite(v), "polynomial coefficients must be finite");
    trim();
  }
  static Polynomial constant(double value) { return Polynomial({value}); }

  bool is_zero() const { return c_.empty(); }
  /// Degree; 0 for the zero polynomial.
  int degree() const { return c_.empty() ? 0 : static_cast<int>(c_.size()) - 1; }
  std::span<const double> coefficients() const { return c_; }

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Polynomial(std::move(d));
  }

  /// Exact definite integral over [lo, hi].
  double integrate(double lo, double hi) const {
    double acc_hi = 0.0;
    double acc_lo = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) {
      const double a = c_[k] / static_cast<double>(k + 1);
      acc_hi = acc_hi * hi + a;
      acc_lo = acc_lo * lo + a;
    }
    return acc_hi * hi - acc_lo * lo;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < a.c_.size(); ++k) r[k] += a.c_[k];
    for (std::size_t k = 0; k < b.c_.size(); ++k) r[k] += b.c_[k];
    return Polynomial(std::move(r));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }
  friend Polynomial operator*(double s, const Polynomial& a) {
    std::vector<double> r(a.c_);
    for (double& v : r) v *= s;
    return Polynomial(std::move(r));
  }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(r));
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }

  std::vector<double> c_;
};

namespace detail {

// Real roots of c0 + c1 x + c2 x^2, ascending. Degenerate leading terms handled.
inline std::vector<double> quadratic_roots(double c0, double c1, double c2) {
  if (c2 == 0.0) {
    if (c1 == 0.0) return {};
    return {-c0 / c1};
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return {};
  if (disc == 0.0) return {-c1 / (2.0 * c2)};
  const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
  double r1 = q / c2;
  double r2 = q != 0.0 ? c0 / q : -r1;
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

// Bisection on [u, v] where f(u) and f(v) have strictly opposite signs.
template <typename F>
double bisect(const F& f, double u, double v) {
  double fu = f(u);
  for (int iter = 0; iter < 200; ++iter) {
    const double m = 0.5 * (u + v);
    if (m <= u || m >= v) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fu < 0.0)) {
      u = m;
      fu = fm;
    } else {
      v = m;
    }
  }
  return 0.5 * (u + v);
}

template <typename F>
void collect_sign_changes(const F& f, std::span<const double> grid, std::vector<double>& roots) {
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double u = grid[k];
    const double v = grid[k + 1];
    const double fu = f(u);
    const double fv = f(v);
    if (k > 0 && fu == 0.0) roots.push_back(u);
    if (fu != 0.0 && fv != 0.0 && (fu < 0.0) != (fv < 0.0)) roots.push_back(bisect(f, u, v));
  }
}

}  // namespace detail

/// Distinct real roots of p strictly inside (lo, hi), ascending. The zero
/// polynomial returns no roots; callers test is_zero() separately.
inline std::vector<double> roots_in_open_interval(const Polynomial& p, double lo, double hi) {
  std::vector<double> roots;
  if (p.is_zero() || p.degree() == 0 || !(lo < hi)) return roots;

  std::vector<double> grid{lo};
  if (p.degree() <= 3) {
    // Split at critical points so that every segment is monotone.
    const auto d = p.derivative();
    const auto c = d.coefficients();
    const auto crit = detail::quadratic_roots(c.size() > 0 ? c[0] : 0.0, c.size() > 1 ? c[1] : 0.0,
                                              c.size() > 2 ? c[2] : 0.0);
    for (double x : crit)
      if (x > lo && x < hi) grid.push_back(x);
  } else {
    constexpr int kSamples = 10000;
    for (int k = 1; k < kSamples; ++k) grid.push_back(lo + (hi - lo) * k / kSamples);
  }
  grid.push_back(hi);
  detail::collect_sign_changes(p, grid, roots);

  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  std::erase_if(roots, [&](double r) { return !(r > lo && r < hi); });
  return roots;
}

/// Piecewise polynomial on [knots.front(), knots.back()].
///
/// Piece k is valid on the open interval (knots[k], knots[k+1]). The value at
/// a knot is stored separately so step functions can follow any endpoint
/// convention; when not given it defaults to the limit from the right (from
/// the left at the last knot).
class PiecewisePolynomial {
 public:
  PiecewisePolynomial(std::vector<double> knots, std::vector<Polynomial> pieces,
                      std::vector<std::optional<double>> knot_values = {})
      : knots_(std::move(knots)), pieces_(std::move(pieces)) {
    detail::require(knots_.size() >= 2, "piecewise polynomial needs at least two knots");
    detail::require(pieces_.size() + 1 == knots_.size(), "need exactly one piece per knot interval");
    for (std::size_t k = 0; k < knots_.size(); ++k) {
      detail::require(std::isfinite(knots_[k]), "knots must be finite");
      if (k > 0) detail::require(knots_[k - 1] < knots_[k], "knots must be strictly increasing");
    }
    detail::require(knot_values.empty() || knot_values.size() == knots_.size(),
                    "knot_values must be empty or have one entry per knot");
    knot_values_.resize(knots_.size());
    for (std::size_t k = 0; k < knots_.size(); ++k) {
      if (!knot_values.empty() && knot_values[k]) {
        detail::require(std::isfinite(*knot_values[k]), "knot values must be finite");
        knot_values_[k] = *knot_values[k];
      } else {
        const auto& piece = k + 1 < knots_.size() ? pieces_[k] : pieces_[k - 1];
        knot_values_[k] = piece(knots_[k]);
      }
    }
  }

  static PiecewisePolynomial constant(double lo, double hi, double value) {
    return PiecewisePolynomial({lo, hi}, {Polynomial::constant(value)});
  }

  double lo() const { return knots_.front(); }
  double hi() const { return knots_.back(); }
  std::span<const double> knots() const { return knots_; }
  std::span<const Polynomial> pieces() const { return pieces_; }
  std::span<const double> knot_values() const { return knot_values_; }

  int max_degree() const {
    int d = 0;
    for (const auto& p : pieces_) d = std::max(d, p.degree());
    return d;
  }

  /// Polynomial of the piece whose open interval contains x; at a knot, the
  /// piece to its right (to its left at the last knot).
  const Polynomial& piece_at(double x) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    auto idx = static_cast<std::size_t>(std::distance(knots_.begin(), it));
    idx = std::clamp<std::size_t>(idx, 1, pieces_.size());
    return pieces_[idx - 1];
  }

  double operator()(double x) const {
    auto it = std::lower_bound(knots_.begin(), knots_.end(), x);
    if (it != knots_.end() && *it == x) return knot_values_[static_cast<std::size_t>(it - knots_.begin())];
    return piece_at(x)(x);
  }

 private:
  std::vector<double> knots_;
  std::vector<Polynomial> pieces_;
  std::vector<double> knot_values_;
};

}  // namespace ncl
