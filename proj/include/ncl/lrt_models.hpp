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

// Classical hidden-variable models: a scalar hidden variable x with density
// rho(x) and outcome functions A(x), B(x), all piecewise polynomials of degree
// at most 3. If 0 <= A(x) <= B(x) pointwise then <A^2> <= <B^2> for every
// density; check_dominance decides the pointwise condition exactly.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ncl/errors.hpp"
#include "ncl/piecewise.hpp"
#include "ncl/test_core.hpp"

namespace ncl {

inline constexpr int kMaxModelDegree = 3;
inline constexpr double kNormalizationTolerance = 1e-10;

class HiddenVariableModel {
 public:
  HiddenVariableModel(PiecewisePolynomial density, PiecewisePolynomial func_a, PiecewisePolynomial func_b)
      : density_(std::move(density)), func_a_(std::move(func_a)), func_b_(std::move(func_b)) {
    detail::require(density_.lo() == func_a_.lo() && density_.lo() == func_b_.lo() &&
                        density_.hi() == func_a_.hi() && density_.hi() == func_b_.hi(),
                    "density, A and B must share one domain");
    for (const auto* f : {&density_, &func_a_, &func_b_}) {
      detail::require(f->max_degree() <= kMaxModelDegree, "model pieces must have degree <= 3");
    }

    breakpoints_.reserve(density_.knots().size() + func_a_.knots().size() + func_b_.knots().size());
    for (const auto* f : {&density_, &func_a_, &func_b_}) {
      breakpoints_.insert(breakpoints_.end(), f->knots().begin(), f->knots().end());
    }
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());

    detail::require(min_sampled(density_) >= -1e-12, "density must be nonnegative");
    detail::require(min_sampled(func_a_) >= -1e-12, "A(x) must be nonnegative");
    detail::require(min_sampled(func_b_) >= -1e-12, "B(x) must be nonnegative");

    double mass = 0.0;
    for_each_cell([&](double u, double v) { mass += density_.piece_at(0.5 * (u + v)).integrate(u, v); });
    detail::require(std::abs(mass - 1.0) <= kNormalizationTolerance, "density must integrate to 1");
  }

  double domain_lo() const { return breakpoints_.front(); }
  double domain_hi() const { return breakpoints_.back(); }
  const PiecewisePolynomial& density() const { return density_; }
  const PiecewisePolynomial& func_a() const { return func_a_; }
  const PiecewisePolynomial& func_b() const { return func_b_; }
  /// Sorted union of the knots of rho, A and B.
  std::span<const double> breakpoints() const { return breakpoints_; }

  /// Calls fn(u, v) for every pair of consecutive breakpoints. On (u, v) all
  /// three functions are single polynomials.
  template <typename Fn>
  void for_each_cell(Fn&& fn) const {
    for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) fn(breakpoints_[k], breakpoints_[k + 1]);
  }

 private:
  // Minimum over knot values, piece endpoints, critical points and a few
  // interior samples of every cell.
  double min_sampled(const PiecewisePolynomial& f) const {
    double worst = *std::min_element(f.knot_values().begin(), f.knot_values().end());
    for_each_cell([&](double u, double v) {
      const auto& p = f.piece_at(0.5 * (u + v));
      worst = std::min({worst, p(u), p(v)});
      for (double c : roots_in_open_interval(p.derivative(), u, v)) worst = std::min(worst, p(c));
      constexpr int kSamples = 16;
      for (int s = 1; s < kSamples; ++s) worst = std::min(worst, p(u + (v - u) * s / kSamples));
    });
    return worst;
  }

  PiecewisePolynomial density_;
  PiecewisePolynomial func_a_;
  PiecewisePolynomial func_b_;
  std::vector<double> breakpoints_;
};

struct ClassicalMoments {
  double mean_a = 0.0;
  double mean_a2 = 0.0;
  double mean_b = 0.0;
  double mean_b2 = 0.0;

  double diff_first() const { return mean_b - mean_a; }
  double diff_second() const { return mean_b2 - mean_a2; }
};

/// <A>, <A^2>, <B>, <B^2> under rho, integrated exactly cell by cell.
inline ClassicalMoments classical_moments(const HiddenVariableModel& model) {
  ClassicalMoments m;
  model.for_each_cell([&](double u, double v) {
    const double mid = 0.5 * (u + v);
    const auto& rho = model.density().piece_at(mid);
    const auto& a = model.func_a().piece_at(mid);
    const auto& b = model.func_b().piece_at(mid);
    const auto a_rho = a * rho;
    const auto b_rho = b * rho;
    m.mean_a += a_rho.integrate(u, v);
    m.mean_a2 += (a * a_rho).integrate(u, v);
    m.mean_b += b_rho.integrate(u, v);
    m.mean_b2 += (b * b_rho).integrate(u, v);
  });
  return m;
}

/// Maximal set on which A(x) > B(x) + tol. A single violating point is
/// reported as the closed interval [x, x].
struct DominanceInterval {
  double lo;
  double hi;
  bool lo_closed = false;
  bool hi_closed = false;
};

struct DominanceReport {
  bool holds = true;
  std::vector<DominanceInterval> violation_intervals;
};

/// Decides 0 <= A(x) <= B(x) + tol on the whole domain. Inside each cell the
/// sign of A - B - tol changes only at polynomial roots, which are isolated
/// exactly; knot values are checked as points, so step conventions count.
inline DominanceReport check_dominance(const HiddenVariableModel& model, double tol = 0.0) {
  detail::require(tol >= 0.0 && std::isfinite(tol), "tolerance must be >= 0");
  std::vector<DominanceInterval> pieces;

  auto point_violates = [&](double x) { return model.func_a()(x) - model.func_b()(x) > tol; };

  const auto bp = model.breakpoints();
  for (std::size_t k = 0; k < bp.size(); ++k) {
    if (point_violates(bp[k])) pieces.push_back({bp[k], bp[k], true, true});
    if (k + 1 == bp.size()) break;

    const double u = bp[k];
    const double v = bp[k + 1];
    const double mid = 0.5 * (u + v);
    const Polynomial diff =
        model.func_a().piece_at(mid) - model.func_b().piece_at(mid) - Polynomial::constant(tol);
    if (diff.is_zero()) continue;

    std::vector<double> cuts{u};
    const auto roots = roots_in_open_interval(diff, u, v);
    cuts.insert(cuts.end(), roots.begin(), roots.end());
    cuts.push_back(v);
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
      if (diff(0.5 * (cuts[j] + cuts[j + 1])) > 0.0) pieces.push_back({cuts[j], cuts[j + 1], false, false});
    }
  }

  DominanceReport report;
  for (const auto& piece : pieces) {
    if (!report.violation_intervals.empty()) {
      auto& last = report.violation_intervals.back();
      if (last.hi == piece.lo && (last.hi_closed || piece.lo_closed)) {
        last.hi = piece.hi;
        last.hi_closed = piece.hi_closed;
        continue;
      }
    }
    report.violation_intervals.push_back(piece);
  }
  report.holds = report.violation_intervals.empty();
  return report;
}

/// True unless the model is dominated and still has <A^2> > <B^2>. A false
/// return means the integration is broken, since the implication is a theorem.
inline bool classical_theorem_check(const HiddenVariableModel& model) {
  if (!check_dominance(model).holds) return true;
  const auto m = classical_moments(model);
  return m.mean_a2 <= m.mean_b2 + 1e-10;
}

/// Unit step with value 1 at zero.
constexpr double unit_step(double xi) { return xi >= 0.0 ? 1.0 : 0.0; }

/// Step-function model reproducing the quantum moments on |H>:
///   x ~ U[0, 1],  A(x) = a0 step(X_A - x),
///   B(x) = b0 [p1 step(X_B - x) + (1 - p1) step(x - X_B)],
/// with X_A = cos^2(alpha) and X_B = cos^2(beta).
inline HiddenVariableModel counterexample_model(const TestParameters& params) {
  params.validate();
  const double xa = std::cos(params.alpha) * std::cos(params.alpha);
  const double xb = std::cos(params.beta) * std::cos(params.beta);
  const auto a_of = [&](double x) { return params.a0 * unit_step(xa - x); };
  const auto b_of = [&](double x) {
    return params.b0 * (params.p1 * unit_step(xb - x) + (1.0 - params.p1) * unit_step(x - xb));
  };

  auto build = [](std::vector<double> knots, const std::function<double(double)>& f) {
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    std::erase_if(knots, [](double x) { return x < 0.0 || x > 1.0; });
    std::vector<Polynomial> pieces;
    std::vector<std::optional<double>> values;
    for (std::size_t k = 0; k < knots.size(); ++k) {
      values.emplace_back(f(knots[k]));
      if (k + 1 < knots.size()) pieces.push_back(Polynomial::constant(f(0.5 * (knots[k] + knots[k + 1]))));
    }
    return PiecewisePolynomial(std::move(knots), std::move(pieces), std::move(values));
  };

  return HiddenVariableModel(PiecewisePolynomial::constant(0.0, 1.0, 1.0), build({0.0, xa, 1.0}, a_of),
                             build({0.0, xb, 1.0}, b_of));
}

}  // namespace ncl
