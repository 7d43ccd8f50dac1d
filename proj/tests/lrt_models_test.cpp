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

#include <cmath>
#include <fstream>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ncl/lrt_io.hpp"
#include "ncl/lrt_models.hpp"
#include "ncl/piecewise.hpp"
#include "ncl/rng.hpp"
#include "support/random_models.hpp"

namespace ncl {
namespace {

using testing_support::bernstein;
using testing_support::random_density;
using testing_support::random_dominated_pair;
using testing_support::random_knots;
using testing_support::random_weights;


TEST(Polynomial, Calculus) {
  const Polynomial p({1.0, -2.0, 0.0, 4.0});  // 1 - 2x + 4x^3
  EXPECT_DOUBLE_EQ(p(0.5), 1.0 - 1.0 + 0.5);
  EXPECT_EQ(p.degree(), 3);
  const auto d = p.derivative();
  EXPECT_DOUBLE_EQ(d(2.0), -2.0 + 12.0 * 4.0);
  EXPECT_NEAR(p.integrate(0.0, 1.0), 1.0 - 1.0 + 1.0, 1e-15);
  EXPECT_NEAR(p.integrate(-1.0, 2.0), 3.0 - 3.0 + 15.0, 1e-13);
  const auto sq = p * p;
  EXPECT_EQ(sq.degree(), 6);
  EXPECT_NEAR(sq(0.3), p(0.3) * p(0.3), 1e-15);
  EXPECT_TRUE((p - p).is_zero());
  EXPECT_THROW(Polynomial({1.0, std::nan("")}), InvalidArgument);
}

TEST(Roots, CubicWithThreeRoots) {
  const Polynomial p = Polynomial({-0.2, 1.0}) * Polynomial({-0.5, 1.0}) * Polynomial({-0.7, 1.0});
  const auto r = roots_in_open_interval(p, 0.0, 1.0);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[0], 0.2, 1e-14);
  EXPECT_NEAR(r[1], 0.5, 1e-14);
  EXPECT_NEAR(r[2], 0.7, 1e-14);
  EXPECT_EQ(roots_in_open_interval(p, 0.2, 0.5).size(), 0u);
  EXPECT_EQ(roots_in_open_interval(p, 0.3, 0.6).size(), 1u);
}

TEST(Roots, CloseRootsAndQuarticFallback) {
  const Polynomial close = Polynomial({-0.4, 1.0}) * Polynomial({-0.4000001, 1.0});
  EXPECT_EQ(roots_in_open_interval(close, 0.0, 1.0).size(), 2u);
  const Polynomial quartic = close * Polynomial({-0.9, 1.0}) * Polynomial({-0.1, 1.0});
  const auto r = roots_in_open_interval(quartic, 0.0, 1.0);
  ASSERT_GE(r.size(), 2u);
  EXPECT_NEAR(r.front(), 0.1, 1e-12);
  EXPECT_NEAR(r.back(), 0.9, 1e-12);
  EXPECT_TRUE(roots_in_open_interval(Polynomial({1.0, 0.0, 1.0}), -5.0, 5.0).empty());
}

TEST(PiecewisePolynomial, KnotConventions) {
  const PiecewisePolynomial step({0.0, 0.5, 1.0}, {Polynomial::constant(1.0), Polynomial::constant(2.0)});
  EXPECT_DOUBLE_EQ(step(0.25), 1.0);
  EXPECT_DOUBLE_EQ(step(0.5), 2.0);  // right limit by default
  EXPECT_DOUBLE_EQ(step(1.0), 2.0);
  const PiecewisePolynomial left({0.0, 0.5, 1.0}, {Polynomial::constant(1.0), Polynomial::constant(2.0)},
                                 {std::nullopt, 1.0, std::nullopt});
  EXPECT_DOUBLE_EQ(left(0.5), 1.0);
  EXPECT_EQ(left.max_degree(), 0);
  EXPECT_THROW(PiecewisePolynomial({0.0, 0.0}, {Polynomial::constant(1.0)}), InvalidArgument);
  EXPECT_THROW(PiecewisePolynomial({0.0, 1.0}, {}), InvalidArgument);
}

TEST(HiddenVariableModel, Validation) {
  const auto unit = PiecewisePolynomial::constant(0.0, 1.0, 1.0);
  EXPECT_NO_THROW(HiddenVariableModel(unit, unit, unit));
  EXPECT_THROW(HiddenVariableModel(PiecewisePolynomial::constant(0.0, 1.0, 2.0), unit, unit), InvalidArgument);
  EXPECT_THROW(HiddenVariableModel(unit, PiecewisePolynomial::constant(0.0, 2.0, 1.0), unit), InvalidArgument);
  // 6x - 6x^2 + ... : density (1.5 - 6 (x - 0.5)^2) dips below zero near the ends.
  const PiecewisePolynomial dip({0.0, 1.0}, {Polynomial({0.0, 6.0, -6.0}) + Polynomial::constant(0.0)});
  EXPECT_NO_THROW(HiddenVariableModel(dip, unit, unit));
  const PiecewisePolynomial neg({0.0, 1.0}, {Polynomial({-0.5, 6.0, -6.0}) + Polynomial({0.5})});
  EXPECT_NO_THROW(HiddenVariableModel(neg, unit, unit));
  const PiecewisePolynomial negative({0.0, 1.0}, {Polynomial({-1.0, 12.0, -12.0})});
  EXPECT_THROW(HiddenVariableModel(negative, unit, unit), InvalidArgument);
  const PiecewisePolynomial quartic({0.0, 1.0}, {Polynomial({0.0, 0.0, 0.0, 0.0, 5.0})});
  EXPECT_THROW(HiddenVariableModel(quartic, unit, unit), InvalidArgument);
  const PiecewisePolynomial neg_a({0.0, 1.0}, {Polynomial({0.5, -1.0})});
  EXPECT_THROW(HiddenVariableModel(unit, neg_a, unit), InvalidArgument);
}

TEST(ClassicalMoments, UniformLinear) {
  const auto unit = PiecewisePolynomial::constant(0.0, 1.0, 1.0);
  const PiecewisePolynomial x({0.0, 1.0}, {Polynomial({0.0, 1.0})});
  const auto m = classical_moments(HiddenVariableModel(unit, x, unit));
  EXPECT_NEAR(m.mean_a, 0.5, 1e-15);
  EXPECT_NEAR(m.mean_a2, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.mean_b, 1.0, 1e-15);
  EXPECT_NEAR(m.mean_b2, 1.0, 1e-15);
}

TEST(Counterexample, ReproducesQuantumMomentsAndFailsDominance) {
  const auto params = TestParameters::paper();
  const auto model = counterexample_model(params);
  const auto m = classical_moments(model);
  const auto q = predict(params, pure_state(0.0));
  EXPECT_NEAR(m.mean_a, q.mean_a, 1e-12);
  EXPECT_NEAR(m.mean_a2, q.mean_a2, 1e-12);
  EXPECT_NEAR(m.mean_b, q.mean_b, 1e-12);
  EXPECT_NEAR(m.mean_b2, q.mean_b2, 1e-12);
  EXPECT_NEAR(m.diff_first(), 0.0685, 5e-5);
  EXPECT_NEAR(m.diff_second(), -0.0449, 5e-5);

  const auto dom = check_dominance(model);
  EXPECT_FALSE(dom.holds);
  ASSERT_EQ(dom.violation_intervals.size(), 1u);
  const auto& iv = dom.violation_intervals.front();
  const double xa = std::pow(std::cos(params.alpha), 2);
  const double xb = std::pow(std::cos(params.beta), 2);
  EXPECT_NEAR(iv.lo, xb, 1e-9);
  EXPECT_NEAR(iv.hi, xa, 1e-9);
  EXPECT_NEAR(iv.lo, 0.066987, 5e-7);
  EXPECT_NEAR(iv.hi, 0.328990, 5e-7);
  // A(X_A) = a0 with the step equal to 1 at zero; B(X_B) = b0.
  EXPECT_FALSE(iv.lo_closed);
  EXPECT_TRUE(iv.hi_closed);
  EXPECT_TRUE(classical_theorem_check(model));
}

TEST(Dominance, IsolatedPointViolation) {
  const auto unit = PiecewisePolynomial::constant(0.0, 1.0, 1.0);
  const PiecewisePolynomial spike({0.0, 0.5, 1.0}, {Polynomial::constant(0.5), Polynomial::constant(0.5)},
                                  {std::nullopt, 3.0, std::nullopt});
  const auto dom = check_dominance(HiddenVariableModel(unit, spike, unit));
  ASSERT_EQ(dom.violation_intervals.size(), 1u);
  EXPECT_EQ(dom.violation_intervals[0].lo, 0.5);
  EXPECT_EQ(dom.violation_intervals[0].hi, 0.5);
  EXPECT_TRUE(dom.violation_intervals[0].lo_closed && dom.violation_intervals[0].hi_closed);
  EXPECT_TRUE(check_dominance(HiddenVariableModel(unit, spike, unit), 2.5).holds);
  EXPECT_THROW(check_dominance(HiddenVariableModel(unit, spike, unit), -1.0), InvalidArgument);
}

TEST(Dominance, QuadraticCrossings) {
  const auto unit = PiecewisePolynomial::constant(0.0, 1.0, 1.0);
  // A = 4 (x - 0.5)^2 exceeds B = 0.25 outside [0.25, 0.75].
  const PiecewisePolynomial a({0.0, 1.0}, {Polynomial({1.0, -4.0, 4.0})});
  const auto b = PiecewisePolynomial::constant(0.0, 1.0, 0.25);
  const auto dom = check_dominance(HiddenVariableModel(unit, a, b));
  ASSERT_EQ(dom.violation_intervals.size(), 2u);
  EXPECT_EQ(dom.violation_intervals[0].lo, 0.0);
  EXPECT_TRUE(dom.violation_intervals[0].lo_closed);
  EXPECT_NEAR(dom.violation_intervals[0].hi, 0.25, 1e-14);
  EXPECT_NEAR(dom.violation_intervals[1].lo, 0.75, 1e-14);
  EXPECT_EQ(dom.violation_intervals[1].hi, 1.0);
  EXPECT_TRUE(dom.violation_intervals[1].hi_closed);
}

TEST(Dominance, ReportedSetAgreesWithPointwiseSampling) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto knots = random_knots(gen);
    std::vector<Polynomial> a;
    std::vector<Polynomial> b;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
      a.push_back(bernstein(knots[k], knots[k + 1], random_weights(gen)));
      b.push_back(bernstein(knots[k], knots[k + 1], random_weights(gen)));
    }
    const HiddenVariableModel model(PiecewisePolynomial::constant(0.0, 1.0, 1.0), PiecewisePolynomial(knots, a),
                                    PiecewisePolynomial(knots, b));
    const auto dom = check_dominance(model);
    auto inside = [&](double x) {
      for (const auto& iv : dom.violation_intervals) {
        if ((x > iv.lo || (iv.lo_closed && x == iv.lo)) && (x < iv.hi || (iv.hi_closed && x == iv.hi))) return true;
      }
      return false;
    };
    for (int s = 0; s < 200; ++s) {
      const double x = u(gen);
      const double gap = model.func_a()(x) - model.func_b()(x);
      if (std::abs(gap) < 1e-9) continue;
      EXPECT_EQ(gap > 0.0, inside(x)) << "trial " << trial << " x " << x;
    }
  }
}

TEST(ClassicalTheorem, RandomDominatedModels) {
  std::mt19937_64 gen(2015);
  for (int k = 0; k < 10000; ++k) {
    auto [a, b] = random_dominated_pair(gen);
    const HiddenVariableModel model(random_density(gen), a, b);
    ASSERT_TRUE(check_dominance(model).holds) << k;
    const auto m = classical_moments(model);
    ASSERT_LE(m.mean_a, m.mean_b + 1e-10) << k;
    ASSERT_LE(m.mean_a2, m.mean_b2 + 1e-10) << k;
    ASSERT_TRUE(classical_theorem_check(model));
  }
}

TEST(ClassicalMoments, MonteCarloAgreesWithExactIntegration) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 5; ++trial) {
    auto [a, b] = random_dominated_pair(gen);
    const HiddenVariableModel model(random_density(gen), a, b);
    const auto exact = classical_moments(model);

    // Rejection sampling from rho on [0, 1].
    double peak = 0.0;
    for (int s = 0; s <= 1000; ++s) peak = std::max(peak, model.density()(s / 1000.0));
    peak *= 1.2;
    auto rng = RandomStream::substream(5, {static_cast<std::uint64_t>(trial)});
    const int n = 200000;
    double sa = 0, sa2 = 0, sb2 = 0, sb4 = 0;
    for (int accepted = 0; accepted < n;) {
      const double x = rng.uniform();
      if (rng.uniform() * peak > model.density()(x)) continue;
      ++accepted;
      const double va = model.func_a()(x);
      const double vb = model.func_b()(x);
      sa += va;
      sa2 += va * va;
      sb2 += vb * vb;
      sb4 += vb * vb * vb * vb;
    }
    const double mean_a = sa / n;
    const double se_a = std::sqrt((sa2 / n - mean_a * mean_a) / n);
    EXPECT_LT(std::abs(mean_a - exact.mean_a), 4 * se_a + 1e-12);
    const double mean_b2 = sb2 / n;
    const double se_b2 = std::sqrt((sb4 / n - mean_b2 * mean_b2) / n);
    EXPECT_LT(std::abs(mean_b2 - exact.mean_b2), 4 * se_b2 + 1e-12);
  }
}

TEST(ModelJson, RoundTrip) {
  std::mt19937_64 gen(8);
  for (int k = 0; k < 50; ++k) {
    auto [a, b] = random_dominated_pair(gen);
    const HiddenVariableModel model(random_density(gen), a, b);
    const auto back = model_from_json(nlohmann::json::parse(model_to_json(model).dump()));
    const auto m0 = classical_moments(model);
    const auto m1 = classical_moments(back);
    EXPECT_EQ(m0.mean_a, m1.mean_a);
    EXPECT_EQ(m0.mean_b2, m1.mean_b2);
    for (double x : model.breakpoints()) EXPECT_EQ(model.func_a()(x), back.func_a()(x));
  }
}

TEST(ModelJson, BundledCounterexampleFile) {
  const auto model = load_model(std::string(NCL_DATA_DIR) + "/counterexample_model.json");
  const auto dom = check_dominance(model);
  ASSERT_EQ(dom.violation_intervals.size(), 1u);
  const auto params = TestParameters::paper();
  EXPECT_NEAR(dom.violation_intervals[0].lo, std::pow(std::cos(params.beta), 2), 1e-9);
  EXPECT_NEAR(dom.violation_intervals[0].hi, std::pow(std::cos(params.alpha), 2), 1e-9);
  EXPECT_NEAR(classical_moments(model).diff_second(), -0.0449, 5e-5);
}

TEST(ModelJson, RejectsMalformedInput) {
  auto j = model_to_json(counterexample_model(TestParameters::paper()));
  auto bad = j;
  bad["extra"] = 1;
  EXPECT_THROW(model_from_json(bad), InvalidArgument);
  bad = j;
  bad["format"] = "other";
  EXPECT_THROW(model_from_json(bad), InvalidArgument);
  bad = j;
  bad["A"]["pieces"][0]["coefficients"] = {1, 2, 3, 4, 5};
  EXPECT_THROW(model_from_json(bad), InvalidArgument);
  bad = j;
  bad["B"]["pieces"][1]["interval"][0] = 0.5;
  EXPECT_THROW(model_from_json(bad), InvalidArgument);
  bad = j;
  bad["density"].erase("pieces");
  EXPECT_THROW(model_from_json(bad), InvalidArgument);
  bad = j;
  bad["A"]["pieces"][0]["coefficients"] = "x";
  EXPECT_THROW(model_from_json(bad), InvalidArgument);
  EXPECT_THROW(load_model("/nonexistent/model.json"), std::runtime_error);
}

}  // namespace
}  // namespace ncl
