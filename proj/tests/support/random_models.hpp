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


// Random piecewise-cubic models on [0, 1] for property tests.

#pragma once

#include <algorithm>
#include <array>
#include <random>
#include <utility>
#include <vector>

#include "ncl/piecewise.hpp"

namespace ncl::testing_support {

// Cubic Bernstein polynomial on [u, v] with nonnegative weights, as a polynomial in x.
inline Polynomial bernstein(double u, double v, const std::array<double, 4>& w) {
  const Polynomial t({-u / (v - u), 1.0 / (v - u)});
  const Polynomial s = Polynomial::constant(1.0) - t;
  return w[0] * (s * s * s) + (3.0 * w[1]) * (t * s * s) + (3.0 * w[2]) * (t * t * s) + w[3] * (t * t * t);
}

inline std::vector<double> random_knots(std::mt19937_64& gen) {
  // Interior knots on a 0.1 grid plus jitter, so no cell is narrower than 0.08.
  std::uniform_int_distribution<int> cells(1, 4);
  std::uniform_int_distribution<int> slot(1, 9);
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  std::vector<int> slots;
  const int n = cells(gen);
  for (int k = 1; k < n; ++k) slots.push_back(slot(gen));
  std::sort(slots.begin(), slots.end());
  slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
  std::vector<double> knots{0.0};
  for (int s : slots) knots.push_back(0.1 * s + jitter(gen));
  knots.push_back(1.0);
  return knots;
}

// Weights bounded away from zero: the monomial form of a Bernstein piece
// carries rounding error, and a zero weight would put the piece at -1e-16.
inline std::array<double, 4> random_weights(std::mt19937_64& gen, double scale = 1.0) {
  std::uniform_real_distribution<double> u(1e-3, scale);
  std::bernoulli_distribution small(0.2);
  std::array<double, 4> w{};
  for (auto& x : w) x = small(gen) ? 1e-3 : u(gen);
  return w;
}

inline PiecewisePolynomial random_density(std::mt19937_64& gen) {
  const auto knots = random_knots(gen);
  std::vector<Polynomial> pieces;
  double mass = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    auto w = random_weights(gen);
    w[0] += 0.05;
    pieces.push_back(bernstein(knots[k], knots[k + 1], w));
    mass += pieces.back().integrate(knots[k], knots[k + 1]);
  }
  for (auto& p : pieces) p = (1.0 / mass) * p;
  return PiecewisePolynomial(knots, pieces);
}

// A >= 0 and B = A + D with D >= 0, both on the same knots. Some cells get
// D = 0 exactly, so A and B touch.
inline std::pair<PiecewisePolynomial, PiecewisePolynomial> random_dominated_pair(std::mt19937_64& gen) {
  const auto knots = random_knots(gen);
  std::bernoulli_distribution touch(0.15);
  std::vector<Polynomial> a;
  std::vector<Polynomial> b;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    a.push_back(bernstein(knots[k], knots[k + 1], random_weights(gen, 2.0)));
    b.push_back(touch(gen) ? a.back() : a.back() + bernstein(knots[k], knots[k + 1], random_weights(gen, 0.5)));
  }
  return {PiecewisePolynomial(knots, a), PiecewisePolynomial(knots, b)};
}

}  // namespace ncl::testing_support
