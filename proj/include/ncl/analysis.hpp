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

// Estimators for the projector expectations and splitting ratios, assembly of
// <A>, <A^2>, <B>, <B^2> with uncertainties, and source characterization.
//
// Per block i and polarizer setting theta, eta_i = N_i / M_g,i is the
// background-subtracted coincidence probability per herald gate. Then
//
//   E[<P(theta)>] = sum_i eta_i(theta, p) / sum_i [eta_i(theta, p) + eta_i(theta + pi/2, p)]
//   E[p]          = sum_i [eta_i(theta, p) + eta_i(theta + pi/2, p)]
//                   / sum_i [the same for arm p plus the same for arm 1 - p]
//
// Uncertainty policy:
//   sigma_stat  = Poisson counting (delta method) (+) polarizer misalignment,
//                 the latter from Monte Carlo redraws of the per-block angle
//                 offsets around the effective measured angles;
//   sigma_total = sigma_stat (+) shift from moving the splitter setting of the
//                 relevant configuration by switch_bias_sigma.
// (+) denotes addition in quadrature.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ncl/errors.hpp"
#include "ncl/photon_sim.hpp"
#include "ncl/rng.hpp"
#include "ncl/test_core.hpp"

namespace ncl {

struct EstimateWithUncertainty {
  double value = 0.0;
  double sigma_stat = 0.0;
  double sigma_total = 0.0;

  /// Statistical-only estimate (no systematic term).
  static EstimateWithUncertainty statistical(double value, double sigma) { return {value, sigma, sigma}; }
  static EstimateWithUncertainty with_systematic(double value, double stat, double sys) {
    return {value, stat, std::hypot(stat, sys)};
  }
};

/// N / M_g.
inline double eta(std::uint64_t coincidences, std::uint64_t gates) {
  if (gates == 0) throw NoDataError("eta: zero heralding gates");
  detail::require(coincidences <= gates, "eta: more coincidences than gates");
  return static_cast<double>(coincidences) / static_cast<double>(gates);
}

/// One eta_i term: a (possibly background-subtracted) count, its variance and
/// the number of herald gates of the block.
struct BlockRate {
  double count = 0.0;
  double variance = 0.0;
  double gates = 1.0;
};

namespace detail {

struct RateSum {
  double value = 0.0;
  double variance = 0.0;
};

inline RateSum sum_rates(std::span<const BlockRate> rates) {
  RateSum s;
  for (const auto& r : rates) {
    if (r.gates <= 0.0) throw NoDataError("block without heralding gates");
    s.value += r.count / r.gates;
    s.variance += r.variance / (r.gates * r.gates);
  }
  return s;
}

// x / (x + y) for independent x, y.
inline EstimateWithUncertainty ratio_share(const RateSum& x, const RateSum& y) {
  const double den = x.value + y.value;
  if (den <= 0.0) throw NoDataError("no coincidences in either setting");
  const double value = x.value / den;
  const double var = (y.value * y.value * x.variance + x.value * x.value * y.variance) / (den * den * den * den);
  return EstimateWithUncertainty::statistical(value, std::sqrt(var));
}

}  // namespace detail

/// E[<P(theta)>] from the eta terms with the polarizer at theta and at theta + pi/2.
inline EstimateWithUncertainty estimate_projector(std::span<const BlockRate> at_theta,
                                                  std::span<const BlockRate> at_perp) {
  if (at_theta.empty() || at_perp.empty()) throw NoDataError("projector estimate needs both polarizer settings");
  return detail::ratio_share(detail::sum_rates(at_theta), detail::sum_rates(at_perp));
}

/// E[p] from the eta terms of the arm reached with probability p and of the
/// arm reached with probability 1 - p, both polarizer settings each.
inline EstimateWithUncertainty estimate_splitting(std::span<const BlockRate> theta_p, std::span<const BlockRate> perp_p,
                                                  std::span<const BlockRate> theta_q, std::span<const BlockRate> perp_q) {
  if (theta_p.empty() || perp_p.empty() || theta_q.empty() || perp_q.empty()) {
    throw NoDataError("splitting estimate needs all four eta terms");
  }
  auto add = [](detail::RateSum a, const detail::RateSum& b) {
    a.value += b.value;
    a.variance += b.variance;
    return a;
  };
  return detail::ratio_share(add(detail::sum_rates(theta_p), detail::sum_rates(perp_p)),
                             add(detail::sum_rates(theta_q), detail::sum_rates(perp_q)));
}

/// Background-subtracted eta term of one arm of a block.
inline BlockRate block_rate(const BlockCounts& block, int arm, const DetectionChainConfig& layout) {
  const auto& a = block.arms[static_cast<std::size_t>(arm)];
  const auto sub = subtract_background(static_cast<double>(a.in_window), static_cast<double>(a.sideband),
                                       layout.window_bins(), layout.sideband_bins());
  return {sub.true_count, sub.sigma_true * sub.sigma_true, static_cast<double>(block.gates)};
}

namespace detail {

inline std::vector<BlockRate> rates(const ConfigurationRecord& rec, bool perp, int arm,
                                    const DetectionChainConfig& layout) {
  std::vector<BlockRate> out;
  out.reserve(rec.blocks.size());
  for (const auto& b : rec.blocks) out.push_back(block_rate(perp ? b.at_perp : b.at_theta, arm, layout));
  return out;
}

}  // namespace detail

/// E[<P(theta)>] of a configuration, measured in arm I.
inline EstimateWithUncertainty estimate_projector(const ConfigurationRecord& rec, const DetectionChainConfig& layout) {
  const auto theta = detail::rates(rec, false, 0, layout);
  const auto perp = detail::rates(rec, true, 0, layout);
  return estimate_projector(theta, perp);
}

inline EstimateWithUncertainty estimate_splitting(const ConfigurationRecord& rec, const DetectionChainConfig& layout) {
  return estimate_splitting(detail::rates(rec, false, 0, layout), detail::rates(rec, true, 0, layout),
                            detail::rates(rec, false, 1, layout), detail::rates(rec, true, 1, layout));
}

// ---------------------------------------------------------------------------
// Assembly

struct ProjectorEstimates {
  EstimateWithUncertainty p_alpha;        // <P(alpha)>, measured at p1
  EstimateWithUncertainty p_beta_first;   // <P(beta)> at the p1 setting
  EstimateWithUncertainty p_beta_second;  // <P(beta)> at the p2 setting
  std::optional<EstimateWithUncertainty> p1_measured;
  std::optional<EstimateWithUncertainty> p2_measured;
  int blocks = 1;  // blocks per configuration, each with its own polarizer offsets
};

struct AssemblyOptions {
  double misalignment_sigma = 0.0;
  int misalignment_draws = 1000;
  double switch_bias_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct TestQuantities {
  EstimateWithUncertainty mean_a;
  EstimateWithUncertainty mean_a2;
  EstimateWithUncertainty mean_b;
  EstimateWithUncertainty mean_b2;
  EstimateWithUncertainty diff_first;
  EstimateWithUncertainty diff_second;
  EstimateWithUncertainty d_minus_indirect;
  std::optional<EstimateWithUncertainty> p1_measured;
  std::optional<EstimateWithUncertainty> p2_measured;
};

namespace detail {

inline constexpr std::size_t kQuantityCount = 7;
using QuantityVector = std::array<double, kQuantityCount>;

// Effective polarizer angle relative to the photon polarization: P = cos^2(phi).
inline double effective_angle(double projector_mean) {
  return std::acos(std::sqrt(std::clamp(projector_mean, 0.0, 1.0)));
}

// All seven assembled quantities as plain numbers. p1_coef and p2_coef are the
// splitter values used for the B and B^2 coefficients; p1_dminus feeds d_minus.
inline QuantityVector assemble_values(double pa, double pb1, double pb2, const TestParameters& params, double p1_coef,
                                      double p2_coef, double p1_dminus) {
  const double mean_a = params.a0 * pa;
  const double mean_a2 = params.a0 * params.a0 * pa;
  const double mean_b = params.b0 * (p1_coef * pb1 + (1.0 - p1_coef) * (1.0 - pb1));
  const auto c2 = b2_coefficients_from_p2(params.b0, p2_coef);
  const double mean_b2 = c2[0] * pb2 + c2[1] * (1.0 - pb2);
  const TestParameters measured{params.a0, params.b0, p1_dminus, effective_angle(pa), effective_angle(pb1)};
  return {mean_a, mean_a2, mean_b, mean_b2, mean_b - mean_a, mean_b2 - mean_a2, d_minus_closed_form(measured)};
}

}  // namespace detail

/// Assembles the test quantities from projector estimates.
///
/// The B and B^2 coefficients use the nominal p1 and p2; measured splitting
/// ratios are carried along as a consistency check. d_minus_indirect evaluates
/// the closed-form minimum eigenvalue at the effective angles
/// arccos(sqrt(E[<P>])) and at the measured p1 when available.
inline TestQuantities assemble_test_quantities(const ProjectorEstimates& est, const TestParameters& params,
                                               const AssemblyOptions& options = {}) {
  params.validate();
  detail::require(options.misalignment_draws >= 0, "misalignment_draws must be >= 0");
  detail::require(est.blocks >= 1, "blocks must be >= 1");
  const double p1 = params.p1;
  const double p2 = params.p2();
  const double p1_dminus = est.p1_measured ? est.p1_measured->value : p1;
  const double pa = est.p_alpha.value;
  const double pb1 = est.p_beta_first.value;
  const double pb2 = est.p_beta_second.value;

  const auto center = detail::assemble_values(pa, pb1, pb2, params, p1, p2, p1_dminus);

  // Poisson part, delta method with central differences.
  std::array<double, 4> inputs{pa, pb1, pb2, p1_dminus};
  const std::array<double, 4> sigmas{est.p_alpha.sigma_stat, est.p_beta_first.sigma_stat,
                                     est.p_beta_second.sigma_stat,
                                     est.p1_measured ? est.p1_measured->sigma_stat : 0.0};
  detail::QuantityVector poisson_var{};
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    if (sigmas[j] == 0.0) continue;
    const double h = 1e-6;
    auto up = inputs;
    auto down = inputs;
    up[j] = std::min(inputs[j] + h, 1.0);
    down[j] = std::max(inputs[j] - h, 0.0);
    const auto fu = detail::assemble_values(up[0], up[1], up[2], params, p1, p2, up[3]);
    const auto fd = detail::assemble_values(down[0], down[1], down[2], params, p1, p2, down[3]);
    for (std::size_t q = 0; q < detail::kQuantityCount; ++q) {
      const double grad = (fu[q] - fd[q]) / (up[j] - down[j]);
      poisson_var[q] += grad * grad * sigmas[j] * sigmas[j];
    }
  }

  // Misalignment part: redraw the per-block offsets of both polarizer settings
  // of each configuration and re-evaluate the ratio estimators.
  detail::QuantityVector mis_var{};
  if (options.misalignment_sigma > 0.0 && options.misalignment_draws > 1) {
    const std::array<double, 3> phi{detail::effective_angle(pa), detail::effective_angle(pb1),
                                    detail::effective_angle(pb2)};
    detail::QuantityVector mean{};
    detail::QuantityVector m2{};
    for (int r = 0; r < options.misalignment_draws; ++r) {
      auto rng = RandomStream::substream(options.seed, {0x4D15A11ULL, static_cast<std::uint64_t>(r)});
      std::array<double, 3> perturbed{};
      for (std::size_t c = 0; c < 3; ++c) {
        double num = 0.0;
        double den = 0.0;
        for (int b = 0; b < est.blocks; ++b) {
          const double ct = std::cos(phi[c] + rng.normal(0.0, options.misalignment_sigma));
          const double sp = std::sin(phi[c] + rng.normal(0.0, options.misalignment_sigma));
          num += ct * ct;
          den += ct * ct + sp * sp;
        }
        perturbed[c] = num / den;
      }
      const auto v = detail::assemble_values(perturbed[0], perturbed[1], perturbed[2], params, p1, p2, p1_dminus);
      for (std::size_t q = 0; q < detail::kQuantityCount; ++q) {
        const double delta = v[q] - mean[q];
        mean[q] += delta / (r + 1);
        m2[q] += delta * (v[q] - mean[q]);
      }
    }
    for (std::size_t q = 0; q < detail::kQuantityCount; ++q) mis_var[q] = m2[q] / (options.misalignment_draws - 1);
  }

  // Splitter systematic: p1 moves B and d_minus, p2 moves B^2.
  detail::QuantityVector sys{};
  if (options.switch_bias_sigma > 0.0) {
    const double s = options.switch_bias_sigma;
    const auto p1_up = detail::assemble_values(pa, pb1, pb2, params, std::min(p1 + s, 1.0), p2,
                                               std::min(p1_dminus + s, 1.0));
    const auto p1_dn = detail::assemble_values(pa, pb1, pb2, params, std::max(p1 - s, 0.0), p2,
                                               std::max(p1_dminus - s, 0.0));
    const auto p2_up = detail::assemble_values(pa, pb1, pb2, params, p1, std::min(p2 + s, 1.0), p1_dminus);
    const auto p2_dn = detail::assemble_values(pa, pb1, pb2, params, p1, std::max(p2 - s, 0.0), p1_dminus);
    for (std::size_t q = 0; q < detail::kQuantityCount; ++q) {
      const double d1 = 0.5 * std::abs(p1_up[q] - p1_dn[q]);
      const double d2 = 0.5 * std::abs(p2_up[q] - p2_dn[q]);
      sys[q] = std::hypot(d1, d2);
    }
  }

  std::array<EstimateWithUncertainty, detail::kQuantityCount> out;
  for (std::size_t q = 0; q < detail::kQuantityCount; ++q) {
    out[q] = EstimateWithUncertainty::with_systematic(center[q], std::sqrt(poisson_var[q] + mis_var[q]), sys[q]);
  }
  return {out[0], out[1], out[2], out[3], out[4], out[5], out[6], est.p1_measured, est.p2_measured};
}

inline ProjectorEstimates estimate_projectors(const CampaignRecord& campaign, const DetectionChainConfig& layout) {
  ProjectorEstimates est;
  est.p_alpha = estimate_projector(campaign.alpha_first, layout);
  est.p_beta_first = estimate_projector(campaign.beta_first, layout);
  est.p_beta_second = estimate_projector(campaign.beta_second, layout);
  est.p1_measured = estimate_splitting(campaign.beta_first, layout);
  est.p2_measured = estimate_splitting(campaign.beta_second, layout);
  est.blocks = static_cast<int>(campaign.beta_first.blocks.size());
  return est;
}

/// |v| / sigma_total for v < 0, else 0. A positive <B^2> - <A^2> is no violation.
inline double significance(const EstimateWithUncertainty& diff_second) {
  if (!(diff_second.sigma_stat > 0.0) || !(diff_second.sigma_total > 0.0)) {
    throw UndefinedSignificanceError("significance needs a positive uncertainty");
  }
  return diff_second.value < 0.0 ? -diff_second.value / diff_second.sigma_total : 0.0;
}

// ---------------------------------------------------------------------------
// Source characterization

/// Per-herald detection probabilities with the polarizers removed.
///
///   Q(1|n)  = 1 - (1 - p tau)^n                          (detector I fires)
///   Q(2|n)  = 1 - (1 - p tau)^n - (1 - (1-p) tau)^n + (1 - tau)^n
///
/// summed over the photon-number distribution through its generating function.
struct AnalyticQ {
  double q1_arm_i = 0.0;
  double q1_arm_ii = 0.0;
  double q2 = 0.0;
  double q_neither = 0.0;

  /// Probability that detector I stays silent; the Gamma_1 denominator.
  double q0() const { return 1.0 - q1_arm_i; }
  double gamma1() const { return q1_arm_i / q0(); }
  double gamma2() const { return q2 / q1_arm_i; }
  double grangier_alpha() const { return q2 / (q1_arm_i * q1_arm_ii); }
};

inline AnalyticQ analytic_q(const SourceModel& source, double tau, double p) {
  source.validate();
  detail::require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
  detail::require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
  AnalyticQ q;
  q.q1_arm_i = source.generating_complement(1.0 - p * tau);
  q.q1_arm_ii = source.generating_complement(1.0 - (1.0 - p) * tau);
  const double any = source.generating_complement(1.0 - tau);
  q.q2 = std::max(0.0, q.q1_arm_i + q.q1_arm_ii - any);
  q.q_neither = 1.0 - any;
  return q;
}

struct CharacterizationMetrics {
  EstimateWithUncertainty gamma1;
  EstimateWithUncertainty gamma2;
  EstimateWithUncertainty gamma_ratio;
  EstimateWithUncertainty grangier_alpha;
};

/// a / b with independent uncertainties.
inline EstimateWithUncertainty ratio(const EstimateWithUncertainty& a, const EstimateWithUncertainty& b) {
  if (b.value == 0.0) throw NoDataError("ratio with zero denominator");
  const double v = a.value / b.value;
  auto prop = [&](double sa, double sb) { return std::hypot(sa / b.value, a.value * sb / (b.value * b.value)); };
  return {v, prop(a.sigma_stat, b.sigma_stat), prop(a.sigma_total, b.sigma_total)};
}

/// Gamma_1 = Q1 / (1 - Q1), Gamma_2 = Q2 / Q1 (detector I), Grangier
/// alpha = Q2 / (Q1_I Q1_II). Counts carry Poisson errors; a zero count is
/// given the error of a single count.
inline CharacterizationMetrics characterization_metrics(const SourceTally& tally) {
  if (tally.gates == 0) throw NoDataError("characterization without gates");
  if (tally.neither == 0) throw NoDataError("characterization: Q0 is zero");
  if (tally.singles[0] == 0 || tally.singles[1] == 0) throw NoDataError("characterization: a detector never fired");
  const double n = static_cast<double>(tally.gates);
  auto q = [&](std::uint64_t count) {
    const double c = static_cast<double>(count);
    return EstimateWithUncertainty::statistical(c / n, std::sqrt(std::max(c, 1.0)) / n);
  };
  const auto q1 = q(tally.singles[0]);
  const auto q1_ii = q(tally.singles[1]);
  const auto q2 = q(tally.doubles);

  CharacterizationMetrics m;
  const double q0 = 1.0 - q1.value;
  const double s1 = q1.sigma_stat / (q0 * q0);
  m.gamma1 = EstimateWithUncertainty::statistical(q1.value / q0, s1);
  m.gamma2 = ratio(q2, q1);
  m.gamma_ratio = ratio(m.gamma2, m.gamma1);
  const double prod = q1.value * q1_ii.value;
  const double alpha = q2.value / prod;
  const double sa = std::sqrt(std::pow(q2.sigma_stat / prod, 2) + std::pow(alpha * q1.sigma_stat / q1.value, 2) +
                              std::pow(alpha * q1_ii.sigma_stat / q1_ii.value, 2));
  m.grangier_alpha = EstimateWithUncertainty::statistical(alpha, sa);
  return m;
}

// ---------------------------------------------------------------------------
// Multi-photon contamination

/// Two-photon fraction eps of a (1 - eps) |1> + eps |2> mixture whose
/// Gamma_2 = Q2 / Q1 at p = 1/2 equals the given value.
inline double two_photon_fraction(double tau, double gamma2) {
  detail::require(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
  detail::require(gamma2 >= 0.0, "gamma2 must be >= 0");
  const double q1_single = tau / 2;
  const double q1_double = 1.0 - (1.0 - tau / 2) * (1.0 - tau / 2);
  const double q2_double = tau * tau / 2;
  const double den = q2_double - gamma2 * (q1_double - q1_single);
  if (den <= 0.0) return 1.0;
  return std::clamp(gamma2 * q1_single / den, 0.0, 1.0);
}

/// Change of the assembled <B^2> - <A^2> when the single-photon source is
/// replaced by the mixture implied by the measured Gamma_2.
inline double multiphoton_shift(const ProjectorEstimates& est, const TestParameters& params, double tau,
                                double gamma2) {
  const double eps = two_photon_fraction(tau, gamma2);
  auto expected = [&](double c, double q) {
    auto fire = [&](double x) {
      const double s = q * tau * x;
      return (1.0 - eps) * s + eps * (1.0 - (1.0 - s) * (1.0 - s));
    };
    const double den = fire(c) + fire(1.0 - c);
    return den > 0.0 ? fire(c) / den : c;
  };
  const double p1 = params.p1;
  const double p2 = params.p2();
  const double pa = est.p_alpha.value;
  const double pb1 = est.p_beta_first.value;
  const double pb2 = est.p_beta_second.value;
  const auto ideal = detail::assemble_values(pa, pb1, pb2, params, p1, p2, p1);
  const auto mixed = detail::assemble_values(expected(pa, p1), expected(pb1, p1), expected(pb2, p2), params, p1, p2, p1);
  return std::abs(mixed[5] - ideal[5]);
}

/// tau implied by Gamma_1 of an ideal single-photon source at p = 1/2.
inline double tau_from_gamma1(double gamma1) {
  detail::require(gamma1 >= 0.0, "gamma1 must be >= 0");
  return std::min(1.0, 2.0 * gamma1 / (1.0 + gamma1));
}

}  // namespace ncl
