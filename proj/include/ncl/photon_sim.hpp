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

// Monte Carlo model of the heralded single-photon measurement chain.
//
// One gate = one herald. Per gate the source emits n photons, a variable
// splitter routes each one to arm I with probability p (arm II otherwise), a
// polarizer in each arm passes it with the single-photon Malus probability,
// and the gated detector of the arm fires with probability 1 - (1 - tau)^m.
// Uncorrelated background photons and accidental counts arrive uniformly over
// the gate; true detections fall inside the coincidence peak window of the
// delay histogram. Detector deadtime is not modeled, so one arm may register
// several events in a gate.
//
// Every block runs on its own random substream addressed by
// (seed, stream, block), so block results do not depend on execution order.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ncl/angles.hpp"
#include "ncl/errors.hpp"
#include "ncl/rng.hpp"

namespace ncl {

enum class SourceKind { ideal_single, poissonian, single_with_background };

struct SourceModel {
  SourceKind kind = SourceKind::ideal_single;
  double mu = 0.0;               // mean photons per herald (poissonian)
  double background_prob = 0.0;  // chance of one extra uncorrelated photon per gate

  void validate() const {
    detail::require(std::isfinite(mu) && mu >= 0.0, "source mu must be >= 0");
    detail::require(background_prob >= 0.0 && background_prob <= 1.0, "background_prob must lie in [0, 1]");
    detail::require(kind != SourceKind::ideal_single || background_prob == 0.0,
                    "an ideal single-photon source has no background");
  }

  /// Probability generating function sum_n P(n) z^n of the total photon number.
  double generating_function(double z) const {
    const double background = 1.0 - background_prob + background_prob * z;
    switch (kind) {
      case SourceKind::ideal_single:
        return z;
      case SourceKind::poissonian:
        return std::exp(mu * (z - 1.0)) * background;
      case SourceKind::single_with_background:
        return z * background;
    }
    return 0.0;
  }

  /// 1 - generating_function(z), without the cancellation for z near 1.
  double generating_complement(double z) const {
    const double w = 1.0 - z;
    switch (kind) {
      case SourceKind::ideal_single:
        return w;
      case SourceKind::poissonian:
        return -std::expm1(-mu * w) + std::exp(-mu * w) * background_prob * w;
      case SourceKind::single_with_background:
        return w + z * background_prob * w;
    }
    return 1.0;
  }
};

struct PhotonPulse {
  int signal = 0;      // photons of the heralded pair, polarized as prepared
  int background = 0;  // uncorrelated, unpolarized, uniformly timed
  int total() const { return signal + background; }
};

inline PhotonPulse sample_pulse(const SourceModel& source, RandomStream& rng) {
  PhotonPulse pulse;
  switch (source.kind) {
    case SourceKind::ideal_single:
    case SourceKind::single_with_background:
      pulse.signal = 1;
      break;
    case SourceKind::poissonian:
      pulse.signal = source.mu > 0.0 ? std::poisson_distribution<int>(source.mu)(rng) : 0;
      break;
  }
  if (source.background_prob > 0.0 && rng.bernoulli(source.background_prob)) pulse.background = 1;
  return pulse;
}

inline int sample_photon_number(const SourceModel& source, RandomStream& rng) {
  return sample_pulse(source, rng).total();
}

struct SplitCounts {
  int arm_i = 0;
  int arm_ii = 0;
};

/// m_I ~ Binomial(n, p), m_II = n - m_I.
inline SplitCounts split_photons(int n, double p, RandomStream& rng) {
  detail::require(n >= 0, "photon number must be >= 0");
  detail::require(p >= 0.0 && p <= 1.0, "splitting ratio must lie in [0, 1]");
  SplitCounts out;
  for (int k = 0; k < n; ++k) out.arm_i += rng.bernoulli(p) ? 1 : 0;
  out.arm_ii = n - out.arm_i;
  return out;
}

/// Fires with probability 1 - (1 - tau)^m.
inline bool detect(int m, double tau, RandomStream& rng) {
  detail::require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
  if (m <= 0) return false;
  return rng.bernoulli(-std::expm1(m * std::log1p(-tau)));
}

/// Single-photon Malus law: passes with probability cos^2(setting - polarization).
inline bool polarizer_pass(double photon_polarization, double pol_setting, RandomStream& rng) {
  detail::require(std::isfinite(photon_polarization) && std::isfinite(pol_setting), "angles must be finite");
  const double c = std::cos(pol_setting - photon_polarization);
  return rng.bernoulli(c * c);
}

/// Nominal splitter setting plus a Gaussian bias, clamped to [0, 1].
inline double draw_switch_setting(double nominal, double bias_sigma, RandomStream& rng) {
  return std::clamp(rng.normal(nominal, bias_sigma), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Chain configuration

struct DetectionChainConfig {
  double tau = 0.1;
  double switch_ratio = 0.5;  // nominal p for source characterization
  double switch_bias_sigma = 0.0;
  double misalignment_sigma = degrees(2.5);
  double gate_ns = 20.0;
  double accidental_rate_per_ns = 0.0;  // probability per 1 ns slot, per arm
  double bin_width_ns = 0.5;
  double peak_lo_ns = 9.0;
  double peak_hi_ns = 11.0;
  double photon_polarization = 0.0;  // heralded photons are prepared in |s(theta)>
  SourceModel source;

  int bins() const { return static_cast<int>(std::lround(gate_ns / bin_width_ns)); }
  int window_first_bin() const { return static_cast<int>(std::lround(peak_lo_ns / bin_width_ns)); }
  int window_end_bin() const { return static_cast<int>(std::lround(peak_hi_ns / bin_width_ns)); }
  int window_bins() const { return window_end_bin() - window_first_bin(); }
  int sideband_bins() const { return bins() - window_bins(); }
  int accidental_slots() const { return std::max(1, static_cast<int>(std::lround(gate_ns))); }

  void validate() const {
    detail::require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
    detail::require(switch_ratio >= 0.0 && switch_ratio <= 1.0, "switch_ratio must lie in [0, 1]");
    detail::require(std::isfinite(switch_bias_sigma) && switch_bias_sigma >= 0.0, "switch_bias_sigma must be >= 0");
    detail::require(std::isfinite(misalignment_sigma) && misalignment_sigma >= 0.0,
                    "misalignment_sigma must be >= 0");
    detail::require(std::isfinite(gate_ns) && gate_ns > 0.0, "gate_ns must be > 0");
    detail::require(accidental_rate_per_ns >= 0.0 && accidental_rate_per_ns <= 1.0,
                    "accidental_rate_per_ns must lie in [0, 1]");
    detail::require(std::isfinite(bin_width_ns) && bin_width_ns > 0.0, "bin_width_ns must be > 0");
    detail::require(std::abs(gate_ns / bin_width_ns - bins()) < 1e-9, "gate_ns must be a multiple of bin_width_ns");
    detail::require(std::abs(peak_lo_ns / bin_width_ns - window_first_bin()) < 1e-9 &&
                        std::abs(peak_hi_ns / bin_width_ns - window_end_bin()) < 1e-9,
                    "peak window edges must lie on bin edges");
    detail::require(window_first_bin() > 0 && window_end_bin() < bins() && window_bins() > 0,
                    "peak window must lie strictly inside the gate");
    detail::require(std::isfinite(photon_polarization), "photon_polarization must be finite");
    source.validate();
  }
};

/// Polarizer angles for arms I and II, or none (polarizers removed), and the
/// splitter setting actually applied.
struct MeasurementSpec {
  std::optional<std::array<double, 2>> polarizer_angles;
  double switch_p = 0.5;
};

// ---------------------------------------------------------------------------
// Records

struct ArmCounts {
  std::uint64_t coincidences = 0;  // gates with at least one event in the arm
  std::uint64_t in_window = 0;     // events inside the peak window
  std::uint64_t sideband = 0;      // events outside it
};

struct BlockCounts {
  std::uint64_t gates = 0;
  std::array<ArmCounts, 2> arms{};
  std::uint64_t double_coincidences = 0;  // gates with events in both arms
  std::uint64_t neither = 0;              // gates with no event in either arm
  std::array<double, 2> polarizer_offsets{};
};

/// Delay histogram of one arm over the gate, starting at delay 0.
struct McaHistogram {
  double bin_width_ns = 0.5;
  std::vector<std::uint64_t> bins;
  int window_first_bin = 0;  // peak window is [first, end)
  int window_end_bin = 0;

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto b : bins) t += b;
    return t;
  }

  McaHistogram& operator+=(const McaHistogram& other) {
    if (bins.empty()) bins.assign(other.bins.size(), 0);
    for (std::size_t k = 0; k < bins.size(); ++k) bins[k] += other.bins[k];
    return *this;
  }
};

struct MeasurementResult {
  std::vector<BlockCounts> blocks;
  std::array<McaHistogram, 2> histograms;
  double switch_p = 0.5;

  BlockCounts totals() const {
    BlockCounts t;
    for (const auto& b : blocks) {
      t.gates += b.gates;
      t.double_coincidences += b.double_coincidences;
      t.neither += b.neither;
      for (int a = 0; a < 2; ++a) {
        t.arms[a].coincidences += b.arms[a].coincidences;
        t.arms[a].in_window += b.arms[a].in_window;
        t.arms[a].sideband += b.arms[a].sideband;
      }
    }
    return t;
  }
};

struct RunOptions {
  int blocks = 1;
  std::uint64_t stream = 0;  // distinguishes runs sharing a master seed
  unsigned threads = 0;      // 0: hardware concurrency
};

namespace detail {

inline McaHistogram empty_histogram(const DetectionChainConfig& config) {
  McaHistogram h;
  h.bin_width_ns = config.bin_width_ns;
  h.bins.assign(static_cast<std::size_t>(config.bins()), 0);
  h.window_first_bin = config.window_first_bin();
  h.window_end_bin = config.window_end_bin();
  return h;
}

struct BlockOutput {
  BlockCounts counts;
  std::array<McaHistogram, 2> histograms;
};

inline BlockOutput simulate_block(const DetectionChainConfig& config, const MeasurementSpec& spec,
                                  std::uint64_t gates, RandomStream rng) {
  BlockOutput out;
  out.counts.gates = gates;
  out.histograms = {empty_histogram(config), empty_histogram(config)};

  std::array<double, 2> settings{};
  if (spec.polarizer_angles) {
    for (int a = 0; a < 2; ++a) {
      out.counts.polarizer_offsets[a] = rng.normal(0.0, config.misalignment_sigma);
      settings[a] = (*spec.polarizer_angles)[a] + out.counts.polarizer_offsets[a];
    }
  }

  const int bins = config.bins();
  const int first = config.window_first_bin();
  const int window = config.window_bins();
  std::binomial_distribution<int> accidentals(config.accidental_slots(), config.accidental_rate_per_ns);
  const bool with_accidentals = config.accidental_rate_per_ns > 0.0;

  auto record = [&](int arm, int bin, std::array<int, 2>& events) {
    out.histograms[arm].bins[static_cast<std::size_t>(bin)] += 1;
    if (bin >= first && bin < first + window) {
      out.counts.arms[arm].in_window += 1;
    } else {
      out.counts.arms[arm].sideband += 1;
    }
    events[arm] += 1;
  };
  auto uniform_bin = [&](int lo, int count) {
    return lo + std::min(count - 1, static_cast<int>(rng.uniform() * count));
  };

  for (std::uint64_t g = 0; g < gates; ++g) {
    std::array<int, 2> events{0, 0};
    const PhotonPulse pulse = sample_pulse(config.source, rng);

    // Heralded photons: route, project, detect.
    const SplitCounts routed = split_photons(pulse.signal, spec.switch_p, rng);
    const std::array<int, 2> per_arm{routed.arm_i, routed.arm_ii};
    for (int a = 0; a < 2; ++a) {
      int passed = per_arm[a];
      if (spec.polarizer_angles) {
        passed = 0;
        for (int k = 0; k < per_arm[a]; ++k) passed += polarizer_pass(config.photon_polarization, settings[a], rng);
      }
      if (detect(passed, config.tau, rng)) record(a, uniform_bin(first, window), events);
    }

    // Uncorrelated photons: unpolarized, uniform in delay.
    for (int k = 0; k < pulse.background; ++k) {
      const int a = rng.bernoulli(spec.switch_p) ? 0 : 1;
      const bool passes = !spec.polarizer_angles || rng.bernoulli(0.5);
      if (passes && detect(1, config.tau, rng)) record(a, uniform_bin(0, bins), events);
    }

    if (with_accidentals) {
      for (int a = 0; a < 2; ++a) {
        const int k = accidentals(rng);
        for (int j = 0; j < k; ++j) record(a, uniform_bin(0, bins), events);
      }
    }

    for (int a = 0; a < 2; ++a) out.counts.arms[a].coincidences += events[a] > 0 ? 1 : 0;
    if (events[0] > 0 && events[1] > 0) out.counts.double_coincidences += 1;
    if (events[0] == 0 && events[1] == 0) out.counts.neither += 1;
  }
  return out;
}

template <typename Fn>
void parallel_for(int n, unsigned threads, Fn&& fn) {
  unsigned t = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  t = std::min<unsigned>(t, static_cast<unsigned>(std::max(n, 1)));
  if (t <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> workers;
  for (unsigned w = 0; w < t; ++w) {
    workers.emplace_back([&, w] {
      for (int i = static_cast<int>(w); i < n; i += static_cast<int>(t)) fn(i);
    });
  }
}

}  // namespace detail

/// Simulates n_gates heralds split evenly over options.blocks blocks.
/// Polarizer offsets are redrawn per block. Deterministic in (config, n_gates,
/// spec, seed, options.blocks, options.stream); the thread count does not matter.
inline MeasurementResult run_measurement(const DetectionChainConfig& config, std::uint64_t n_gates,
                                         const MeasurementSpec& spec, std::uint64_t seed,
                                         const RunOptions& options = {}) {
  config.validate();
  detail::require(n_gates >= 1, "n_gates must be >= 1");
  detail::require(options.blocks >= 1, "blocks must be >= 1");
  detail::require(spec.switch_p >= 0.0 && spec.switch_p <= 1.0, "switch_p must lie in [0, 1]");
  if (spec.polarizer_angles) {
    detail::require(std::isfinite((*spec.polarizer_angles)[0]) && std::isfinite((*spec.polarizer_angles)[1]),
                    "polarizer angles must be finite");
  }

  const auto blocks = static_cast<std::uint64_t>(options.blocks);
  std::vector<detail::BlockOutput> outputs(blocks);
  detail::parallel_for(options.blocks, options.threads, [&](int i) {
    const auto idx = static_cast<std::uint64_t>(i);
    const std::uint64_t gates = n_gates / blocks + (idx < n_gates % blocks ? 1 : 0);
    outputs[idx] = detail::simulate_block(config, spec, gates,
                                          RandomStream::substream(seed, {options.stream, idx}));
  });

  MeasurementResult result;
  result.switch_p = spec.switch_p;
  result.histograms = {detail::empty_histogram(config), detail::empty_histogram(config)};
  for (auto& o : outputs) {
    result.blocks.push_back(o.counts);
    result.histograms[0] += o.histograms[0];
    result.histograms[1] += o.histograms[1];
  }
  return result;
}

// ---------------------------------------------------------------------------
// Background subtraction

struct SubtractedCounts {
  double true_count = 0.0;
  double background_count = 0.0;
  double sigma_true = 0.0;
  double sigma_background = 0.0;
};

/// Background-subtracts window counts given the sideband counts. The
/// background level per bin is the sideband mean; errors are Poisson, added in
/// quadrature.
inline SubtractedCounts subtract_background(double in_window, double sideband, int window_bins, int sideband_bins) {
  if (sideband_bins <= 0) throw CannotEstimateError("no sideband bins to estimate the background from");
  detail::require(window_bins > 0, "peak window must contain at least one bin");
  const double scale = static_cast<double>(window_bins) / sideband_bins;
  SubtractedCounts out;
  out.background_count = sideband * scale;
  out.true_count = in_window - out.background_count;
  out.sigma_background = std::sqrt(sideband) * scale;
  out.sigma_true = std::sqrt(in_window + out.sigma_background * out.sigma_background);
  return out;
}

inline SubtractedCounts background_subtract(const McaHistogram& hist) {
  const int n = static_cast<int>(hist.bins.size());
  detail::require(hist.window_first_bin >= 0 && hist.window_end_bin <= n &&
                      hist.window_first_bin < hist.window_end_bin,
                  "peak window must lie inside the histogram");
  const int window_bins = hist.window_end_bin - hist.window_first_bin;
  double in_window = 0.0;
  double sideband = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto c = static_cast<double>(hist.bins[static_cast<std::size_t>(k)]);
    (k >= hist.window_first_bin && k < hist.window_end_bin ? in_window : sideband) += c;
  }
  return subtract_background(in_window, sideband, window_bins, n - window_bins);
}

// ---------------------------------------------------------------------------
// Test campaign: one configuration = polarizer angle theta with splitter p.
// Each block pairs a run with both polarizers at theta and a run at
// theta + pi/2. Arm I receives photons with probability p, arm II with 1 - p.

struct BlockPair {
  BlockCounts at_theta;
  BlockCounts at_perp;
};

struct ConfigurationRecord {
  std::string label;
  double theta = 0.0;
  double switch_p_nominal = 0.5;
  double switch_p_actual = 0.5;
  std::vector<BlockPair> blocks;
  std::array<McaHistogram, 2> histograms;  // summed over both polarizer settings
};

/// Gates per polarizer setting (split over the blocks) and seeding of a campaign.
struct CampaignPlan {
  std::uint64_t gates_per_setting = 1'000'000;
  int blocks = 10;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

inline ConfigurationRecord run_configuration(const DetectionChainConfig& config, std::string label, double theta,
                                             double switch_p, std::uint64_t configuration_id,
                                             const CampaignPlan& plan) {
  ConfigurationRecord rec;
  rec.label = std::move(label);
  rec.theta = theta;
  rec.switch_p_nominal = switch_p;
  auto switch_rng = RandomStream::substream(plan.seed, {configuration_id, 0xFFFF'FFFFULL});
  rec.switch_p_actual = draw_switch_setting(switch_p, config.switch_bias_sigma, switch_rng);

  const RunOptions theta_run{plan.blocks, 2 * configuration_id, plan.threads};
  const RunOptions perp_run{plan.blocks, 2 * configuration_id + 1, plan.threads};
  const auto at_theta = run_measurement(config, plan.gates_per_setting,
                                        {std::array<double, 2>{theta, theta}, rec.switch_p_actual}, plan.seed, theta_run);
  const double perp = theta + kPi / 2;
  const auto at_perp = run_measurement(config, plan.gates_per_setting, {std::array<double, 2>{perp, perp}, rec.switch_p_actual},
                                       plan.seed, perp_run);
  for (std::size_t i = 0; i < at_theta.blocks.size(); ++i) rec.blocks.push_back({at_theta.blocks[i], at_perp.blocks[i]});
  rec.histograms = at_theta.histograms;
  rec.histograms[0] += at_perp.histograms[0];
  rec.histograms[1] += at_perp.histograms[1];
  return rec;
}

/// Records for <P(alpha)> at p1, <P(beta)> at p1 and <P(beta)> at p2.
struct CampaignRecord {
  ConfigurationRecord alpha_first;
  ConfigurationRecord beta_first;
  ConfigurationRecord beta_second;
};

inline CampaignRecord run_campaign(const DetectionChainConfig& config, double alpha, double beta, double p1,
                                   double p2, const CampaignPlan& plan) {
  detail::require(plan.gates_per_setting >= 1, "gates per setting must be >= 1");
  return {run_configuration(config, "alpha@p1", alpha, p1, 1, plan),
          run_configuration(config, "beta@p1", beta, p1, 2, plan),
          run_configuration(config, "beta@p2", beta, p2, 3, plan)};
}

// ---------------------------------------------------------------------------
// Source characterization: polarizers removed, splitter at the nominal ratio.

struct SourceTally {
  std::uint64_t gates = 0;
  std::uint64_t neither = 0;
  std::array<std::uint64_t, 2> singles{};  // gates in which arm I / arm II fired
  std::uint64_t doubles = 0;
  double switch_p = 0.5;
  std::array<McaHistogram, 2> histograms;

  double q_neither() const { return static_cast<double>(neither) / static_cast<double>(gates); }
  double q1(int arm) const { return static_cast<double>(singles[static_cast<std::size_t>(arm)]) / static_cast<double>(gates); }
  double q2() const { return static_cast<double>(doubles) / static_cast<double>(gates); }
};

inline SourceTally characterize_source(const DetectionChainConfig& config, std::uint64_t n_gates, std::uint64_t seed,
                                       int blocks = 10, unsigned threads = 0) {
  config.validate();
  auto switch_rng = RandomStream::substream(seed, {0xC0FFEEULL, 0xFFFF'FFFFULL});
  const double p = draw_switch_setting(config.switch_ratio, config.switch_bias_sigma, switch_rng);
  const auto result = run_measurement(config, n_gates, {std::nullopt, p}, seed, {blocks, 0xC0FFEEULL, threads});
  const auto t = result.totals();
  SourceTally tally;
  tally.gates = t.gates;
  tally.neither = t.neither;
  tally.singles = {t.arms[0].coincidences, t.arms[1].coincidences};
  tally.doubles = t.double_coincidences;
  tally.switch_p = p;
  tally.histograms = result.histograms;
  return tally;
}

}  // namespace ncl
