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

// Report builders behind the command-line subcommands. Every builder is a
// pure function of its inputs, so equal configs and seeds give byte-identical
// JSON. Reports carry a "rows" array (quantity, value, sigma_stat,
// sigma_total, qm_prediction) that the text and CSV renderers print.

#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncl/analysis.hpp"
#include "ncl/config.hpp"
#include "ncl/lrt_io.hpp"
#include "ncl/lrt_models.hpp"
#include "ncl/photon_sim.hpp"
#include "ncl/test_core.hpp"

namespace ncl {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";

/// Report JSON plus auxiliary files (name -> contents) such as CSV histograms.
struct CommandOutput {
  Json report;
  std::map<std::string, std::string> files;
};

namespace detail {

inline Json metadata(const std::string& command) {
  return {{"tool", "ncl"}, {"version", kToolVersion}, {"command", command}};
}

inline Json params_json(const TestParameters& p, double state_angle) {
  return {{"a0", p.a0},
          {"b0", p.b0},
          {"p1", p.p1},
          {"p2", p.p2()},
          {"alpha_rad", p.alpha},
          {"beta_rad", p.beta},
          {"alpha_deg", to_degrees(p.alpha)},
          {"beta_deg", to_degrees(p.beta)},
          {"state_angle_rad", state_angle}};
}

inline Json prediction_json(const QuantumPrediction& q) {
  return {{"mean_A", q.mean_a},         {"mean_A2", q.mean_a2},         {"mean_B", q.mean_b},
          {"mean_B2", q.mean_b2},       {"diff_first", q.diff_first},   {"diff_second", q.diff_second},
          {"d_minus", q.d_minus},       {"violates", q.diff_second < 0.0 && q.d_minus >= 0.0}};
}

inline Json row(const std::string& name, double value, std::optional<double> sigma_stat = std::nullopt,
                std::optional<double> sigma_total = std::nullopt, std::optional<double> qm = std::nullopt) {
  Json r{{"quantity", name}, {"value", value}};
  r["sigma_stat"] = sigma_stat ? Json(*sigma_stat) : Json(nullptr);
  r["sigma_total"] = sigma_total ? Json(*sigma_total) : Json(nullptr);
  r["qm_prediction"] = qm ? Json(*qm) : Json(nullptr);
  return r;
}

inline Json row(const std::string& name, const EstimateWithUncertainty& e, std::optional<double> qm = std::nullopt) {
  return row(name, e.value, e.sigma_stat, e.sigma_total, qm);
}

inline Json prediction_rows(const QuantumPrediction& q, double p2) {
  Json rows = Json::array();
  rows.push_back(row("<A>", q.mean_a));
  rows.push_back(row("<A^2>", q.mean_a2));
  rows.push_back(row("<B>", q.mean_b));
  rows.push_back(row("<B^2>", q.mean_b2));
  rows.push_back(row("<B>-<A>", q.diff_first));
  rows.push_back(row("<B^2>-<A^2>", q.diff_second));
  rows.push_back(row("d_minus", q.d_minus));
  rows.push_back(row("p2", p2));
  return rows;
}

inline Json estimate_json(const EstimateWithUncertainty& e) {
  return {{"value", e.value}, {"sigma_stat", e.sigma_stat}, {"sigma_total", e.sigma_total}};
}

inline Json block_json(const BlockCounts& b) {
  Json arms = Json::array();
  for (const auto& a : b.arms) {
    arms.push_back({{"coincidences", a.coincidences}, {"in_window", a.in_window}, {"sideband", a.sideband}});
  }
  return {{"gates", b.gates},
          {"arms", arms},
          {"double_coincidences", b.double_coincidences},
          {"neither", b.neither},
          {"polarizer_offsets_rad", b.polarizer_offsets}};
}

inline Json configuration_json(const ConfigurationRecord& rec) {
  Json at_theta = Json::array();
  Json at_perp = Json::array();
  for (const auto& b : rec.blocks) {
    at_theta.push_back(block_json(b.at_theta));
    at_perp.push_back(block_json(b.at_perp));
  }
  return {{"label", rec.label},
          {"theta_rad", rec.theta},
          {"switch_p_nominal", rec.switch_p_nominal},
          {"switch_p_actual", rec.switch_p_actual},
          {"blocks_at_theta", at_theta},
          {"blocks_at_theta_plus_90deg", at_perp}};
}

}  // namespace detail

/// CSV with header (bin_start_ns, count).
inline std::string histogram_csv(const McaHistogram& h) {
  std::ostringstream out;
  out << "bin_start_ns,count\n";
  char buf[64];
  for (std::size_t k = 0; k < h.bins.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.6g", static_cast<double>(k) * h.bin_width_ns);
    out << buf << ',' << h.bins[k] << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

inline CommandOutput cmd_predict(const RunConfig& cfg, bool with_optimizer = false) {
  cfg.validate();
  const auto q = predict(cfg.test, pure_state(cfg.state_angle));
  CommandOutput out;
  out.report["metadata"] = detail::metadata("predict");
  out.report["parameters"] = detail::params_json(cfg.test, cfg.state_angle);
  out.report["prediction"] = detail::prediction_json(q);
  out.report["rows"] = detail::prediction_rows(q, cfg.test.p2());
  if (with_optimizer) {
    OptimizerOptions opt;
    opt.grid_points = cfg.optimize.grid_points;
    opt.threads = cfg.execution.threads;
    const auto r = optimize_parameters(cfg.optimize.bounds, cfg.optimize.d_min_floor, opt);
    out.report["optimization"] = {{"d_min_floor", cfg.optimize.d_min_floor},
                                  {"parameters", detail::params_json(r.params, 0.0)},
                                  {"prediction", detail::prediction_json(r.prediction)},
                                  {"violation", r.violation},
                                  {"evaluations", r.evaluations}};
  }
  return out;
}

inline CommandOutput cmd_optimize(const RunConfig& cfg) {
  cfg.validate();
  OptimizerOptions opt;
  opt.grid_points = cfg.optimize.grid_points;
  opt.threads = cfg.execution.threads;
  const auto r = optimize_parameters(cfg.optimize.bounds, cfg.optimize.d_min_floor, opt);
  const auto& b = cfg.optimize.bounds;
  auto range = [](const ParameterRange& rg) { return Json::array({rg.lo, rg.hi}); };
  CommandOutput out;
  out.report["metadata"] = detail::metadata("optimize");
  out.report["bounds"] = {{"a0", range(b.a0)},
                          {"b0", range(b.b0)},
                          {"p1", range(b.p1)},
                          {"alpha_rad", range(b.alpha)},
                          {"beta_rad", range(b.beta)}};
  out.report["d_min_floor"] = cfg.optimize.d_min_floor;
  out.report["parameters"] = detail::params_json(r.params, 0.0);
  out.report["prediction"] = detail::prediction_json(r.prediction);
  out.report["violation"] = r.violation;
  out.report["evaluations"] = r.evaluations;
  out.report["rows"] = detail::prediction_rows(r.prediction, r.params.p2());
  return out;
}

inline std::string describe_interval(const DominanceInterval& iv) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%c%.6f, %.6f%c", iv.lo_closed ? '[' : '(', iv.lo, iv.hi, iv.hi_closed ? ']' : ')');
  return buf;
}

inline CommandOutput cmd_lrt(const HiddenVariableModel& model, double tol = 0.0) {
  const auto m = classical_moments(model);
  const auto dom = check_dominance(model, tol);
  CommandOutput out;
  out.report["metadata"] = detail::metadata("lrt");
  out.report["moments"] = {{"mean_A", m.mean_a},
                           {"mean_A2", m.mean_a2},
                           {"mean_B", m.mean_b},
                           {"mean_B2", m.mean_b2},
                           {"diff_first", m.diff_first()},
                           {"diff_second", m.diff_second()}};
  Json intervals = Json::array();
  std::string summary = dom.holds ? "dominance holds" : "dominance violated on";
  for (std::size_t k = 0; k < dom.violation_intervals.size(); ++k) {
    const auto& iv = dom.violation_intervals[k];
    intervals.push_back({{"lo", iv.lo}, {"hi", iv.hi}, {"lo_closed", iv.lo_closed}, {"hi_closed", iv.hi_closed}});
    summary += (k == 0 ? " " : ", ") + describe_interval(iv);
  }
  out.report["dominance"] = {
      {"holds", dom.holds}, {"tolerance", tol}, {"violation_intervals", intervals}, {"summary", summary}};
  out.report["theorem_check"] = classical_theorem_check(model);
  Json rows = Json::array();
  rows.push_back(detail::row("<A>", m.mean_a));
  rows.push_back(detail::row("<A^2>", m.mean_a2));
  rows.push_back(detail::row("<B>", m.mean_b));
  rows.push_back(detail::row("<B^2>", m.mean_b2));
  rows.push_back(detail::row("<B>-<A>", m.diff_first()));
  rows.push_back(detail::row("<B^2>-<A^2>", m.diff_second()));
  out.report["rows"] = rows;
  return out;
}

inline CommandOutput cmd_characterize(const RunConfig& cfg) {
  cfg.validate();
  auto chain = cfg.chain;
  chain.photon_polarization = cfg.state_angle;
  const auto tally = characterize_source(chain, cfg.execution.characterize_gates, cfg.seed(), cfg.execution.blocks,
                                         cfg.execution.threads);
  const auto metrics = characterization_metrics(tally);
  const auto analytic = analytic_q(chain.source, chain.tau, tally.switch_p);

  CommandOutput out;
  out.report["metadata"] = detail::metadata("characterize");
  out.report["source"] = {{"kind", to_string(chain.source.kind)},
                          {"mu", chain.source.mu},
                          {"background_prob", chain.source.background_prob},
                          {"tau", chain.tau},
                          {"switch_p_nominal", chain.switch_ratio},
                          {"switch_p_actual", tally.switch_p}};
  out.report["counts"] = {{"gates", tally.gates},
                          {"neither", tally.neither},
                          {"singles", tally.singles},
                          {"doubles", tally.doubles}};
  out.report["empirical"] = {{"Q_neither", tally.q_neither()},
                             {"Q1_I", tally.q1(0)},
                             {"Q1_II", tally.q1(1)},
                             {"Q2", tally.q2()}};
  out.report["analytic"] = {{"Q_neither", analytic.q_neither},
                            {"Q1_I", analytic.q1_arm_i},
                            {"Q1_II", analytic.q1_arm_ii},
                            {"Q2", analytic.q2},
                            {"gamma1", analytic.gamma1()},
                            {"gamma2", analytic.gamma2()},
                            {"grangier_alpha", analytic.grangier_alpha()}};
  out.report["metrics"] = {{"gamma1", detail::estimate_json(metrics.gamma1)},
                           {"gamma2", detail::estimate_json(metrics.gamma2)},
                           {"gamma_ratio", detail::estimate_json(metrics.gamma_ratio)},
                           {"grangier_alpha", detail::estimate_json(metrics.grangier_alpha)}};

  Json subtracted = Json::array();
  for (int a = 0; a < 2; ++a) {
    const auto s = background_subtract(tally.histograms[static_cast<std::size_t>(a)]);
    subtracted.push_back({{"arm", a == 0 ? "I" : "II"},
                          {"true_count", s.true_count},
                          {"sigma_true", s.sigma_true},
                          {"background_count", s.background_count},
                          {"sigma_background", s.sigma_background}});
  }
  out.report["background_subtracted_singles"] = subtracted;

  Json rows = Json::array();
  rows.push_back(detail::row("Gamma1", metrics.gamma1, analytic.gamma1()));
  rows.push_back(detail::row("Gamma2", metrics.gamma2, analytic.gamma2()));
  rows.push_back(detail::row("Gamma2/Gamma1", metrics.gamma_ratio, analytic.gamma2() / analytic.gamma1()));
  rows.push_back(detail::row("grangier_alpha", metrics.grangier_alpha, analytic.grangier_alpha()));
  out.report["rows"] = rows;

  out.files["histogram_arm_I.csv"] = histogram_csv(tally.histograms[0]);
  out.files["histogram_arm_II.csv"] = histogram_csv(tally.histograms[1]);
  return out;
}

/// Full test campaign on the simulated chain, Table-I style.
inline CommandOutput cmd_simulate(const RunConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = cfg.seed();
  auto chain = cfg.chain;
  chain.photon_polarization = cfg.state_angle;
  const auto& params = cfg.test;

  const CampaignPlan plan{cfg.execution.gates_per_setting, cfg.execution.blocks, seed, cfg.execution.threads};
  const auto campaign = run_campaign(chain, params.alpha, params.beta, params.p1, params.p2(), plan);
  const auto est = estimate_projectors(campaign, chain);
  const AssemblyOptions assembly{chain.misalignment_sigma, cfg.execution.misalignment_draws, chain.switch_bias_sigma,
                                 seed};
  const auto tq = assemble_test_quantities(est, params, assembly);
  const auto qm = predict(params, pure_state(cfg.state_angle));
  const double sig = significance(tq.diff_second);

  const auto tally = characterize_source(chain, cfg.execution.characterize_gates, seed, cfg.execution.blocks,
                                         cfg.execution.threads);
  const auto metrics = characterization_metrics(tally);
  const double tau_est = tau_from_gamma1(metrics.gamma1.value);
  const double shift = tau_est > 0.0 ? multiphoton_shift(est, params, tau_est, metrics.gamma2.value) : 0.0;

  CommandOutput out;
  out.report["metadata"] = detail::metadata("simulate");
  out.report["parameters"] = detail::params_json(params, cfg.state_angle);
  out.report["execution"] = {{"seed", seed},
                             {"gates_per_setting", plan.gates_per_setting},
                             {"blocks", plan.blocks},
                             {"misalignment_draws", cfg.execution.misalignment_draws}};
  Json rows = Json::array();
  rows.push_back(detail::row("E[<A>]", tq.mean_a, qm.mean_a));
  rows.push_back(detail::row("E[<A^2>]", tq.mean_a2, qm.mean_a2));
  rows.push_back(detail::row("E[<B>]", tq.mean_b, qm.mean_b));
  rows.push_back(detail::row("E[<B^2>]", tq.mean_b2, qm.mean_b2));
  rows.push_back(detail::row("E[<B>-<A>]", tq.diff_first, qm.diff_first));
  rows.push_back(detail::row("E[<B^2>-<A^2>]", tq.diff_second, qm.diff_second));
  rows.push_back(detail::row("E[p1]", *tq.p1_measured, params.p1));
  rows.push_back(detail::row("E[p2]", *tq.p2_measured, params.p2()));
  rows.push_back(detail::row("d_minus (indirect)", tq.d_minus_indirect, qm.d_minus));
  out.report["rows"] = rows;
  out.report["projectors"] = {{"P_alpha@p1", detail::estimate_json(est.p_alpha)},
                              {"P_beta@p1", detail::estimate_json(est.p_beta_first)},
                              {"P_beta@p2", detail::estimate_json(est.p_beta_second)}};
  out.report["significance"] = sig;
  out.report["violation"] = tq.diff_second.value < 0.0;
  out.report["multiphoton"] = {{"tau_estimate", tau_est},
                               {"gamma1", detail::estimate_json(metrics.gamma1)},
                               {"gamma2", detail::estimate_json(metrics.gamma2)},
                               {"two_photon_fraction", tau_est > 0.0 ? two_photon_fraction(tau_est, metrics.gamma2.value) : 0.0},
                               {"diff_second_shift", shift},
                               {"below_tenth_of_sigma_total", shift < 0.1 * tq.diff_second.sigma_total}};

  Json counts;
  counts["metadata"] = detail::metadata("simulate");
  counts["seed"] = seed;
  counts["configurations"] = Json::array({detail::configuration_json(campaign.alpha_first),
                                          detail::configuration_json(campaign.beta_first),
                                          detail::configuration_json(campaign.beta_second)});
  out.files["counts.json"] = counts.dump(2) + "\n";
  for (const auto* rec : {&campaign.alpha_first, &campaign.beta_first, &campaign.beta_second}) {
    std::string stem = rec->label;
    std::replace(stem.begin(), stem.end(), '@', '_');
    out.files["histogram_" + stem + "_arm_I.csv"] = histogram_csv(rec->histograms[0]);
    out.files["histogram_" + stem + "_arm_II.csv"] = histogram_csv(rec->histograms[1]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Renderers

namespace detail {

inline std::string cell(const Json& v, const char* fmt = "%.6f") {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v.get<double>());
  return buf;
}

}  // namespace detail

inline std::string render_table(const Json& report) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-20s %12s %12s %12s %14s\n", "quantity", "value", "sigma_stat", "sigma_total",
                "QM prediction");
  out << buf;
  for (const auto& r : report.at("rows")) {
    std::snprintf(buf, sizeof buf, "%-20s %12s %12s %12s %14s\n", r.at("quantity").get<std::string>().c_str(),
                  detail::cell(r.at("value")).c_str(), detail::cell(r.at("sigma_stat")).c_str(),
                  detail::cell(r.at("sigma_total")).c_str(), detail::cell(r.at("qm_prediction")).c_str());
    out << buf;
  }
  if (report.contains("significance")) {
    std::snprintf(buf, sizeof buf, "violation significance: %.2f standard deviations\n",
                  report["significance"].get<double>());
    out << buf;
  }
  if (report.contains("dominance")) out << report["dominance"]["summary"].get<std::string>() << '\n';
  if (report.contains("optimization")) {
    const auto& o = report["optimization"];
    const auto& p = o["parameters"];
    std::snprintf(buf, sizeof buf, "optimized: a0=%.6f b0=%.6f p1=%.6f alpha=%.4f deg beta=%.4f deg violation=%.6f\n",
                  p["a0"].get<double>(), p["b0"].get<double>(), p["p1"].get<double>(), p["alpha_deg"].get<double>(),
                  p["beta_deg"].get<double>(), o["violation"].get<double>());
    out << buf;
  }
  return out.str();
}

inline std::string render_csv(const Json& report) {
  std::ostringstream out;
  out << "quantity,value,sigma_stat,sigma_total,qm_prediction\n";
  for (const auto& r : report.at("rows")) {
    out << r.at("quantity").get<std::string>() << ',' << detail::cell(r.at("value"), "%.17g") << ','
        << detail::cell(r.at("sigma_stat"), "%.17g") << ',' << detail::cell(r.at("sigma_total"), "%.17g") << ','
        << detail::cell(r.at("qm_prediction"), "%.17g") << '\n';
  }
  return out.str();
}

}  // namespace ncl
