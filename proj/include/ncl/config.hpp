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

// Run configuration: sectioned key = value text (INI). Every key is optional
// and defaults to the values below except [execution] seed, which must be
// given here or on the command line. Unknown sections and keys are errors.
// Angles accept "55 deg", "0.96 rad", "0.96" (radians) or "11/36 pi".
//
//   [test]       a0 b0 p1 alpha beta state_angle
//   [source]     kind (ideal_single | poissonian | single_with_background) mu background_prob
//   [chain]      tau switch_ratio switch_bias_sigma misalignment_sigma gate_ns
//                accidental_rate_per_ns bin_width_ns peak_lo_ns peak_hi_ns
//   [execution]  seed gates_per_setting blocks threads misalignment_draws characterize_gates
//   [optimize]   a0_min a0_max b0_min b0_max p1_min p1_max alpha_min alpha_max
//                beta_min beta_max d_min_floor grid_points
//   [output]     dir

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ncl/angles.hpp"
#include "ncl/errors.hpp"
#include "ncl/photon_sim.hpp"
#include "ncl/test_core.hpp"

namespace ncl {

struct ExecutionConfig {
  std::optional<std::uint64_t> seed;
  std::uint64_t gates_per_setting = 1'000'000;
  int blocks = 10;
  unsigned threads = 0;
  int misalignment_draws = 1000;
  std::uint64_t characterize_gates = 1'000'000;
};

struct OptimizeConfig {
  ParameterBounds bounds{{0.1, 2.0}, {0.1, 2.0}, {0.5, 0.999}, {0.0, kPi}, {0.0, kPi}};
  double d_min_floor = 0.0189;
  int grid_points = 20;
};

struct RunConfig {
  TestParameters test;
  double state_angle = 0.0;  // input state |s(theta)>; 0 is |H>
  DetectionChainConfig chain;
  ExecutionConfig execution;
  OptimizeConfig optimize;
  std::string output_dir;

  void validate() const {
    test.validate();
    detail::require(std::isfinite(state_angle), "state_angle must be finite");
    chain.validate();
    detail::require(execution.gates_per_setting >= 1, "gates_per_setting must be >= 1");
    detail::require(execution.blocks >= 1, "blocks must be >= 1");
    detail::require(execution.misalignment_draws >= 0, "misalignment_draws must be >= 0");
    detail::require(execution.characterize_gates >= 1, "characterize_gates must be >= 1");
    detail::require(optimize.d_min_floor > 0.0, "d_min_floor must be > 0");
    detail::require(optimize.grid_points >= 1, "grid_points must be >= 1");
  }

  std::uint64_t seed() const {
    if (!execution.seed) throw InvalidArgument("no seed given: set [execution] seed or pass --seed");
    return *execution.seed;
  }
};

namespace detail {

inline SourceKind parse_source_kind(const std::string& s) {
  if (s == "ideal_single") return SourceKind::ideal_single;
  if (s == "poissonian") return SourceKind::poissonian;
  if (s == "single_with_background") return SourceKind::single_with_background;
  throw InvalidArgument("unknown source kind '" + s + "'");
}

template <typename Int>
Int parse_integer(const std::string& text, const std::string& key) {
  const std::string_view s = trim(text);
  long double v = 0;
  try {
    std::size_t pos = 0;
    v = std::stold(std::string(s), &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw InvalidArgument("cannot parse integer '" + text + "' for " + key);
  }
  if (v < 0 || v != std::floor(v) || v > static_cast<long double>(std::numeric_limits<Int>::max())) {
    throw InvalidArgument("'" + text + "' is not a valid non-negative integer for " + key);
  }
  return static_cast<Int>(v);
}

}  // namespace detail

inline std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::ideal_single:
      return "ideal_single";
    case SourceKind::poissonian:
      return "poissonian";
    case SourceKind::single_with_background:
      return "single_with_background";
  }
  return "unknown";
}

/// Parses and validates a configuration. Integers accept "1e6" style input.
inline RunConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }

  RunConfig cfg;
  using Setter = std::function<void(const std::string&)>;
  const std::string sep = ".";
  auto num = [](double& field, const std::string& key) {
    return Setter([&field, key](const std::string& v) { field = detail::parse_number(v, key); });
  };
  auto angle = [](double& field) { return Setter([&field](const std::string& v) { field = parse_angle(v); }); };
  auto u64 = [](std::uint64_t& field, const std::string& key) {
    return Setter([&field, key](const std::string& v) { field = detail::parse_integer<std::uint64_t>(v, key); });
  };
  auto i32 = [](int& field, const std::string& key) {
    return Setter([&field, key](const std::string& v) { field = detail::parse_integer<int>(v, key); });
  };

  auto& b = cfg.optimize.bounds;
  const std::map<std::string, std::map<std::string, Setter>> schema{
      {"test",
       {{"a0", num(cfg.test.a0, "a0")},
        {"b0", num(cfg.test.b0, "b0")},
        {"p1", num(cfg.test.p1, "p1")},
        {"alpha", angle(cfg.test.alpha)},
        {"beta", angle(cfg.test.beta)},
        {"state_angle", angle(cfg.state_angle)}}},
      {"source",
       {{"kind", [&](const std::string& v) { cfg.chain.source.kind = detail::parse_source_kind(std::string(detail::trim(v))); }},
        {"mu", num(cfg.chain.source.mu, "mu")},
        {"background_prob", num(cfg.chain.source.background_prob, "background_prob")}}},
      {"chain",
       {{"tau", num(cfg.chain.tau, "tau")},
        {"switch_ratio", num(cfg.chain.switch_ratio, "switch_ratio")},
        {"switch_bias_sigma", num(cfg.chain.switch_bias_sigma, "switch_bias_sigma")},
        {"misalignment_sigma", angle(cfg.chain.misalignment_sigma)},
        {"gate_ns", num(cfg.chain.gate_ns, "gate_ns")},
        {"accidental_rate_per_ns", num(cfg.chain.accidental_rate_per_ns, "accidental_rate_per_ns")},
        {"bin_width_ns", num(cfg.chain.bin_width_ns, "bin_width_ns")},
        {"peak_lo_ns", num(cfg.chain.peak_lo_ns, "peak_lo_ns")},
        {"peak_hi_ns", num(cfg.chain.peak_hi_ns, "peak_hi_ns")}}},
      {"execution",
       {{"seed",
         [&](const std::string& v) { cfg.execution.seed = detail::parse_integer<std::uint64_t>(v, "seed"); }},
        {"gates_per_setting", u64(cfg.execution.gates_per_setting, "gates_per_setting")},
        {"blocks", i32(cfg.execution.blocks, "blocks")},
        {"threads",
         [&](const std::string& v) { cfg.execution.threads = detail::parse_integer<unsigned>(v, "threads"); }},
        {"misalignment_draws", i32(cfg.execution.misalignment_draws, "misalignment_draws")},
        {"characterize_gates", u64(cfg.execution.characterize_gates, "characterize_gates")}}},
      {"optimize",
       {{"a0_min", num(b.a0.lo, "a0_min")},
        {"a0_max", num(b.a0.hi, "a0_max")},
        {"b0_min", num(b.b0.lo, "b0_min")},
        {"b0_max", num(b.b0.hi, "b0_max")},
        {"p1_min", num(b.p1.lo, "p1_min")},
        {"p1_max", num(b.p1.hi, "p1_max")},
        {"alpha_min", angle(b.alpha.lo)},
        {"alpha_max", angle(b.alpha.hi)},
        {"beta_min", angle(b.beta.lo)},
        {"beta_max", angle(b.beta.hi)},
        {"d_min_floor", num(cfg.optimize.d_min_floor, "d_min_floor")},
        {"grid_points", i32(cfg.optimize.grid_points, "grid_points")}}},
      {"output", {{"dir", [&](const std::string& v) { cfg.output_dir = std::string(detail::trim(v)); }}}},
  };

  for (const auto& [section, entries] : tree) {
    auto sec = schema.find(section);
    if (sec == schema.end()) throw InvalidArgument("config: unknown section [" + section + "]");
    if (!entries.data().empty()) throw InvalidArgument("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : entries) {
      auto setter = sec->second.find(key);
      if (setter == sec->second.end()) throw InvalidArgument("config: unknown key '" + section + sep + key + "'");
      setter->second(value.data());
    }
  }
  cfg.validate();
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace ncl
