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

// JSON model files, format "ncl-lrt-model" version 1:
//
//   {
//     "format": "ncl-lrt-model",
//     "version": 1,
//     "density": <function>,
//     "A": <function>,
//     "B": <function>
//   }
//
//   <function> = {
//     "pieces": [ {"interval": [lo, hi], "coefficients": [c0, c1, ...]}, ... ],
//     "point_values": [ {"x": x, "value": v}, ... ]        (optional)
//   }
//
// Pieces must tile the domain contiguously in increasing order. Coefficients
// are ascending powers of x (not of x - lo), at most 4 of them. A point value
// overrides the function at a knot; the default there is the limit from the
// right. Unknown keys are rejected.

#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "ncl/errors.hpp"
#include "ncl/lrt_models.hpp"

namespace ncl {

inline constexpr const char* kLrtModelFormat = "ncl-lrt-model";
inline constexpr int kLrtModelVersion = 1;

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
  if (!obj.is_object()) throw InvalidArgument(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw InvalidArgument(where + ": unknown key '" + key + "'");
  }
}

inline PiecewisePolynomial function_from_json(const nlohmann::json& j, const std::string& where) {
  reject_unknown_keys(j, {"pieces", "point_values"}, where);
  if (!j.contains("pieces") || !j["pieces"].is_array() || j["pieces"].empty()) {
    throw InvalidArgument(where + ": 'pieces' must be a non-empty array");
  }
  std::vector<double> knots;
  std::vector<Polynomial> pieces;
  for (const auto& piece : j["pieces"]) {
    reject_unknown_keys(piece, {"interval", "coefficients"}, where + ".pieces[]");
    const auto& iv = piece.at("interval");
    if (!iv.is_array() || iv.size() != 2) throw InvalidArgument(where + ": interval must be [lo, hi]");
    const double lo = iv[0].get<double>();
    const double hi = iv[1].get<double>();
    if (knots.empty()) {
      knots.push_back(lo);
    } else if (knots.back() != lo) {
      throw InvalidArgument(where + ": pieces must be contiguous");
    }
    knots.push_back(hi);
    const auto coeffs = piece.at("coefficients").get<std::vector<double>>();
    if (coeffs.empty() || coeffs.size() > kMaxModelDegree + 1) {
      throw InvalidArgument(where + ": need 1 to 4 coefficients per piece");
    }
    pieces.emplace_back(coeffs);
  }
  std::vector<std::optional<double>> values(knots.size());
  if (j.contains("point_values")) {
    for (const auto& pv : j["point_values"]) {
      reject_unknown_keys(pv, {"x", "value"}, where + ".point_values[]");
      const double x = pv.at("x").get<double>();
      auto it = std::find(knots.begin(), knots.end(), x);
      if (it == knots.end()) throw InvalidArgument(where + ": point value at a non-knot x");
      values[static_cast<std::size_t>(it - knots.begin())] = pv.at("value").get<double>();
    }
  }
  return PiecewisePolynomial(std::move(knots), std::move(pieces), std::move(values));
}

inline nlohmann::json function_to_json(const PiecewisePolynomial& f) {
  nlohmann::json pieces = nlohmann::json::array();
  nlohmann::json points = nlohmann::json::array();
  const auto knots = f.knots();
  for (std::size_t k = 0; k < f.pieces().size(); ++k) {
    const auto c = f.pieces()[k].coefficients();
    std::vector<double> coeffs(c.begin(), c.end());
    if (coeffs.empty()) coeffs.push_back(0.0);
    pieces.push_back({{"interval", {knots[k], knots[k + 1]}}, {"coefficients", coeffs}});
  }
  for (std::size_t k = 0; k < knots.size(); ++k) points.push_back({{"x", knots[k]}, {"value", f.knot_values()[k]}});
  return {{"pieces", pieces}, {"point_values", points}};
}

}  // namespace detail

inline HiddenVariableModel model_from_json(const nlohmann::json& j) {
  try {
    detail::reject_unknown_keys(j, {"format", "version", "density", "A", "B"}, "model");
    if (j.value("format", "") != kLrtModelFormat) throw InvalidArgument("model: format must be 'ncl-lrt-model'");
    if (j.value("version", 0) != kLrtModelVersion) throw InvalidArgument("model: unsupported version");
    return HiddenVariableModel(detail::function_from_json(j.at("density"), "density"),
                               detail::function_from_json(j.at("A"), "A"),
                               detail::function_from_json(j.at("B"), "B"));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("model: ") + e.what());
  }
}

inline nlohmann::json model_to_json(const HiddenVariableModel& model) {
  return {{"format", kLrtModelFormat},
          {"version", kLrtModelVersion},
          {"density", detail::function_to_json(model.density())},
          {"A", detail::function_to_json(model.func_a())},
          {"B", detail::function_to_json(model.func_b())}};
}

inline HiddenVariableModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("model file '" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace ncl
