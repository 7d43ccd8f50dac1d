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

#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "ncl/errors.hpp"

namespace ncl {

inline constexpr double kPi = std::numbers::pi;

constexpr double degrees(double deg) { return deg * kPi / 180.0; }
constexpr double to_degrees(double rad) { return rad * 180.0 / kPi; }

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline double parse_number(std::string_view s, std::string_view context) {
  s = trim(s);
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw InvalidArgument("cannot parse number '" + std::string(s) + "' in " + std::string(context));
  }
  return value;
}

// "11/36", "-1/2", "0.25" or "" (meaning 1).
inline double parse_ratio(std::string_view s, std::string_view context) {
  s = trim(s);
  if (s.empty()) return 1.0;
  if (s == "-") return -1.0;
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_number(s, context);
  const double den = parse_number(s.substr(slash + 1), context);
  if (den == 0.0) throw InvalidArgument("zero denominator in " + std::string(context));
  return parse_number(s.substr(0, slash), context) / den;
}

inline bool consume_suffix(std::string_view& s, std::string_view suffix) {
  if (s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix) {
    s.remove_suffix(suffix.size());
    return true;
  }
  return false;
}

}  // namespace detail

/// Parses an angle and returns radians.
///
/// Accepted forms: "0.96" or "0.96 rad" (radians), "55 deg" / "55deg",
/// and rational multiples of pi such as "11/36 pi", "5/12pi", "pi/4", "pi".
inline double parse_angle(std::string_view text) {
  std::string_view s = detail::trim(text);
  const std::string context = "angle '" + std::string(text) + "'";
  if (s.empty()) throw InvalidArgument("empty " + context);

  if (detail::consume_suffix(s, "deg")) return degrees(detail::parse_number(s, context));
  if (detail::consume_suffix(s, "rad")) return detail::parse_number(s, context);

  const auto pi_pos = s.find("pi");
  if (pi_pos == std::string_view::npos) return detail::parse_number(s, context);

  std::string_view before = detail::trim(s.substr(0, pi_pos));
  std::string_view after = detail::trim(s.substr(pi_pos + 2));
  if (detail::consume_suffix(before, "*")) before = detail::trim(before);
  double factor = detail::parse_ratio(before, context);
  if (!after.empty()) {
    if (after.front() != '/') throw InvalidArgument("cannot parse " + context);
    const double den = detail::parse_number(after.substr(1), context);
    if (den == 0.0) throw InvalidArgument("zero denominator in " + context);
    factor /= den;
  }
  return factor * kPi;
}

}  // namespace ncl
