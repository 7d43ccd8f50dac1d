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

#include <stdexcept>
#include <string>

namespace ncl {

/// Bad input value or violated precondition. The CLI maps it to exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An estimator had nothing to divide by (zero counts, zero gates).
class NoDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No candidate in the search box satisfies the operator constraint.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The p2 form of B^2 has a removable singularity at p2 = 1/2.
class DegeneratePrefactorError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Background subtraction without a sideband.
class CannotEstimateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UndefinedSignificanceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace detail
}  // namespace ncl
