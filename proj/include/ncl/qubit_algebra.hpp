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

// Exact linear algebra on a single qubit: density matrices, Hermitian
// observables, polarization projectors and closed-form eigenvalues.
//
// All angles are in radians. The polarization basis is {|H>, |V>}, so the
// projector at angle theta projects onto cos(theta)|H> + sin(theta)|V>.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <string>

#include "ncl/errors.hpp"

namespace ncl {

using Complex = std::complex<double>;

/// Hermiticity and trace tolerance for closed-form constructions.
inline constexpr double kMatrixTolerance = 1e-12;

/// Row-major 2x2 complex matrix.
class Matrix2 {
 public:
  constexpr Matrix2() = default;
  constexpr Matrix2(Complex m00, Complex m01, Complex m10, Complex m11) : m_{m00, m01, m10, m11} {}

  static constexpr Matrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Matrix2 zero() { return {}; }

  constexpr Complex& operator()(int row, int col) { return m_[static_cast<std::size_t>(2 * row + col)]; }
  constexpr const Complex& operator()(int row, int col) const {
    return m_[static_cast<std::size_t>(2 * row + col)];
  }

  Matrix2 adjoint() const {
    return {std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3])};
  }
  Complex trace() const { return m_[0] + m_[3]; }

  /// Largest elementwise modulus of (*this - other).
  double max_abs_diff(const Matrix2& other) const {
    double worst = 0.0;
    for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(m_[k] - other.m_[k]));
    return worst;
  }

  bool is_hermitian(double tol = kMatrixTolerance) const { return max_abs_diff(adjoint()) <= tol; }

  friend Matrix2 operator+(const Matrix2& a, const Matrix2& b) {
    return {a.m_[0] + b.m_[0], a.m_[1] + b.m_[1], a.m_[2] + b.m_[2], a.m_[3] + b.m_[3]};
  }
  friend Matrix2 operator-(const Matrix2& a, const Matrix2& b) {
    return {a.m_[0] - b.m_[0], a.m_[1] - b.m_[1], a.m_[2] - b.m_[2], a.m_[3] - b.m_[3]};
  }
  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
    return {a.m_[0] * b.m_[0] + a.m_[1] * b.m_[2], a.m_[0] * b.m_[1] + a.m_[1] * b.m_[3],
            a.m_[2] * b.m_[0] + a.m_[3] * b.m_[2], a.m_[2] * b.m_[1] + a.m_[3] * b.m_[3]};
  }
  friend Matrix2 operator*(Complex s, const Matrix2& a) {
    return {s * a.m_[0], s * a.m_[1], s * a.m_[2], s * a.m_[3]};
  }
  friend bool operator==(const Matrix2&, const Matrix2&) = default;

 private:
  std::array<Complex, 4> m_{};
};

/// Eigenvalues of a Hermitian 2x2 matrix, ascending.
struct Eigenvalues {
  double lower;
  double upper;
};

namespace detail {

inline Eigenvalues hermitian_eigenvalues(const Matrix2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), std::abs(m(0, 1)));
  return {mean - radius, mean + radius};
}

}  // namespace detail

/// Hermitian observable on the qubit.
class QubitObservable {
 public:
  explicit QubitObservable(const Matrix2& m) : m_(m) {
    detail::require(m.is_hermitian(), "observable matrix is not Hermitian");
  }

  static QubitObservable identity() { return QubitObservable(Matrix2::identity()); }

  const Matrix2& matrix() const { return m_; }

 private:
  Matrix2 m_;
};

/// Density matrix: Hermitian, unit trace, positive semidefinite.
class QubitState {
 public:
  explicit QubitState(const Matrix2& rho) : rho_(rho) {
    detail::require(rho.is_hermitian(), "density matrix is not Hermitian");
    detail::require(std::abs(rho.trace() - 1.0) <= kMatrixTolerance, "density matrix trace is not 1");
    detail::require(detail::hermitian_eigenvalues(rho).lower >= -kMatrixTolerance,
                    "density matrix has a negative eigenvalue");
  }

  static QubitState maximally_mixed() { return QubitState(Matrix2{0.5, 0.0, 0.0, 0.5}); }

  const Matrix2& rho() const { return rho_; }

 private:
  Matrix2 rho_;
};

namespace detail {

inline Matrix2 ket_bra(double theta) {
  if (!std::isfinite(theta)) throw InvalidArgument("angle must be finite");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * c, c * s, c * s, s * s};
}

}  // namespace detail

/// |s(theta)><s(theta)| with |s(theta)> = cos(theta)|H> + sin(theta)|V>.
inline QubitState pure_state(double theta) { return QubitState(detail::ket_bra(theta)); }

/// Projector onto |s(theta)>. projector(theta + pi/2) is its orthogonal complement.
inline QubitObservable projector(double theta) { return QubitObservable(detail::ket_bra(theta)); }

/// Tr(obs * rho). The imaginary residue is at rounding level for valid inputs.
inline double expectation(const QubitObservable& obs, const QubitState& state) {
  return (obs.matrix() * state.rho()).trace().real();
}

inline Eigenvalues eigenvalues(const QubitObservable& obs) {
  return detail::hermitian_eigenvalues(obs.matrix());
}

struct WeightedObservable {
  double coefficient;
  QubitObservable observable;
};

/// Real linear combination sum_k c_k O_k.
inline QubitObservable obs_combine(std::span<const WeightedObservable> terms) {
  Matrix2 sum = Matrix2::zero();
  for (const auto& term : terms) {
    detail::require(std::isfinite(term.coefficient), "combination coefficient must be finite");
    sum = sum + Complex(term.coefficient) * term.observable.matrix();
  }
  return QubitObservable(sum);
}

inline QubitObservable obs_combine(std::initializer_list<WeightedObservable> terms) {
  return obs_combine(std::span<const WeightedObservable>(terms.begin(), terms.size()));
}

/// Plain matrix product; the result need not be Hermitian.
inline Matrix2 obs_multiply(const QubitObservable& a, const QubitObservable& b) {
  return a.matrix() * b.matrix();
}

}  // namespace ncl
