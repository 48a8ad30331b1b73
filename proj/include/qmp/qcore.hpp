// Copyright 2026 The qmp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmp {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

// Numerical floors shared by every module.
inline constexpr double kPsdTol = 1e-10;      // eigenvalue >= -kPsdTol counts as PSD
inline constexpr double kPivotTol = 1e-12;    // Cholesky pivot floor
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kDefaultTol = 1e-10;

/// Dense N x N complex matrix stored row-major. Small and copied by value.
template <std::size_t N>
class CMat {
 public:
  static constexpr std::size_t kDim = N;

  CMat() = default;

  CMat(std::initializer_list<std::initializer_list<cplx>> rows) {
    if (rows.size() != N) throw std::invalid_argument("CMat: wrong number of rows");
    std::size_t r = 0;
    for (const auto& row : rows) {
      if (row.size() != N) throw std::invalid_argument("CMat: wrong number of columns");
      std::size_t c = 0;
      for (const auto& v : row) a_[r * N + c++] = v;
      ++r;
    }
  }

  static CMat identity() {
    CMat m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }

  static CMat diagonal(const std::array<double, N>& d) {
    CMat m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
    return m;
  }

  cplx& operator()(std::size_t r, std::size_t c) { return a_[r * N + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return a_[r * N + c]; }

  std::span<const cplx, N * N> entries() const { return a_; }
  std::span<cplx, N * N> entries() { return a_; }

  CMat& operator+=(const CMat& o) {
    for (std::size_t i = 0; i < N * N; ++i) a_[i] += o.a_[i];
    return *this;
  }
  CMat& operator-=(const CMat& o) {
    for (std::size_t i = 0; i < N * N; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  CMat& operator*=(cplx s) {
    for (auto& v : a_) v *= s;
    return *this;
  }

  friend CMat operator+(CMat a, const CMat& b) { return a += b; }
  friend CMat operator-(CMat a, const CMat& b) { return a -= b; }
  friend CMat operator-(CMat a) { return a *= -1.0; }
  friend CMat operator*(CMat a, cplx s) { return a *= s; }
  friend CMat operator*(cplx s, CMat a) { return a *= s; }
  friend CMat operator/(CMat a, cplx s) { return a *= (1.0 / s); }

  friend CMat operator*(const CMat& a, const CMat& b) {
    CMat out;
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t k = 0; k < N; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (std::size_t j = 0; j < N; ++j) out(i, j) += aik * b(k, j);
      }
    }
    return out;
  }

  friend bool operator==(const CMat&, const CMat&) = default;

  CMat adjoint() const {
    CMat out;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  CMat transpose() const {
    CMat out;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  cplx trace() const {
    cplx t{};
    for (std::size_t i = 0; i < N; ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
  }

  bool is_finite() const {
    for (const auto& v : a_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

  /// max_ij |a_ij - conj(a_ji)|
  double hermiticity_defect() const {
    double d = 0.0;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = i; j < N; ++j)
        d = std::max(d, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return d;
  }

  CMat hermitian_part() const { return 0.5 * (*this + adjoint()); }

 private:
  std::array<cplx, N * N> a_{};
};

using Mat2 = CMat<2>;
using Mat4 = CMat<4>;

template <std::size_t N>
CMat<N> commutator(const CMat<N>& a, const CMat<N>& b) {
  return a * b - b * a;
}

template <std::size_t N>
CMat<N> anticommutator(const CMat<N>& a, const CMat<N>& b) {
  return a * b + b * a;
}

template <std::size_t N>
double frobenius_distance(const CMat<N>& a, const CMat<N>& b) {
  return (a - b).frobenius_norm();
}

template <std::size_t N>
double max_abs_diff(const CMat<N>& a, const CMat<N>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < N * N; ++i) d = std::max(d, std::abs(a.entries()[i] - b.entries()[i]));
  return d;
}

enum class Subsystem { A, B };

/// Kronecker product, (a (x) b)[2i+k][2j+l] = a[i][j] * b[k][l].
Mat4 tensor(const Mat2& a, const Mat2& b);

/// Traces out `traced`; partial_trace(a (x) b, B) == a * Tr(b).
Mat2 partial_trace(const Mat4& rho, Subsystem traced);

struct ValidationReport {
  double hermiticity_defect = 0.0;
  double trace_defect = 0.0;
  double min_eigenvalue = 0.0;
  bool valid = false;
};

template <std::size_t N>
ValidationReport validate_state(const CMat<N>& rho, double tol = kDefaultTol);

/// A matrix that passed validate_state at construction.
template <std::size_t N>
class DensityMatrix {
 public:
  static DensityMatrix from(const CMat<N>& m, double tol = kDefaultTol) {
    auto rep = validate_state(m, tol);
    if (!rep.valid)
      throw std::invalid_argument("not a density matrix (hermiticity " +
                                  std::to_string(rep.hermiticity_defect) + ", trace " +
                                  std::to_string(rep.trace_defect) + ", min eigenvalue " +
                                  std::to_string(rep.min_eigenvalue) + ")");
    return DensityMatrix(m, tol);
  }

  static std::optional<DensityMatrix> try_from(const CMat<N>& m, double tol = kDefaultTol) {
    if (!validate_state(m, tol).valid) return std::nullopt;
    return DensityMatrix(m, tol);
  }

  const CMat<N>& mat() const { return mat_; }
  double tol() const { return tol_; }

 private:
  DensityMatrix(const CMat<N>& m, double tol) : mat_(m), tol_(tol) {}
  CMat<N> mat_;
  double tol_;
};

/// Semidefinite Cholesky: returns lower-triangular L with rho = L L^dagger and
/// L_ii >= 0 when rho is PSD, nothing otherwise. Throws on non-Hermitian input.
template <std::size_t N>
std::optional<CMat<N>> cholesky_psd(const CMat<N>& rho);

struct PowerTrace {
  double value = 0.0;
  double imag_residual = 0.0;
};

/// Tr(rho^k) for k in 1..4.
template <std::size_t N>
PowerTrace trace_power(const CMat<N>& rho, int k);

template <std::size_t N>
struct EigenSystem {
  std::array<double, N> values{};  // ascending
  CMat<N> vectors;                 // column j belongs to values[j]
};

/// Cyclic Jacobi for Hermitian matrices. Eigenvalues ascending; each eigenvector
/// has its first non-negligible component real-positive.
template <std::size_t N>
EigenSystem<N> spectrum(const CMat<N>& h);

template <std::size_t N>
std::array<double, N> eigenvalues(const CMat<N>& h) {
  return spectrum(h).values;
}

/// exp(-i h t) for Hermitian h.
template <std::size_t N>
CMat<N> unitary_propagator(const CMat<N>& h, double t);

/// Closest unitary in Frobenius norm, a (a^dagger a)^(-1/2). Throws if singular.
template <std::size_t N>
CMat<N> polar_unitary(const CMat<N>& a);

template <std::size_t N>
cplx determinant(const CMat<N>& a);

struct Grid {
  double t0 = 0.0;
  double dt = 1e-3;
  std::size_t steps = 0;  // number of intervals; samples = steps + 1

  std::size_t samples() const { return steps + 1; }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
};

/// Uniform time grid with one matrix per point.
template <std::size_t N>
class Trajectory {
 public:
  Trajectory(double t0, double dt, std::vector<CMat<N>> samples)
      : t0_(t0), dt_(dt), samples_(std::move(samples)) {
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw std::invalid_argument("Trajectory: dt must be > 0");
    if (samples_.size() < 3) throw std::invalid_argument("Trajectory: need at least 3 samples");
  }

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  std::size_t size() const { return samples_.size(); }
  double time(std::size_t i) const { return t0_ + static_cast<double>(i) * dt_; }
  double t_end() const { return time(size() - 1); }
  Grid grid() const { return {t0_, dt_, samples_.size() - 1}; }

  const CMat<N>& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<CMat<N>>& samples() const { return samples_; }

  bool same_grid(const auto& other) const {
    return size() == other.size() && std::abs(t0_ - other.t0()) <= 1e-12 * std::max(1.0, std::abs(t0_)) &&
           std::abs(dt_ - other.dt()) <= 1e-12 * dt_;
  }

 private:
  double t0_;
  double dt_;
  std::vector<CMat<N>> samples_;
};

/// Second-order central differences inside, second-order one-sided at the ends.
template <std::size_t N>
Trajectory<N> finite_diff(const Trajectory<N>& traj);

template <std::size_t N>
using Generator = std::function<CMat<N>(double, const CMat<N>&)>;

template <std::size_t N>
struct Rk4Result {
  Trajectory<N> trajectory;
  std::vector<double> trace_drift;        // |Tr rho(t) - Tr rho(t0)| per sample
  std::vector<double> hermiticity_drift;  // hermiticity defect per sample
};

/// Classic fourth-order Runge-Kutta. Throws std::runtime_error if the generator
/// produces non-finite values.
template <std::size_t N>
Rk4Result<N> rk4_integrate(const Generator<N>& generator, const DensityMatrix<N>& rho0, const Grid& grid);

/// Same as above without validating the initial matrix (used for operator flows).
template <std::size_t N>
Rk4Result<N> rk4_integrate_unchecked(const Generator<N>& generator, const CMat<N>& x0, const Grid& grid);

}  // namespace qmp
