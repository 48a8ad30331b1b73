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

#include <array>

#include "qmp/qcore.hpp"

namespace qmp {

// Two-qubit Pauli products G_k = sigma_a (x) sigma_b with k = 4a + b and
// sigma_0 = I. Tr(G_j G_k) = 4 delta_jk. The traceless ones are k = 1..15.
constexpr int pauli_index(int a, int b) { return 4 * a + b; }
constexpr int pauli_first(int k) { return k / 4; }
constexpr int pauli_second(int k) { return k % 4; }

const Mat2& pauli(int a);
const std::array<Mat4, 16>& pauli_basis();

/// G_j G_k = phase * G_index.
struct PauliProduct {
  int index = 0;
  cplx phase = 1.0;
};
PauliProduct pauli_multiply(int j, int k);

/// r_k = Tr(rho G_k) for k = 1..15, stored at position k - 1.
using CoherenceArray = std::array<double, 15>;

/// x_i = Tr(rho sigma_i (x) I), y_j = Tr(rho I (x) sigma_j), z_ij = Tr(rho sigma_i (x) sigma_j).
struct CoherenceVector {
  std::array<double, 3> x{};
  std::array<double, 3> y{};
  std::array<std::array<double, 3>, 3> z{};

  CoherenceArray flat() const;
  static CoherenceVector from_flat(const CoherenceArray& r);
  friend bool operator==(const CoherenceVector&, const CoherenceVector&) = default;
};

/// Throws std::invalid_argument for non-Hermitian input.
CoherenceVector to_coherence(const Mat4& rho);
CoherenceVector to_coherence(const DensityMatrix<4>& rho);
CoherenceArray coherence_array(const Mat4& rho);

/// (1/4)(I + sum x_i s_i(x)I + sum y_j I(x)s_j + sum z_ij s_i(x)s_j). Not necessarily PSD.
Mat4 from_coherence(const CoherenceVector& v);
Mat4 from_coherence(const CoherenceArray& r);

using Real3x3 = std::array<std::array<double, 3>, 3>;

/// ztilde_ij = z_ij - x_i y_j.
struct CorrelationTensor {
  Real3x3 ztilde{};
};

CorrelationTensor correlation_tensor(const DensityMatrix<4>& rho);
CorrelationTensor correlation_tensor(const CoherenceVector& v);

/// Delta = (1/4) sum ztilde_ij s_i (x) s_j; both partial traces vanish.
Mat4 correlation_operator(const CorrelationTensor& c);

struct XForm {
  Mat4 rho_x;  // (uA (x) uB) rho (uA (x) uB)^dagger
  Mat2 ua;
  Mat2 ub;
  Real3x3 rot_a{};  // SO(3) images of ua and ub: u s_j u^dagger = sum_i O_ij s_i
  Real3x3 rot_b{};
};

/// Local unitaries that make the correlation tensor diagonal.
XForm x_form(const DensityMatrix<4>& rho);

/// SU(2) element u with u s_j u^dagger = sum_i O_ij s_i for O in SO(3).
Mat2 su2_from_rotation(const Real3x3& o);

struct BlochInvariants {
  double i1 = 0.0;  // |x|^2 + |y|^2 + sum z_ii^2
  double i2 = 0.0;  // sum x_i y_i z_ii - z_11 z_22 z_33
};

/// Requires off-diagonal |z_ij| < 1e-10 and throws std::invalid_argument otherwise.
BlochInvariants bloch_invariants(const CoherenceVector& v);

/// H = sum_ab h[a][b] G_ab with h[a][b] = Tr(H G_ab) / 4.
struct PauliDecomposition {
  std::array<std::array<double, 4>, 4> h{};

  double identity_part() const { return h[0][0]; }
  Mat4 local() const;        // exactly one index zero
  Mat4 interaction() const;  // both indices nonzero
  Mat4 reconstruct() const;
};

/// Throws std::invalid_argument for non-Hermitian input.
PauliDecomposition pauli_decompose(const Mat4& h);

}  // namespace qmp
