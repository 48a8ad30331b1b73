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

#include "qmp/bloch.hpp"

namespace qmp {

namespace {

constexpr double kDiagonalZTol = 1e-10;

std::array<Mat2, 4> make_paulis() {
  return {Mat2{{1, 0}, {0, 1}}, Mat2{{0, 1}, {1, 0}}, Mat2{{0, -kI}, {kI, 0}}, Mat2{{1, 0}, {0, -1}}};
}

// sigma_a sigma_b = phase * sigma_c
PauliProduct single_multiply(int a, int b) {
  if (a == 0) return {b, 1.0};
  if (b == 0) return {a, 1.0};
  if (a == b) return {0, 1.0};
  const int c = 6 - a - b;
  const bool cyclic = (a % 3) + 1 == b;  // (1,2), (2,3), (3,1)
  return {c, cyclic ? kI : -kI};
}

void require_hermitian(const Mat4& m, const char* who) {
  if (m.hermiticity_defect() > kHermitianTol * std::max(1.0, m.frobenius_norm()))
    throw std::invalid_argument(std::string(who) + ": input is not Hermitian");
}

Real3x3 transpose3(const Real3x3& m) {
  Real3x3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = m[j][i];
  return t;
}

struct Svd3 {
  Real3x3 u{}, s{}, v{};  // m = u s v^T, u and v proper rotations, s diagonal (signed)
};

// Two-sided Jacobi. Every step is a plane rotation, so u and v stay in SO(3);
// singular values keep whatever sign falls out and are not reordered.
Svd3 jacobi_svd3(const Real3x3& m0) {
  Svd3 r;
  r.s = m0;
  for (int i = 0; i < 3; ++i) r.u[i][i] = r.v[i][i] = 1.0;
  auto& m = r.s;
  double scale = 0.0;
  for (const auto& row : m)
    for (double x : row) scale = std::max(scale, std::abs(x));
  const double tol = 1e-15 * std::max(1.0, scale);

  constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) off = std::max(off, std::abs(m[i][j]));
    if (off <= tol) break;

    for (const auto& pq : kPairs) {
      const int p = pq[0], q = pq[1];
      if (std::abs(m[p][q]) <= tol && std::abs(m[q][p]) <= tol) continue;

      // Left rotation that symmetrizes the 2x2 block.
      const double alpha = std::atan2(m[q][p] - m[p][q], m[p][p] + m[q][q]);
      const double ca = std::cos(alpha), sa = std::sin(alpha);
      for (int k = 0; k < 3; ++k) {
        const double mp = m[p][k], mq = m[q][k];
        m[p][k] = ca * mp + sa * mq;
        m[q][k] = -sa * mp + ca * mq;
        const double up = r.u[k][p], uq = r.u[k][q];
        r.u[k][p] = ca * up + sa * uq;
        r.u[k][q] = -sa * up + ca * uq;
      }

      // Symmetric Jacobi rotation on both sides.
      const double b = 0.5 * (m[p][q] + m[q][p]);
      if (std::abs(b) <= tol) {
        m[p][q] = m[q][p] = 0.0;
        continue;
      }
      const double theta = (m[q][q] - m[p][p]) / (2.0 * b);
      const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      const double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
      for (int k = 0; k < 3; ++k) {
        const double mp = m[k][p], mq = m[k][q];
        m[k][p] = c * mp - s * mq;
        m[k][q] = s * mp + c * mq;
      }
      for (int k = 0; k < 3; ++k) {
        const double mp = m[p][k], mq = m[q][k];
        m[p][k] = c * mp - s * mq;
        m[q][k] = s * mp + c * mq;
      }
      for (int k = 0; k < 3; ++k) {
        const double up = r.u[k][p], uq = r.u[k][q];
        r.u[k][p] = c * up - s * uq;
        r.u[k][q] = s * up + c * uq;
        const double vp = r.v[k][p], vq = r.v[k][q];
        r.v[k][p] = c * vp - s * vq;
        r.v[k][q] = s * vp + c * vq;
      }
      m[p][q] = m[q][p] = 0.0;
    }
  }
  return r;
}

}  // namespace

const Mat2& pauli(int a) {
  static const std::array<Mat2, 4> s = make_paulis();
  return s.at(static_cast<std::size_t>(a));
}

const std::array<Mat4, 16>& pauli_basis() {
  static const std::array<Mat4, 16> g = [] {
    std::array<Mat4, 16> out;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) out[pauli_index(a, b)] = tensor(pauli(a), pauli(b));
    return out;
  }();
  return g;
}

PauliProduct pauli_multiply(int j, int k) {
  const auto first = single_multiply(pauli_first(j), pauli_first(k));
  const auto second = single_multiply(pauli_second(j), pauli_second(k));
  return {pauli_index(first.index, second.index), first.phase * second.phase};
}

CoherenceArray CoherenceVector::flat() const {
  CoherenceArray r{};
  for (int i = 0; i < 3; ++i) {
    r[pauli_index(i + 1, 0) - 1] = x[i];
    r[pauli_index(0, i + 1) - 1] = y[i];
    for (int j = 0; j < 3; ++j) r[pauli_index(i + 1, j + 1) - 1] = z[i][j];
  }
  return r;
}

CoherenceVector CoherenceVector::from_flat(const CoherenceArray& r) {
  CoherenceVector v;
  for (int i = 0; i < 3; ++i) {
    v.x[i] = r[pauli_index(i + 1, 0) - 1];
    v.y[i] = r[pauli_index(0, i + 1) - 1];
    for (int j = 0; j < 3; ++j) v.z[i][j] = r[pauli_index(i + 1, j + 1) - 1];
  }
  return v;
}

CoherenceArray coherence_array(const Mat4& rho) {
  require_hermitian(rho, "to_coherence");
  const auto& g = pauli_basis();
  CoherenceArray r{};
  for (int k = 1; k < 16; ++k) {
    // Tr(rho G) without forming the product.
    cplx t{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) t += rho(i, j) * g[k](j, i);
    r[k - 1] = t.real();
  }
  return r;
}

CoherenceVector to_coherence(const Mat4& rho) { return CoherenceVector::from_flat(coherence_array(rho)); }

CoherenceVector to_coherence(const DensityMatrix<4>& rho) { return to_coherence(rho.mat()); }

Mat4 from_coherence(const CoherenceArray& r) {
  const auto& g = pauli_basis();
  Mat4 m = g[0];
  for (int k = 1; k < 16; ++k) m += g[k] * r[k - 1];
  return m * 0.25;
}

Mat4 from_coherence(const CoherenceVector& v) { return from_coherence(v.flat()); }

CorrelationTensor correlation_tensor(const CoherenceVector& v) {
  CorrelationTensor c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c.ztilde[i][j] = v.z[i][j] - v.x[i] * v.y[j];
  return c;
}

CorrelationTensor correlation_tensor(const DensityMatrix<4>& rho) { return correlation_tensor(to_coherence(rho)); }

Mat4 correlation_operator(const CorrelationTensor& c) {
  const auto& g = pauli_basis();
  Mat4 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m += g[pauli_index(i + 1, j + 1)] * c.ztilde[i][j];
  return m * 0.25;
}

Mat2 su2_from_rotation(const Real3x3& r) {
  double w, x, y, z;
  const double tr = r[0][0] + r[1][1] + r[2][2];
  if (tr > 0.0) {
    const double s = 2.0 * std::sqrt(tr + 1.0);
    w = 0.25 * s;
    x = (r[2][1] - r[1][2]) / s;
    y = (r[0][2] - r[2][0]) / s;
    z = (r[1][0] - r[0][1]) / s;
  } else if (r[0][0] >= r[1][1] && r[0][0] >= r[2][2]) {
    const double s = 2.0 * std::sqrt(1.0 + r[0][0] - r[1][1] - r[2][2]);
    w = (r[2][1] - r[1][2]) / s;
    x = 0.25 * s;
    y = (r[0][1] + r[1][0]) / s;
    z = (r[0][2] + r[2][0]) / s;
  } else if (r[1][1] >= r[2][2]) {
    const double s = 2.0 * std::sqrt(1.0 + r[1][1] - r[0][0] - r[2][2]);
    w = (r[0][2] - r[2][0]) / s;
    x = (r[0][1] + r[1][0]) / s;
    y = 0.25 * s;
    z = (r[1][2] + r[2][1]) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r[2][2] - r[0][0] - r[1][1]);
    w = (r[1][0] - r[0][1]) / s;
    x = (r[0][2] + r[2][0]) / s;
    y = (r[1][2] + r[2][1]) / s;
    z = 0.25 * s;
  }
  // u = w I - i (x s1 + y s2 + z s3)
  return Mat2{{cplx(w, -z), cplx(-y, -x)}, {cplx(y, -x), cplx(w, z)}};
}

XForm x_form(const DensityMatrix<4>& rho) {
  const CoherenceVector v = to_coherence(rho);
  const auto svd = jacobi_svd3(correlation_tensor(v).ztilde);
  XForm out;
  out.rot_a = transpose3(svd.u);
  out.rot_b = transpose3(svd.v);
  out.ua = su2_from_rotation(out.rot_a);
  out.ub = su2_from_rotation(out.rot_b);
  const Mat4 u = tensor(out.ua, out.ub);
  out.rho_x = u * rho.mat() * u.adjoint();
  return out;
}

BlochInvariants bloch_invariants(const CoherenceVector& v) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j && std::abs(v.z[i][j]) >= kDiagonalZTol)
        throw std::invalid_argument("bloch_invariants: correlation block z is not diagonal (|z_" +
                                    std::to_string(i + 1) + std::to_string(j + 1) + "| = " +
                                    std::to_string(std::abs(v.z[i][j])) + "); bring the state to X form first");
  BlochInvariants b;
  for (int i = 0; i < 3; ++i) {
    b.i1 += v.x[i] * v.x[i] + v.y[i] * v.y[i] + v.z[i][i] * v.z[i][i];
    b.i2 += v.x[i] * v.y[i] * v.z[i][i];
  }
  b.i2 -= v.z[0][0] * v.z[1][1] * v.z[2][2];
  return b;
}

PauliDecomposition pauli_decompose(const Mat4& h) {
  require_hermitian(h, "pauli_decompose");
  const auto& g = pauli_basis();
  PauliDecomposition d;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) d.h[a][b] = ((h * g[pauli_index(a, b)]).trace() * 0.25).real();
  return d;
}

Mat4 PauliDecomposition::local() const {
  const auto& g = pauli_basis();
  Mat4 m;
  for (int k = 1; k < 4; ++k) m += g[pauli_index(k, 0)] * h[k][0] + g[pauli_index(0, k)] * h[0][k];
  return m;
}

Mat4 PauliDecomposition::interaction() const {
  const auto& g = pauli_basis();
  Mat4 m;
  for (int a = 1; a < 4; ++a)
    for (int b = 1; b < 4; ++b) m += g[pauli_index(a, b)] * h[a][b];
  return m;
}

Mat4 PauliDecomposition::reconstruct() const { return Mat4::identity() * h[0][0] + local() + interaction(); }

}  // namespace qmp
