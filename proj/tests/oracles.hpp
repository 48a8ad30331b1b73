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

// Independent reference computations for the tests. Everything here is built
// from Eigen or from closed forms, never from the library routines under test.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qmp/qcore.hpp"

namespace oracle {

using qmp::cplx;
using qmp::Mat2;
using qmp::Mat4;
using EMat = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;

template <std::size_t N>
EMat to_eigen(const qmp::CMat<N>& m) {
  EMat e(N, N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) e(i, j) = m(i, j);
  return e;
}

template <std::size_t N>
qmp::CMat<N> from_eigen(const EMat& e) {
  qmp::CMat<N> m;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) m(i, j) = e(i, j);
  return m;
}

template <std::size_t N>
Eigen::VectorXd eigvals(const qmp::CMat<N>& m) {
  Eigen::SelfAdjointEigenSolver<EMat> es(to_eigen(m));
  return es.eigenvalues();
}

template <std::size_t N>
double min_eig(const qmp::CMat<N>& m) {
  return eigvals(m).minCoeff();
}

// exp(-i h t) through Eigen's Hermitian eigensolver.
template <std::size_t N>
qmp::CMat<N> expm_hermitian(const qmp::CMat<N>& h, double t) {
  Eigen::SelfAdjointEigenSolver<EMat> es(to_eigen(h));
  Eigen::VectorXcd ph(N);
  for (std::size_t k = 0; k < N; ++k) ph(k) = std::exp(cplx(0, -1) * es.eigenvalues()(k) * t);
  EMat u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  return from_eigen<N>(u);
}

class Rng {
 public:
  explicit Rng(unsigned long long seed) : gen_(seed) {}

  double normal() { return nd_(gen_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }

  template <std::size_t N>
  qmp::CMat<N> ginibre() {
    qmp::CMat<N> m;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) m(i, j) = cplx(normal(), normal());
    return m;
  }

  template <std::size_t N>
  qmp::CMat<N> hermitian(double scale = 1.0) {
    auto g = ginibre<N>();
    return (g + g.adjoint()) * (0.5 * scale);
  }

  template <std::size_t N>
  qmp::CMat<N> unitary() {
    Eigen::HouseholderQR<EMat> qr(to_eigen(ginibre<N>()));
    EMat q = qr.householderQ();
    return from_eigen<N>(q);
  }

  // Full-rank random density matrix (Hilbert-Schmidt measure).
  template <std::size_t N>
  qmp::CMat<N> state() {
    auto g = ginibre<N>();
    auto r = g * g.adjoint();
    return r / r.trace();
  }

  template <std::size_t N>
  qmp::CMat<N> pure_state() {
    std::array<cplx, N> v;
    double nrm = 0.0;
    for (auto& x : v) {
      x = cplx(normal(), normal());
      nrm += std::norm(x);
    }
    qmp::CMat<N> r;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) r(i, j) = v[i] * std::conj(v[j]) / nrm;
    return r;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> nd_{0.0, 1.0};
};

inline Mat2 pauli(int a) {
  switch (a) {
    case 0: return Mat2{{1, 0}, {0, 1}};
    case 1: return Mat2{{0, 1}, {1, 0}};
    case 2: return Mat2{{0, cplx(0, -1)}, {cplx(0, 1), 0}};
    default: return Mat2{{1, 0}, {0, -1}};
  }
}

// Kronecker product written directly from the index formula.
inline Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out(r, c) = a(r / 2, c / 2) * b(r % 2, c % 2);
  return out;
}

inline Mat4 pauli_product(int a, int b) { return kron(pauli(a), pauli(b)); }

// Computational-basis projector |i><j| on two qubits.
inline Mat4 unit(int i, int j) {
  Mat4 m;
  m(i, j) = 1.0;
  return m;
}

// Two-qubit state with populations (1/4, (4+cos)/16, (4-cos)/16, 1/4) and the
// coherence -i sin(Jt)/16 between |01> and |10>.
inline Mat4 example1_rho(double J, double t) {
  const double c = std::cos(J * t), s = std::sin(J * t);
  Mat4 r;
  r(0, 0) = 0.25;
  r(1, 1) = (4.0 + c) / 16.0;
  r(2, 2) = (4.0 - c) / 16.0;
  r(3, 3) = 0.25;
  r(1, 2) = cplx(0, -s / 16.0);
  r(2, 1) = cplx(0, s / 16.0);
  return r;
}

// (beta_+/2)|psi><psi| + (beta_-/2)|10><10| with psi = (cos th, 0, 0, i sin th),
// th = 3Jt/4, beta_pm = 1 +- exp(-gamma t).
inline Mat4 example3_rho(double J, double gamma, double t) {
  const double e = std::exp(-gamma * t);
  const double bp = 1.0 + e, bm = 1.0 - e;
  const double th = 0.75 * J * t;
  const std::array<cplx, 4> psi{std::cos(th), 0.0, 0.0, cplx(0, std::sin(th))};
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r(i, j) = 0.5 * bp * psi[i] * std::conj(psi[j]);
  r(2, 2) += 0.5 * bm;
  return r;
}

inline Mat2 example2_first(double omega, double t) {
  const double c = std::cos(2 * omega * t);
  return Mat2{{0.5, 0.5 * c}, {0.5 * c, 0.5}};
}

inline Mat2 example2_second(double omega, double t) {
  const double s = std::sin(2 * omega * t);
  return Mat2{{0.5, 0.5 * s}, {0.5 * s, 0.5}};
}

// 16x16 superoperator of X -> A X B acting on row-major vec(X).
inline EMat sandwich(const Mat4& a, const Mat4& b) {
  EMat s = EMat::Zero(16, 16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) s(4 * i + j, 4 * k + l) = a(i, k) * b(l, j);
  return s;
}

// Brute-force D_jk = Tr(G_j D_K[G_k]) / 4 and l_j = Tr(G_j D_K[I]) / 4 using the
// dissipator D_K[X] = sum K_mn (G_m X G_n - 1/2 {G_n G_m, X}) built as a 16x16
// superoperator.
struct AffineOracle {
  Eigen::MatrixXd d;
  Eigen::VectorXd l;
};

inline AffineOracle affine_from_kossakowski(const EMat& k) {
  std::array<Mat4, 16> g;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) g[4 * a + b] = pauli_product(a, b);
  const Mat4 id = Mat4::identity();
  EMat super = EMat::Zero(16, 16);
  for (int m = 1; m < 16; ++m) {
    for (int n = 1; n < 16; ++n) {
      const cplx kmn = k(m - 1, n - 1);
      if (kmn == cplx{}) continue;
      const Mat4 nm = g[n] * g[m];
      super += kmn * (sandwich(g[m], g[n]) - 0.5 * sandwich(nm, id) - 0.5 * sandwich(id, nm));
    }
  }
  auto apply = [&](const Mat4& x) {
    Eigen::VectorXcd v(16);
    for (int i = 0; i < 16; ++i) v(i) = x(i / 4, i % 4);
    Eigen::VectorXcd w = super * v;
    Mat4 y;
    for (int i = 0; i < 16; ++i) y(i / 4, i % 4) = w(i);
    return y;
  };
  AffineOracle out{Eigen::MatrixXd::Zero(15, 15), Eigen::VectorXd::Zero(15)};
  for (int kk = 1; kk < 16; ++kk) {
    const Mat4 img = apply(g[kk]);
    for (int j = 1; j < 16; ++j) out.d(j - 1, kk - 1) = ((g[j] * img).trace() / 4.0).real();
  }
  const Mat4 img = apply(id);
  for (int j = 1; j < 16; ++j) out.l(j - 1) = ((g[j] * img).trace() / 4.0).real();
  return out;
}

}  // namespace oracle
