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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmp/kinematics.hpp"
#include "qmp/measures.hpp"

using namespace qmp;

namespace {

Mat4 bell_phi_plus() {
  Mat4 phi;
  for (int i : {0, 3})
    for (int j : {0, 3}) phi(i, j) = 0.5;
  return phi;
}

// ||A||_1 from the eigenvalues of A^2 (A Hermitian), independent of the sign split.
double trace_norm_oracle(const Mat4& a) {
  const auto ev = oracle::eigvals(a * a);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += std::sqrt(std::max(0.0, ev(i)));
  return s;
}

}  // namespace

TEST(Purity, SimpleValues) {
  oracle::Rng rng(41);
  EXPECT_NEAR(purity(DensityMatrix<4>::from(rng.pure_state<4>())), 1.0, 1e-14);
  EXPECT_NEAR(purity(DensityMatrix<2>::from(Mat2::identity() * 0.5)), 0.5, 1e-16);
  const DampedExchange ex(2.0, 0.2);
  EXPECT_NEAR(purity(DensityMatrix<2>::from(ex.marginal_a(0.0))), 1.0, 1e-16);
  EXPECT_NEAR(purity(DensityMatrix<2>::from(ex.marginal_b(0.0))), 1.0, 1e-16);
}

TEST(Purity, Bounds) {
  oracle::Rng rng(42);
  for (int n = 0; n < 100; ++n) {
    const double p = purity(DensityMatrix<4>::from(rng.state<4>()));
    EXPECT_GE(p, 0.25 - 1e-15);
    EXPECT_LE(p, 1.0 + 1e-15);
  }
}

TEST(PartialTranspose, ProductStaysProduct) {
  oracle::Rng rng(43);
  const Mat2 a = rng.state<2>(), b = rng.state<2>();
  EXPECT_LT(max_abs_diff(partial_transpose(tensor(a, b), Subsystem::B), tensor(a, b.transpose())), 1e-16);
  EXPECT_LT(max_abs_diff(partial_transpose(tensor(a, b), Subsystem::A), tensor(a.transpose(), b)), 1e-16);
  EXPECT_GE(oracle::min_eig(partial_transpose(tensor(a, b), Subsystem::B)), -1e-15);
}

TEST(PartialTranspose, BellStateSpectrum) {
  const auto ev = oracle::eigvals(partial_transpose(bell_phi_plus(), Subsystem::B));
  EXPECT_NEAR(ev(0), -0.5, 1e-15);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(ev(i), 0.5, 1e-15);
}

TEST(PartialTranspose, BothSidesIsospectralAndLinear) {
  oracle::Rng rng(44);
  for (int n = 0; n < 50; ++n) {
    const Mat4 r = rng.state<4>();
    const Mat4 pa = partial_transpose(r, Subsystem::A), pb = partial_transpose(r, Subsystem::B);
    // Transposing A then B is the full transpose.
    EXPECT_LT(max_abs_diff(partial_transpose(pa, Subsystem::B), r.transpose()), 1e-16);
    EXPECT_LT(pb.hermiticity_defect(), 1e-15);
    EXPECT_NEAR(pb.trace().real(), 1.0, 1e-14);
    const auto ea = oracle::eigvals(pa), eb = oracle::eigvals(pb);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(ea(i), eb(i), 1e-13);
  }
}

TEST(Negativity, ProductAndBell) {
  oracle::Rng rng(45);
  for (int n = 0; n < 100; ++n) {
    const auto prod = DensityMatrix<4>::from(tensor(rng.state<2>(), rng.state<2>()));
    EXPECT_LT(negativity(prod), 1e-12);
  }
  EXPECT_NEAR(negativity(DensityMatrix<4>::from(bell_phi_plus())), 0.5, 1e-15);
}

TEST(Negativity, LocalUnitaryInvariance) {
  oracle::Rng rng(46);
  for (int n = 0; n < 50; ++n) {
    const auto rho = DensityMatrix<4>::from(rng.pure_state<4>());
    const Mat4 u = tensor(rng.unitary<2>(), rng.unitary<2>());
    const auto rotated = DensityMatrix<4>::from(u * rho.mat() * u.adjoint());
    EXPECT_NEAR(negativity(rho), negativity(rotated), 1e-10);
  }
}

TEST(Negativity, TraceNormIdentity) {
  oracle::Rng rng(47);
  for (int n = 0; n < 100; ++n) {
    const Mat4 m = n % 2 ? rng.state<4>() : rng.pure_state<4>();
    const auto rep = negativity_report(DensityMatrix<4>::from(m));
    const double tn = trace_norm_oracle(partial_transpose(m, Subsystem::B));
    EXPECT_NEAR(tn, 1 + 2 * rep.negativity, 1e-10);
    EXPECT_NEAR(rep.trace_norm, tn, 1e-10);
    EXPECT_GE(rep.negativity, 0.0);
    EXPECT_LE(rep.negativity, 0.5 + 1e-12);
  }
}

TEST(Negativity, DampedExchangeSeries) {
  const DampedExchange ex(2.0, 0.2);
  EXPECT_EQ(negativity(DensityMatrix<4>::from(ex.joint(0.0))), 0.0);
  double peak = 0.0;
  for (int n = 0; n <= 2000; ++n) {
    const double t = 0.005 * n;
    const auto rho = DensityMatrix<4>::from(ex.joint(t));
    const double v = negativity(rho);
    EXPECT_NEAR(v, ex.negativity(t), 1e-13) << t;
    if (t <= 2.0) peak = std::max(peak, v);
  }
  EXPECT_GT(peak, 0.05);
}

TEST(MeasureSeries, CoherentExchangeHasConstantJointPurity) {
  const auto traj = CoherentExchange(2.0).joint_trajectory(Grid{0.0, 0.01, 314});
  const auto rows = measure_series(traj);
  ASSERT_EQ(rows.size(), traj.size());
  for (const auto& r : rows) EXPECT_NEAR(r.purity_ab, 66.0 / 256.0, 1e-14);
  EXPECT_NEAR(rows[0].purity_a, (81.0 + 49.0) / 256.0, 1e-15);
}

TEST(MeasureSeries, ProductTrajectoryHasZeroNegativity) {
  oracle::Rng rng(48);
  std::vector<Mat4> s;
  for (int i = 0; i < 20; ++i) s.push_back(tensor(rng.state<2>(), rng.state<2>()));
  for (const auto& r : measure_series(Trajectory<4>(0.0, 0.1, s))) EXPECT_LT(r.negativity, 1e-12);
}

TEST(MeasureSeries, SerialAndParallelAgree) {
  const auto traj = DampedExchange(2.0, 0.2).joint_trajectory(Grid{0.0, 0.01, 1000});
  const auto a = measure_series(traj, kDefaultTol, Execution::serial);
  const auto b = measure_series(traj, kDefaultTol, Execution::parallel);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].purity_ab, b[i].purity_ab);
    EXPECT_EQ(a[i].negativity, b[i].negativity);
  }
}

TEST(MeasureSeries, InvalidSampleThrows) {
  std::vector<Mat4> s(5, Mat4::identity() * 0.25);
  s[2] = Mat4::diagonal({1.5, -0.5, 0, 0});
  EXPECT_THROW(measure_series(Trajectory<4>(0.0, 0.1, s)), std::invalid_argument);
}
