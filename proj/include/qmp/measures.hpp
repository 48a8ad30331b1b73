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

#include <vector>

#include "qmp/kernels.hpp"
#include "qmp/qcore.hpp"

namespace qmp {

/// Tr rho^2.
template <std::size_t N>
double purity(const DensityMatrix<N>& rho) {
  return trace_power(rho.mat(), 2).value;
}

/// Transpose on the named factor.
Mat4 partial_transpose(const Mat4& rho, Subsystem transposed);

struct NegativityReport {
  double negativity = 0.0;  // sum of |negative eigenvalues| of the partial transpose
  double trace_norm = 0.0;  // ||rho^T_B||_1, equals 1 + 2 * negativity
};

NegativityReport negativity_report(const DensityMatrix<4>& rho);
double negativity(const DensityMatrix<4>& rho);

struct MeasureRow {
  double t = 0.0;
  double purity_ab = 0.0;
  double purity_a = 0.0;
  double purity_b = 0.0;
  double negativity = 0.0;
};

/// Purities of the joint state and both marginals plus negativity per sample.
/// Samples are validated with `tol`; invalid samples throw std::invalid_argument.
std::vector<MeasureRow> measure_series(const Trajectory<4>& traj, double tol = kDefaultTol,
                                       Execution ex = default_execution());

}  // namespace qmp
