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

#include "qmp/measures.hpp"

namespace qmp {

Mat4 partial_transpose(const Mat4& rho, Subsystem transposed) {
  Mat4 out;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t l = 0; l < 2; ++l) {
          if (transposed == Subsystem::B)
            out(2 * i + k, 2 * j + l) = rho(2 * i + l, 2 * j + k);
          else
            out(2 * i + k, 2 * j + l) = rho(2 * j + k, 2 * i + l);
        }
  return out;
}

NegativityReport negativity_report(const DensityMatrix<4>& rho) {
  const auto ev = eigenvalues(partial_transpose(rho.mat(), Subsystem::B));
  NegativityReport r;
  for (double v : ev) {
    if (v < 0.0) r.negativity -= v;
    r.trace_norm += std::abs(v);
  }
  return r;
}

double negativity(const DensityMatrix<4>& rho) { return negativity_report(rho).negativity; }

std::vector<MeasureRow> measure_series(const Trajectory<4>& traj, double tol, Execution ex) {
  return map_indices<MeasureRow>(traj.size(), ex, [&](std::size_t i) {
    const auto rho = DensityMatrix<4>::from(traj[i], tol);
    MeasureRow row;
    row.t = traj.time(i);
    row.purity_ab = purity(rho);
    row.purity_a = trace_power(partial_trace(rho.mat(), Subsystem::B), 2).value;
    row.purity_b = trace_power(partial_trace(rho.mat(), Subsystem::A), 2).value;
    row.negativity = negativity(rho);
    return row;
  });
}

}  // namespace qmp
