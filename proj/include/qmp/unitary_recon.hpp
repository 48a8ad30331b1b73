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
#include <stdexcept>
#include <string>
#include <vector>

#include "qmp/bloch.hpp"
#include "qmp/kernels.hpp"
#include "qmp/qcore.hpp"

namespace qmp {

struct OrbitSpec {
  std::array<double, 4> gamma{};            // eigenvalues, descending
  std::vector<std::vector<int>> partition;  // groups of equal eigenvalues (indices into gamma)
  int orbit_dimension = 0;                  // real dimension of the unitary orbit, 16 - sum m_i^2
};

OrbitSpec orbit_rep(const DensityMatrix<4>& rho, double degeneracy_tol = 1e-9);

/// z = u * diag(a) * r with u unitary, a positive, r unit upper triangular.
template <std::size_t N>
struct Iwasawa {
  CMat<N> u;
  std::array<double, N> a{};
  CMat<N> r;
};

/// Requires det z = 1 within 1e-10. Throws std::invalid_argument for singular
/// input or a determinant away from one.
template <std::size_t N>
Iwasawa<N> iwasawa_decompose(const CMat<N>& z);

struct GaugeConfig {
  double cluster_tol = 1e-9;    // eigenvalues closer than this share a degenerate block
  double spectrum_tol = 1e-8;   // allowed spectrum drift for a unitary trajectory
};

/// Eigenvectors of every sample arranged so that neighbouring frames are as
/// close as possible: columns are matched by overlap, nondegenerate columns
/// get a real-positive overlap with their predecessor and degenerate blocks
/// are aligned by orthogonal Procrustes. A block that is degenerate from the
/// first sample on is rotated, over its whole degenerate stretch, onto the
/// eigenvectors it splits into.
struct EigenframeTrack {
  std::vector<Mat4> frames;                      // rho(t) = V diag(values) V^dagger
  std::vector<std::array<double, 4>> values;     // eigenvalue per column, per sample
};

EigenframeTrack track_eigenframes(const Trajectory<4>& traj, const GaugeConfig& cfg = {},
                                  Execution ex = default_execution());

class NonUnitaryTrajectory : public std::runtime_error {
 public:
  NonUnitaryTrajectory(const std::string& what, double drift) : std::runtime_error(what), drift_(drift) {}
  double drift() const { return drift_; }

 private:
  double drift_;
};

struct EvolutionSequence {
  Trajectory<4> u;                  // U(t0) = I
  std::vector<double> residual;     // ||U rho(t0) U^dagger - rho(t)||_F
  std::vector<double> unitarity;    // ||U^dagger U - I||_F
  OrbitSpec orbit;
  double spectrum_drift = 0.0;

  double max_residual() const;
  double max_unitarity_defect() const;
};

/// U(t) with U(t) rho(t0) U(t)^dagger = rho(t). Throws NonUnitaryTrajectory when
/// the spectrum moves by more than cfg.spectrum_tol.
EvolutionSequence reconstruct_evolution(const Trajectory<4>& traj, const GaugeConfig& cfg = {},
                                        Execution ex = default_execution());

/// U(t) = V(t) V(t0)^dagger from a frame track (no spectrum check).
Trajectory<4> evolution_from_frames(const EigenframeTrack& track, double t0, double dt);

struct HamiltonianSeries {
  Trajectory<4> h;                          // Hermitian, traceless
  std::vector<double> anti_hermitian_defect; // ||H - H^dagger||_F / 2 before symmetrization
  std::vector<double> trace_removed;         // Tr(H) / 4 subtracted at each sample

  double max_anti_hermitian_defect() const;
  std::vector<PauliDecomposition> pauli() const;
};

/// H(t) = i (dU/dt) U^dagger with second-order finite differences.
HamiltonianSeries hamiltonian_from_evolution(const Trajectory<4>& u);

/// Piecewise-linear interpolation of a sampled operator family; clamps outside the grid.
Mat4 interpolate(const Trajectory<4>& traj, double t);

}  // namespace qmp
