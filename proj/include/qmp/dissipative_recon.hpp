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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmp/bloch.hpp"
#include "qmp/kernels.hpp"
#include "qmp/qcore.hpp"
#include "qmp/unitary_recon.hpp"

namespace qmp {

// Everything below indexes the 15 traceless products G_k, k = 1..15, by k - 1.
using Real15 = std::array<double, 15>;
using RealMat15 = std::array<Real15, 15>;
using CplxMat15 = std::array<std::array<cplx, 15>, 15>;

/// dr/dt = d r + l on the coherence vector r_k = Tr(rho G_k).
struct AffineGenerator {
  RealMat15 d{};
  Real15 l{};

  bool unital(double tol = 1e-12) const;
  Real15 apply(const Real15& r) const;
};

/// Coefficients of sum_mn K_mn (G_m X G_n - {G_n G_m, X}/2) with unnormalized G_k.
struct KossakowskiMatrix {
  CplxMat15 k{};

  static KossakowskiMatrix from_diagonal(const Real15& diag);
  Real15 diagonal() const;
  double hermiticity_defect() const;
  double max_abs() const;
};

/// Skew-symmetric M with dr/dt = M r under -i[H, .]. Throws std::invalid_argument
/// for non-Hermitian H.
RealMat15 hamiltonian_action(const Mat4& h);

/// R(t) = drho/dt + i[H(t), rho(t)]. Throws std::invalid_argument on a grid mismatch.
Trajectory<4> generator_residual(const Trajectory<4>& traj, const Trajectory<4>& hseq);

/// Precomputed dissipator for one K; apply() costs two products per channel.
class Dissipator {
 public:
  explicit Dissipator(const KossakowskiMatrix& k);
  Mat4 apply(const Mat4& x) const;

 private:
  std::array<Mat4, 15> b_{};  // B_m = sum_n K_mn G_n
  Mat4 a_;                    // sum_mn K_mn G_n G_m
};

/// -i[H, rho] + D_K[rho].
Mat4 gksl_apply(const Mat4& h, const KossakowskiMatrix& k, const Mat4& rho);
Mat4 gksl_apply(const Mat4& h, const KossakowskiMatrix& k, const DensityMatrix<4>& rho);

/// Affine form of D_K. Throws std::invalid_argument for non-Hermitian K.
AffineGenerator d_from_k(const KossakowskiMatrix& k);

enum class AnsatzStructure { unital_diagonal, unital_symmetric };
enum class AnsatzFrame { lab, diagonal };

struct DissipatorAnsatz {
  AnsatzFrame frame = AnsatzFrame::diagonal;
  AnsatzStructure structure = AnsatzStructure::unital_diagonal;
  std::vector<int> indices;  // active components 1..15; empty means detect from the data
};

struct KFromD {
  KossakowskiMatrix k;
  int nullity = 0;        // dimension of the unresolved freedom inside the ansatz
  double residual = 0.0;  // max |d_from_k(k) - D| over all entries of d and l
};

/// Inverse of d_from_k on the ansatz subspace (diagonal or real symmetric K).
/// Throws std::invalid_argument when no K of that shape reproduces D within 1e-10.
KFromD k_from_d(const AffineGenerator& gen, AnsatzStructure structure = AnsatzStructure::unital_diagonal);

struct CpVerdict {
  bool valid = false;
  double min_eigenvalue = 0.0;
  Real15 eigenvalues{};  // ascending
};

/// K >= -tol in the spectral sense. Throws std::invalid_argument for non-Hermitian K.
CpVerdict cp_check(const KossakowskiMatrix& k, double tol = kPsdTol);

struct IntegratedCpReport {
  bool pass = true;
  int worst_index = 1;  // 1..15
  double worst_time = 0.0;
  double worst_value = 0.0;  // min over i, t of the running integral of K_ii
};

/// Trapezoidal running integrals of each diagonal entry on a uniform grid.
IntegratedCpReport integrated_cp_check(const std::vector<Real15>& kdiag, double t0, double dt, double tol = kPsdTol);

/// Coherence vector and its finite-difference derivative along a trajectory.
struct CoherenceSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<CoherenceArray> r;
  std::vector<CoherenceArray> rdot;
};

CoherenceSeries coherence_series(const Trajectory<4>& traj);

/// Lab-frame variant: the Hamiltonian part M(H(t)) r is removed from rdot.
CoherenceSeries dissipative_coherence_series(const Trajectory<4>& traj, const Trajectory<4>& hseq);

/// Components with |r_k| above tol at some sample, as indices 1..15.
std::vector<int> active_components(const CoherenceSeries& s, double tol = 1e-10);

struct FitOptions {
  double active_tol = 1e-10;
  double fit_tol = 1e-6;
  double cp_tol = kPsdTol;
};

struct RoundTrip {
  double max_frobenius = 0.0;
  double max_marginal_a = 0.0;
  double max_marginal_b = 0.0;
  double t_at_max = 0.0;
};

struct DissipatorCandidate {
  std::string name;
  AffineGenerator generator;
  std::vector<int> free_indices;  // entries the data leaves undetermined
  double fit_residual = 0.0;
  std::optional<KFromD> kossakowski;  // empty when no K of the ansatz shape exists
  std::string note;
  CpVerdict cp;
  std::optional<IntegratedCpReport> integrated;
  std::optional<RoundTrip> roundtrip;
};

class InconsistentFit : public std::runtime_error {
 public:
  InconsistentFit(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Constant diagonal unital D' with dr/dt = D' r on the active components.
/// Candidates: the zero completion of the undetermined entries, and every
/// single-channel K = kappa e_m consistent with the data. Throws InconsistentFit
/// when no diagonal D' reproduces the data within opt.fit_tol.
std::vector<DissipatorCandidate> fit_diagonal_unital(const CoherenceSeries& s, const DissipatorAnsatz& ansatz = {},
                                                     const FitOptions& opt = {});

/// Minimum-norm constant symmetric D' on the active block, followed by the
/// diagonal candidates (which are symmetric too).
std::vector<DissipatorCandidate> fit_symmetric_unital(const CoherenceSeries& s, const DissipatorAnsatz& ansatz = {},
                                                      const FitOptions& opt = {});

/// Dissipator of the diagonal frame carried to the lab: U D'[U^dagger rho U] U^dagger.
class LabDissipator {
 public:
  LabDissipator(const KossakowskiMatrix& k, Trajectory<4> u);
  Mat4 operator()(double t, const Mat4& rho) const;
  Mat4 unitary_at(double t) const;
  /// The same map written as a lab-frame Kossakowski matrix, O K' O^T.
  KossakowskiMatrix kossakowski_at(double t) const;

 private:
  KossakowskiMatrix k_;
  Dissipator diss_;
  Trajectory<4> u_;
};

Generator<4> master_generator(const Trajectory<4>& hseq, const LabDissipator& diss);
Generator<4> master_generator(const Mat4& h, const KossakowskiMatrix& k);

/// Integrates gen from the first sample over the trajectory grid and compares.
/// Throws std::runtime_error if the integration blows up.
RoundTrip roundtrip_verify(const Trajectory<4>& traj, const Generator<4>& gen);

struct MasterOptions {
  AnsatzStructure structure = AnsatzStructure::unital_diagonal;
  FitOptions fit;
  GaugeConfig gauge;
  bool roundtrip = true;  // integrate every CP-valid candidate
};

struct MasterReconstruction {
  Trajectory<4> u;
  HamiltonianSeries hamiltonian;
  Trajectory<4> frame;  // Gamma(t) = U^dagger rho U
  std::vector<int> active;
  std::vector<DissipatorCandidate> candidates;

  /// CP-valid candidate with the smallest round-trip deviation.
  std::optional<std::size_t> best() const;
};

MasterReconstruction reconstruct_master(const Trajectory<4>& traj, const MasterOptions& opt = {},
                                        Execution ex = default_execution());

}  // namespace qmp
