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
#include <string>
#include <vector>

#include "qmp/bloch.hpp"
#include "qmp/kernels.hpp"
#include "qmp/qcore.hpp"

namespace qmp {

/// Two single-qubit trajectories on the same grid, every sample a valid state.
class MarginalPair {
 public:
  MarginalPair(Trajectory<2> a, Trajectory<2> b, double tol = kDefaultTol);

  const Trajectory<2>& a() const { return a_; }
  const Trajectory<2>& b() const { return b_; }

 private:
  Trajectory<2> a_;
  Trajectory<2> b_;
};

/// Marginals of a joint trajectory: a = Tr_B rho, b = Tr_A rho.
MarginalPair marginals_of(const Trajectory<4>& joint, double tol = kDefaultTol, Execution ex = default_execution());

struct AssembleResult {
  std::optional<DensityMatrix<4>> state;
  Mat4 candidate;  // rho_A (x) rho_B + Delta, whether or not it is PSD
  double min_eigenvalue = 0.0;
};

/// rho_A (x) rho_B + Delta_corr, accepted only if it factorizes as L L^dagger.
AssembleResult assemble_joint(const DensityMatrix<2>& a, const DensityMatrix<2>& b, const CorrelationTensor& delta);

struct UnitarityReport {
  bool unitary = false;
  std::array<double, 3> drift{};  // max_t |Tr rho^k(t) - Tr rho^k(t0)| for k = 2, 3, 4
  double tol = 0.0;
};

/// Passes iff the k = 2 and k = 3 drifts are both below tol.
UnitarityReport unitarity_test(const Trajectory<4>& traj, double tol = kDefaultTol,
                               Execution ex = default_execution());

struct IsospectralReport {
  bool isospectral = false;
  double max_distance = 0.0;  // max_t |lambda_min(rho_A) - lambda_min(rho_B)|
  double t_at_max = 0.0;
  double tol = 0.0;
};

IsospectralReport isospectral_test(const MarginalPair& m, double tol = kDefaultTol,
                                   Execution ex = default_execution());

struct WindowReport {
  double c_lo = 0.0;  // max_t |a1 b1 - a2 b2|
  double c_hi = 0.0;  // min_t [1 - |a1 b2 - a2 b1|]
  double t_lo = 0.0;  // where the two extrema sit
  double t_hi = 0.0;
  bool exists = false;
  Mat2 basis_a;  // columns e1, e2 used to label the populations
  Mat2 basis_b;
  std::vector<std::array<double, 2>> alpha;
  std::vector<std::array<double, 2>> beta;

  std::optional<std::array<double, 2>> interval() const {
    if (!exists) return std::nullopt;
    return std::array<double, 2>{c_lo, c_hi};
  }
};

/// Range of c = rho_11 + rho_44 for which a unitarily evolving two-coherence
/// joint state can exist. Both marginals must stay diagonal in one fixed
/// basis each; otherwise std::invalid_argument is thrown.
WindowReport unitary_window(const MarginalPair& m, double diag_tol = 1e-9);

/// c = rho_11 + rho_44, d1 = rho_11 rho_44 - |rho_14|^2, d2 = rho_22 rho_33 - |rho_23|^2
/// in the basis the joint matrix is written in.
struct TwoCoherenceConstants {
  std::vector<double> c;
  std::vector<double> d1;
  std::vector<double> d2;
};

TwoCoherenceConstants two_coherence_constants(const Trajectory<4>& traj);

struct CompatibilityReport {
  std::optional<UnitarityReport> unitarity;
  IsospectralReport isospectral;
  std::optional<WindowReport> window;
  std::string window_error;  // set when the window could not be evaluated
  std::optional<TwoCoherenceConstants> constants;
};

CompatibilityReport check_marginals(const MarginalPair& m, double tol = kDefaultTol);
CompatibilityReport check_joint(const Trajectory<4>& joint, double tol = kDefaultTol);

/// Joint state with populations (1/4, (4+cos Jt)/16, (4-cos Jt)/16, 1/4) and
/// coherence -i sin(Jt)/16 between |01> and |10>. Driven by
/// H = -(J/4)(s1 (x) s1 + s2 (x) s2).
class CoherentExchange {
 public:
  explicit CoherentExchange(double J);
  double J() const { return j_; }
  Mat4 joint(double t) const;
  Mat2 marginal_a(double t) const;
  Mat2 marginal_b(double t) const;
  Mat4 hamiltonian() const;
  Trajectory<4> joint_trajectory(const Grid& g, Execution ex = default_execution()) const;
  MarginalPair marginals(const Grid& g, Execution ex = default_execution()) const;

 private:
  double j_;
};

/// Marginals (1/2)[[1, cos 2wt], [cos 2wt, 1]] and (1/2)[[1, sin 2wt], [sin 2wt, 1]].
/// No unitarily evolving joint trajectory reproduces them.
class CrossedCoherences {
 public:
  explicit CrossedCoherences(double omega);
  double omega() const { return w_; }
  Mat2 marginal_a(double t) const;
  Mat2 marginal_b(double t) const;
  MarginalPair marginals(const Grid& g, Execution ex = default_execution()) const;

 private:
  double w_;
};

/// rho(t) = (b+/2)|psi><psi| + (b-/2)|10><10| with psi = (cos th, 0, 0, i sin th),
/// th = 3Jt/4 and b+- = 1 +- exp(-gamma t). Starts in |00>.
class DampedExchange {
 public:
  DampedExchange(double J, double gamma);
  double J() const { return j_; }
  double gamma() const { return gamma_; }
  Mat4 joint(double t) const;
  Mat2 marginal_a(double t) const;
  Mat2 marginal_b(double t) const;
  /// Generator of the coherent part, -(3J/8)(s1 (x) s1 - s2 (x) s2).
  Mat4 hamiltonian() const;
  /// Closed-form negativity (1/4)(sqrt(b-^2 + b+^2 sin^2(3Jt/2)) - b-).
  double negativity(double t) const;
  Trajectory<4> joint_trajectory(const Grid& g, Execution ex = default_execution()) const;
  MarginalPair marginals(const Grid& g, Execution ex = default_execution()) const;

 private:
  double j_;
  double gamma_;
};

}  // namespace qmp
