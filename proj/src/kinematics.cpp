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

#include "qmp/kinematics.hpp"

#include <algorithm>

namespace qmp {

namespace {

constexpr double kWindowSlack = 1e-12;
constexpr double kGapTol = 1e-8;

void require_valid_pair_sample(const Mat2& m, double tol, const char* which, std::size_t i) {
  if (!validate_state(m, tol).valid)
    throw std::invalid_argument(std::string("marginal ") + which + " sample " + std::to_string(i) +
                                " is not a density matrix");
}

struct Extremum {
  double value = 0.0;
  double t = 0.0;
};

// Largest value of a sampled function, refined by the vertex of the parabola
// through the maximum and its neighbours.
Extremum refined_max(const std::vector<double>& f, double t0, double dt) {
  const auto it = std::max_element(f.begin(), f.end());
  const auto i = static_cast<std::size_t>(it - f.begin());
  Extremum e{*it, t0 + static_cast<double>(i) * dt};
  if (i == 0 || i + 1 == f.size()) return e;
  const double a = f[i - 1], b = f[i], c = f[i + 1];
  const double den = a - 2.0 * b + c;
  if (den >= 0.0) return e;
  const double x = (a - c) / (2.0 * den);
  if (std::abs(x) > 1.0) return e;
  const double peak = b - (c - a) * (c - a) / (8.0 * den);
  if (peak > e.value) {
    e.value = peak;
    e.t += x * dt;
  }
  return e;
}

// Eigenbasis that is fixed along the trajectory. Taken from the first sample
// with a nondegenerate spectrum; the computational basis is kept in its
// natural order when the eigenvectors coincide with it.
Mat2 fixed_basis(const Trajectory<2>& traj) {
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto es = spectrum(traj[i]);
    if (es.values[1] - es.values[0] <= kGapTol) continue;
    const Mat2& v = es.vectors;
    if (std::abs(std::abs(v(0, 0)) - 1.0) < 1e-9 || std::abs(std::abs(v(1, 0)) - 1.0) < 1e-9)
      return Mat2::identity();
    return v;
  }
  return Mat2::identity();
}

std::vector<std::array<double, 2>> populations(const Trajectory<2>& traj, const Mat2& basis, double diag_tol,
                                               const char* which) {
  std::vector<std::array<double, 2>> out(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Mat2 r = basis.adjoint() * traj[i] * basis;
    if (std::abs(r(0, 1)) > diag_tol)
      throw std::invalid_argument(std::string("unitary_window: marginal ") + which +
                                  " is not diagonal in a fixed basis (off-diagonal " +
                                  std::to_string(std::abs(r(0, 1))) + " at t=" + std::to_string(traj.time(i)) +
                                  ")");
    out[i] = {r(0, 0).real(), r(1, 1).real()};
  }
  return out;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be > 0");
}

template <std::size_t N, class F>
Trajectory<N> sample(const Grid& g, Execution ex, F&& f) {
  return Trajectory<N>(g.t0, g.dt, map_indices<CMat<N>>(g.samples(), ex, [&](std::size_t i) { return f(g.time(i)); }));
}

}  // namespace

MarginalPair::MarginalPair(Trajectory<2> a, Trajectory<2> b, double tol) : a_(std::move(a)), b_(std::move(b)) {
  if (!a_.same_grid(b_)) throw std::invalid_argument("MarginalPair: the two marginals use different grids");
  for (std::size_t i = 0; i < a_.size(); ++i) {
    require_valid_pair_sample(a_[i], tol, "A", i);
    require_valid_pair_sample(b_[i], tol, "B", i);
  }
}

MarginalPair marginals_of(const Trajectory<4>& joint, double tol, Execution ex) {
  auto a = map_indices<Mat2>(joint.size(), ex, [&](std::size_t i) { return partial_trace(joint[i], Subsystem::B); });
  auto b = map_indices<Mat2>(joint.size(), ex, [&](std::size_t i) { return partial_trace(joint[i], Subsystem::A); });
  return MarginalPair(Trajectory<2>(joint.t0(), joint.dt(), std::move(a)),
                      Trajectory<2>(joint.t0(), joint.dt(), std::move(b)), tol);
}

AssembleResult assemble_joint(const DensityMatrix<2>& a, const DensityMatrix<2>& b, const CorrelationTensor& delta) {
  AssembleResult r;
  r.candidate = tensor(a.mat(), b.mat()) + correlation_operator(delta);
  r.min_eigenvalue = eigenvalues(r.candidate)[0];
  if (cholesky_psd(r.candidate)) r.state = DensityMatrix<4>::try_from(r.candidate, std::max(a.tol(), b.tol()));
  return r;
}

UnitarityReport unitarity_test(const Trajectory<4>& traj, double tol, Execution ex) {
  const auto powers = map_indices<std::array<double, 3>>(traj.size(), ex, [&](std::size_t i) {
    return std::array<double, 3>{trace_power(traj[i], 2).value, trace_power(traj[i], 3).value,
                                 trace_power(traj[i], 4).value};
  });
  UnitarityReport r;
  r.tol = tol;
  for (const auto& p : powers)
    for (int k = 0; k < 3; ++k) r.drift[k] = std::max(r.drift[k], std::abs(p[k] - powers[0][k]));
  r.unitary = r.drift[0] < tol && r.drift[1] < tol;
  return r;
}

IsospectralReport isospectral_test(const MarginalPair& m, double tol, Execution ex) {
  const auto dist = map_indices<double>(m.a().size(), ex, [&](std::size_t i) {
    return std::abs(eigenvalues(m.a()[i])[0] - eigenvalues(m.b()[i])[0]);
  });
  IsospectralReport r;
  r.tol = tol;
  const auto it = std::max_element(dist.begin(), dist.end());
  r.max_distance = *it;
  r.t_at_max = m.a().time(static_cast<std::size_t>(it - dist.begin()));
  r.isospectral = r.max_distance < tol;
  return r;
}

WindowReport unitary_window(const MarginalPair& m, double diag_tol) {
  WindowReport r;
  r.basis_a = fixed_basis(m.a());
  r.basis_b = fixed_basis(m.b());
  r.alpha = populations(m.a(), r.basis_a, diag_tol, "A");
  r.beta = populations(m.b(), r.basis_b, diag_tol, "B");

  const std::size_t n = r.alpha.size();
  std::vector<double> same(n), cross(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& al = r.alpha[i];
    const auto& be = r.beta[i];
    same[i] = std::abs(al[0] * be[0] - al[1] * be[1]);
    cross[i] = std::abs(al[0] * be[1] - al[1] * be[0]);
  }
  const auto lo = refined_max(same, m.a().t0(), m.a().dt());
  const auto hi = refined_max(cross, m.a().t0(), m.a().dt());
  r.c_lo = lo.value;
  r.t_lo = lo.t;
  r.c_hi = 1.0 - hi.value;
  r.t_hi = hi.t;
  r.exists = r.c_lo <= r.c_hi + kWindowSlack;
  return r;
}

TwoCoherenceConstants two_coherence_constants(const Trajectory<4>& traj) {
  TwoCoherenceConstants k;
  for (const auto& r : traj.samples()) {
    const double p11 = r(0, 0).real(), p22 = r(1, 1).real(), p33 = r(2, 2).real(), p44 = r(3, 3).real();
    k.c.push_back(p11 + p44);
    k.d1.push_back(p11 * p44 - std::norm(r(0, 3)));
    k.d2.push_back(p22 * p33 - std::norm(r(1, 2)));
  }
  return k;
}

CompatibilityReport check_marginals(const MarginalPair& m, double tol) {
  CompatibilityReport r;
  r.isospectral = isospectral_test(m, tol);
  try {
    r.window = unitary_window(m);
  } catch (const std::invalid_argument& e) {
    r.window_error = e.what();
  }
  return r;
}

CompatibilityReport check_joint(const Trajectory<4>& joint, double tol) {
  CompatibilityReport r = check_marginals(marginals_of(joint, tol), tol);
  r.unitarity = unitarity_test(joint, tol);
  r.constants = two_coherence_constants(joint);
  return r;
}

CoherentExchange::CoherentExchange(double J) : j_(J) { require_positive(J, "J"); }

Mat4 CoherentExchange::joint(double t) const {
  const double c = std::cos(j_ * t), s = std::sin(j_ * t);
  Mat4 r;
  r(0, 0) = r(3, 3) = 0.25;
  r(1, 1) = (4.0 + c) / 16.0;
  r(2, 2) = (4.0 - c) / 16.0;
  r(1, 2) = cplx(0.0, -s / 16.0);
  r(2, 1) = cplx(0.0, s / 16.0);
  return r;
}

Mat2 CoherentExchange::marginal_a(double t) const {
  const double c = std::cos(j_ * t);
  return Mat2::diagonal({(8.0 + c) / 16.0, (8.0 - c) / 16.0});
}

Mat2 CoherentExchange::marginal_b(double t) const {
  const double c = std::cos(j_ * t);
  return Mat2::diagonal({(8.0 - c) / 16.0, (8.0 + c) / 16.0});
}

Mat4 CoherentExchange::hamiltonian() const {
  const auto& g = pauli_basis();
  return (g[pauli_index(1, 1)] + g[pauli_index(2, 2)]) * (-j_ / 4.0);
}

Trajectory<4> CoherentExchange::joint_trajectory(const Grid& g, Execution ex) const {
  return sample<4>(g, ex, [&](double t) { return joint(t); });
}

MarginalPair CoherentExchange::marginals(const Grid& g, Execution ex) const {
  return MarginalPair(sample<2>(g, ex, [&](double t) { return marginal_a(t); }),
                      sample<2>(g, ex, [&](double t) { return marginal_b(t); }));
}

CrossedCoherences::CrossedCoherences(double omega) : w_(omega) { require_positive(omega, "omega"); }

Mat2 CrossedCoherences::marginal_a(double t) const {
  const double c = 0.5 * std::cos(2.0 * w_ * t);
  return Mat2{{0.5, c}, {c, 0.5}};
}

Mat2 CrossedCoherences::marginal_b(double t) const {
  const double s = 0.5 * std::sin(2.0 * w_ * t);
  return Mat2{{0.5, s}, {s, 0.5}};
}

MarginalPair CrossedCoherences::marginals(const Grid& g, Execution ex) const {
  return MarginalPair(sample<2>(g, ex, [&](double t) { return marginal_a(t); }),
                      sample<2>(g, ex, [&](double t) { return marginal_b(t); }));
}

DampedExchange::DampedExchange(double J, double gamma) : j_(J), gamma_(gamma) {
  require_positive(J, "J");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be >= 0");
}

Mat4 DampedExchange::joint(double t) const {
  const double e = std::exp(-gamma_ * t);
  const double bp = 1.0 + e, bm = 1.0 - e;
  const double th = 0.75 * j_ * t;
  const double c = std::cos(th), s = std::sin(th);
  Mat4 r;
  r(0, 0) = 0.5 * bp * c * c;
  r(3, 3) = 0.5 * bp * s * s;
  r(2, 2) = 0.5 * bm;
  r(0, 3) = cplx(0.0, -0.5 * bp * c * s);
  r(3, 0) = cplx(0.0, 0.5 * bp * c * s);
  return r;
}

Mat2 DampedExchange::marginal_a(double t) const {
  const double e = std::exp(-gamma_ * t);
  const double c = std::cos(0.75 * j_ * t);
  const double p0 = 0.5 * (1.0 + e) * c * c;
  return Mat2::diagonal({p0, 1.0 - p0});
}

Mat2 DampedExchange::marginal_b(double t) const {
  const double e = std::exp(-gamma_ * t);
  const double s = std::sin(0.75 * j_ * t);
  const double p1 = 0.5 * (1.0 + e) * s * s;
  return Mat2::diagonal({1.0 - p1, p1});
}

Mat4 DampedExchange::hamiltonian() const {
  const auto& g = pauli_basis();
  return (g[pauli_index(1, 1)] - g[pauli_index(2, 2)]) * (-3.0 * j_ / 8.0);
}

double DampedExchange::negativity(double t) const {
  const double e = std::exp(-gamma_ * t);
  const double bp = 1.0 + e, bm = 1.0 - e;
  const double s = std::sin(1.5 * j_ * t);
  return 0.25 * (std::sqrt(bm * bm + bp * bp * s * s) - bm);
}

Trajectory<4> DampedExchange::joint_trajectory(const Grid& g, Execution ex) const {
  return sample<4>(g, ex, [&](double t) { return joint(t); });
}

MarginalPair DampedExchange::marginals(const Grid& g, Execution ex) const {
  return MarginalPair(sample<2>(g, ex, [&](double t) { return marginal_a(t); }),
                      sample<2>(g, ex, [&](double t) { return marginal_b(t); }));
}

}  // namespace qmp
