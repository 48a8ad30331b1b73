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

#include "qmp/dissipative_recon.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qmp {

namespace {

const Mat4& g(int k) { return pauli_basis()[static_cast<std::size_t>(k)]; }

// Tr(G_k X) for k = 1..15 at position k - 1; real part only.
Real15 project(const Mat4& x) {
  Real15 out{};
  for (int k = 1; k < 16; ++k) {
    cplx s{};
    const Mat4& p = g(k);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) s += p(i, j) * x(j, i);
    out[k - 1] = s.real();
  }
  return out;
}

double scale_of(const Mat4& m) { return std::max(1.0, m.frobenius_norm()); }

// 1 when G_j and G_m anticommute.
int anticommute(int j, int m) {
  int count = 0;
  const int aj = pauli_first(j), bj = pauli_second(j), am = pauli_first(m), bm = pauli_second(m);
  if (aj && am && aj != am) ++count;
  if (bj && bm && bj != bm) ++count;
  return count % 2;
}

const char* kPauliLetters = "IXYZ";

std::string pauli_label(int k) {
  return {kPauliLetters[pauli_first(k)], kPauliLetters[pauli_second(k)]};
}

using CMat15 = Eigen::Matrix<cplx, 15, 15>;

CMat15 to_eigen(const KossakowskiMatrix& k) {
  CMat15 m;
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j) m(i, j) = k.k[i][j];
  return m;
}

void require_hermitian(const KossakowskiMatrix& k, const char* where) {
  if (k.hermiticity_defect() > 1e-12 * std::max(1.0, k.max_abs()))
    throw std::invalid_argument(std::string(where) + ": Kossakowski matrix is not Hermitian");
}

double max_entry_diff(const AffineGenerator& a, const AffineGenerator& b) {
  double d = 0.0;
  for (int i = 0; i < 15; ++i) {
    d = std::max(d, std::abs(a.l[i] - b.l[i]));
    for (int j = 0; j < 15; ++j) d = std::max(d, std::abs(a.d[i][j] - b.d[i][j]));
  }
  return d;
}

}  // namespace

bool AffineGenerator::unital(double tol) const {
  return std::all_of(l.begin(), l.end(), [&](double v) { return std::abs(v) <= tol; });
}

Real15 AffineGenerator::apply(const Real15& r) const {
  Real15 out = l;
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j) out[i] += d[i][j] * r[j];
  return out;
}

KossakowskiMatrix KossakowskiMatrix::from_diagonal(const Real15& diag) {
  KossakowskiMatrix k;
  for (int i = 0; i < 15; ++i) k.k[i][i] = diag[i];
  return k;
}

Real15 KossakowskiMatrix::diagonal() const {
  Real15 d{};
  for (int i = 0; i < 15; ++i) d[i] = k[i][i].real();
  return d;
}

double KossakowskiMatrix::hermiticity_defect() const {
  double d = 0.0;
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j) d = std::max(d, std::abs(k[i][j] - std::conj(k[j][i])));
  return d;
}

double KossakowskiMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& row : k)
    for (const auto& v : row) m = std::max(m, std::abs(v));
  return m;
}

RealMat15 hamiltonian_action(const Mat4& h) {
  if (h.hermiticity_defect() > kHermitianTol * scale_of(h))
    throw std::invalid_argument("hamiltonian_action: H is not Hermitian");
  RealMat15 m{};
  for (int k = 1; k < 16; ++k) {
    const auto col = project(-kI * commutator(h, g(k)));
    for (int j = 0; j < 15; ++j) m[j][k - 1] = col[j] / 4.0;
  }
  double skew = 0.0;
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j) skew = std::max(skew, std::abs(m[i][j] + m[j][i]));
  if (skew > 1e-12 * scale_of(h)) throw std::logic_error("hamiltonian_action: result is not skew-symmetric");
  for (int i = 0; i < 15; ++i) {
    m[i][i] = 0.0;
    for (int j = i + 1; j < 15; ++j) {
      const double a = 0.5 * (m[i][j] - m[j][i]);
      m[i][j] = a;
      m[j][i] = -a;
    }
  }
  return m;
}

Trajectory<4> generator_residual(const Trajectory<4>& traj, const Trajectory<4>& hseq) {
  if (!traj.same_grid(hseq)) throw std::invalid_argument("generator_residual: grids differ");
  const auto rdot = finite_diff(traj);
  std::vector<Mat4> out(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) out[i] = rdot[i] + kI * commutator(hseq[i], traj[i]);
  return Trajectory<4>(traj.t0(), traj.dt(), std::move(out));
}

Dissipator::Dissipator(const KossakowskiMatrix& k) {
  for (int m = 0; m < 15; ++m)
    for (int n = 0; n < 15; ++n)
      if (k.k[m][n] != cplx(0.0)) b_[m] += g(n + 1) * k.k[m][n];
  for (int m = 0; m < 15; ++m) a_ += b_[m] * g(m + 1);
}

Mat4 Dissipator::apply(const Mat4& x) const {
  Mat4 out = -0.5 * (a_ * x + x * a_);
  for (int m = 0; m < 15; ++m) {
    if (b_[m] == Mat4{}) continue;
    out += g(m + 1) * x * b_[m];
  }
  return out;
}

Mat4 gksl_apply(const Mat4& h, const KossakowskiMatrix& k, const Mat4& rho) {
  return -kI * commutator(h, rho) + Dissipator(k).apply(rho);
}

Mat4 gksl_apply(const Mat4& h, const KossakowskiMatrix& k, const DensityMatrix<4>& rho) {
  return gksl_apply(h, k, rho.mat());
}

AffineGenerator d_from_k(const KossakowskiMatrix& k) {
  require_hermitian(k, "d_from_k");
  const Dissipator diss(k);
  AffineGenerator gen;
  gen.l = project(diss.apply(Mat4::identity()));
  for (auto& v : gen.l) v /= 4.0;
  for (int c = 1; c < 16; ++c) {
    const auto col = project(diss.apply(g(c)));
    for (int j = 0; j < 15; ++j) gen.d[j][c - 1] = col[j] / 4.0;
  }
  return gen;
}

KFromD k_from_d(const AffineGenerator& gen, AnsatzStructure structure) {
  KFromD out;
  if (structure == AnsatzStructure::unital_diagonal) {
    // Diagonal K is a Pauli channel: D_jj = -2 sum over anticommuting m of K_mm.
    Eigen::Matrix<double, 15, 15> a;
    Eigen::Matrix<double, 15, 1> rhs;
    for (int j = 1; j < 16; ++j) {
      rhs(j - 1) = gen.d[j - 1][j - 1];
      for (int m = 1; m < 16; ++m) a(j - 1, m - 1) = -2.0 * anticommute(j, m);
    }
    Eigen::FullPivLU<Eigen::Matrix<double, 15, 15>> lu(a);
    const Eigen::Matrix<double, 15, 1> x = lu.solve(rhs);
    Real15 diag{};
    for (int i = 0; i < 15; ++i) diag[i] = x(i);
    out.k = KossakowskiMatrix::from_diagonal(diag);
    out.nullity = 15 - static_cast<int>(lu.rank());
  } else {
    // Real symmetric K: 120 unknowns against all 240 entries of (d, l).
    std::vector<std::pair<int, int>> pairs;
    for (int m = 0; m < 15; ++m)
      for (int n = m; n < 15; ++n) pairs.emplace_back(m, n);
    Eigen::MatrixXd a(240, static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      KossakowskiMatrix unit;
      unit.k[pairs[c].first][pairs[c].second] = 1.0;
      unit.k[pairs[c].second][pairs[c].first] = 1.0;
      const auto col = d_from_k(unit);
      for (int i = 0; i < 15; ++i) {
        a(225 + i, static_cast<Eigen::Index>(c)) = col.l[i];
        for (int j = 0; j < 15; ++j) a(15 * i + j, static_cast<Eigen::Index>(c)) = col.d[i][j];
      }
    }
    Eigen::VectorXd rhs(240);
    for (int i = 0; i < 15; ++i) {
      rhs(225 + i) = gen.l[i];
      for (int j = 0; j < 15; ++j) rhs(15 * i + j) = gen.d[i][j];
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    cod.setThreshold(1e-12);
    const Eigen::VectorXd x = cod.solve(rhs);
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      out.k.k[pairs[c].first][pairs[c].second] = x(static_cast<Eigen::Index>(c));
      out.k.k[pairs[c].second][pairs[c].first] = x(static_cast<Eigen::Index>(c));
    }
    out.nullity = static_cast<int>(pairs.size()) - static_cast<int>(cod.rank());
  }
  out.residual = max_entry_diff(d_from_k(out.k), gen);
  if (out.residual > 1e-10) {
    std::ostringstream os;
    os << "k_from_d: no " << (structure == AnsatzStructure::unital_diagonal ? "diagonal" : "real symmetric")
       << " Kossakowski matrix reproduces D (residual " << out.residual << ")";
    throw std::invalid_argument(os.str());
  }
  return out;
}

CpVerdict cp_check(const KossakowskiMatrix& k, double tol) {
  require_hermitian(k, "cp_check");
  CMat15 m = to_eigen(k);
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMat15> es(m, Eigen::EigenvaluesOnly);
  CpVerdict v;
  for (int i = 0; i < 15; ++i) v.eigenvalues[i] = es.eigenvalues()(i);
  v.min_eigenvalue = v.eigenvalues[0];
  v.valid = v.min_eigenvalue >= -tol;
  return v;
}

IntegratedCpReport integrated_cp_check(const std::vector<Real15>& kdiag, double t0, double dt, double tol) {
  IntegratedCpReport rep;
  rep.worst_time = t0;
  Real15 acc{};
  double worst = 0.0;
  for (std::size_t n = 1; n < kdiag.size(); ++n)
    for (int i = 0; i < 15; ++i) {
      acc[i] += 0.5 * dt * (kdiag[n - 1][i] + kdiag[n][i]);
      if (acc[i] < worst) {
        worst = acc[i];
        rep.worst_index = i + 1;
        rep.worst_time = t0 + static_cast<double>(n) * dt;
      }
    }
  rep.worst_value = worst;
  rep.pass = worst >= -tol;
  return rep;
}

CoherenceSeries coherence_series(const Trajectory<4>& traj) {
  const auto der = finite_diff(traj);
  CoherenceSeries s{traj.t0(), traj.dt(), {}, {}};
  s.r.reserve(traj.size());
  s.rdot.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    s.r.push_back(project(traj[i]));
    s.rdot.push_back(project(der[i]));
  }
  return s;
}

CoherenceSeries dissipative_coherence_series(const Trajectory<4>& traj, const Trajectory<4>& hseq) {
  if (!traj.same_grid(hseq)) throw std::invalid_argument("dissipative_coherence_series: grids differ");
  auto s = coherence_series(traj);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto m = hamiltonian_action(hseq[i]);
    for (int j = 0; j < 15; ++j)
      for (int k = 0; k < 15; ++k) s.rdot[i][j] -= m[j][k] * s.r[i][k];
  }
  return s;
}

std::vector<int> active_components(const CoherenceSeries& s, double tol) {
  std::vector<int> out;
  for (int k = 0; k < 15; ++k) {
    const bool on = std::any_of(s.r.begin(), s.r.end(), [&](const CoherenceArray& r) { return std::abs(r[k]) > tol; });
    if (on) out.push_back(k + 1);
  }
  return out;
}

namespace {

std::vector<int> resolve_active(const CoherenceSeries& s, const DissipatorAnsatz& ansatz, const FitOptions& opt) {
  if (ansatz.indices.empty()) return active_components(s, opt.active_tol);
  for (int k : ansatz.indices)
    if (k < 1 || k > 15) throw std::invalid_argument("ansatz index outside 1..15");
  auto out = ansatz.indices;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Components outside the active set must stay still for any ansatz with zero there.
double inactive_motion(const CoherenceSeries& s, const std::vector<int>& active) {
  double worst = 0.0;
  for (int k = 1; k < 16; ++k) {
    if (std::find(active.begin(), active.end(), k) != active.end()) continue;
    for (const auto& v : s.rdot) worst = std::max(worst, std::abs(v[k - 1]));
  }
  return worst;
}

void finish_candidate(DissipatorCandidate& c, AnsatzStructure structure, const FitOptions& opt) {
  try {
    c.kossakowski = k_from_d(c.generator, structure);
    c.cp = cp_check(c.kossakowski->k, opt.cp_tol);
  } catch (const std::invalid_argument& e) {
    c.note = e.what();
    c.cp = CpVerdict{};
    c.cp.min_eigenvalue = -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

std::vector<DissipatorCandidate> fit_diagonal_unital(const CoherenceSeries& s, const DissipatorAnsatz& ansatz,
                                                     const FitOptions& opt) {
  const auto active = resolve_active(s, ansatz, opt);
  Real15 rate{};
  double residual = inactive_motion(s, active);
  for (int k : active) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < s.r.size(); ++i) {
      num += s.rdot[i][k - 1] * s.r[i][k - 1];
      den += s.r[i][k - 1] * s.r[i][k - 1];
    }
    rate[k - 1] = den > 0.0 ? num / den : 0.0;
    for (std::size_t i = 0; i < s.r.size(); ++i)
      residual = std::max(residual, std::abs(s.rdot[i][k - 1] - rate[k - 1] * s.r[i][k - 1]));
  }
  if (residual > opt.fit_tol) {
    std::ostringstream os;
    os << "no constant diagonal generator fits the trajectory (residual " << residual << ", tolerance "
       << opt.fit_tol << ")";
    throw InconsistentFit(os.str(), residual);
  }
  std::vector<int> free;
  for (int k = 1; k < 16; ++k)
    if (std::find(active.begin(), active.end(), k) == active.end()) free.push_back(k);

  std::vector<DissipatorCandidate> out;
  DissipatorCandidate zero;
  zero.name = "zero-completion";
  for (int k : active) zero.generator.d[k - 1][k - 1] = rate[k - 1];
  zero.free_indices = free;
  zero.fit_residual = residual;
  finish_candidate(zero, AnsatzStructure::unital_diagonal, opt);
  out.push_back(std::move(zero));

  // K = kappa e_m gives D_jj = -2 kappa for every G_j anticommuting with G_m.
  for (int m = 1; m < 16; ++m) {
    double num = 0.0, den = 0.0;
    for (int j : active) {
      const double a = -2.0 * anticommute(j, m);
      num += a * rate[j - 1];
      den += a * a;
    }
    if (den == 0.0) continue;
    const double kappa = num / den;
    if (!(kappa > opt.fit_tol)) continue;
    double mismatch = 0.0;
    for (int j : active) mismatch = std::max(mismatch, std::abs(-2.0 * kappa * anticommute(j, m) - rate[j - 1]));
    if (mismatch > opt.fit_tol) continue;
    DissipatorCandidate c;
    c.name = "single-channel " + pauli_label(m);
    for (int j = 1; j < 16; ++j) c.generator.d[j - 1][j - 1] = -2.0 * kappa * anticommute(j, m);
    c.fit_residual = residual + mismatch;
    finish_candidate(c, AnsatzStructure::unital_diagonal, opt);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<DissipatorCandidate> fit_symmetric_unital(const CoherenceSeries& s, const DissipatorAnsatz& ansatz,
                                                      const FitOptions& opt) {
  const auto active = resolve_active(s, ansatz, opt);
  const auto na = static_cast<Eigen::Index>(active.size());
  std::vector<std::pair<int, int>> pairs;
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = i; j < na; ++j) pairs.emplace_back(active[i], active[j]);
  const auto rows = static_cast<Eigen::Index>(s.r.size()) * na;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(pairs.size()));
  Eigen::VectorXd rhs(rows);
  for (std::size_t t = 0; t < s.r.size(); ++t)
    for (Eigen::Index i = 0; i < na; ++i) {
      const Eigen::Index row = static_cast<Eigen::Index>(t) * na + i;
      const int j = active[i];
      rhs(row) = s.rdot[t][j - 1];
      for (std::size_t c = 0; c < pairs.size(); ++c) {
        const auto [p, q] = pairs[c];
        if (p == j) a(row, static_cast<Eigen::Index>(c)) += s.r[t][q - 1];
        if (q == j && p != q) a(row, static_cast<Eigen::Index>(c)) += s.r[t][p - 1];
      }
    }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  cod.setThreshold(1e-10);
  const Eigen::VectorXd x = cod.solve(rhs);
  const double residual = std::max(inactive_motion(s, active), rows ? (a * x - rhs).cwiseAbs().maxCoeff() : 0.0);
  if (residual > opt.fit_tol) {
    std::ostringstream os;
    os << "no constant symmetric generator fits the trajectory (residual " << residual << ", tolerance "
       << opt.fit_tol << ")";
    throw InconsistentFit(os.str(), residual);
  }
  DissipatorCandidate sym;
  sym.name = "symmetric-min-norm";
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    const auto [p, q] = pairs[c];
    sym.generator.d[p - 1][q - 1] = x(static_cast<Eigen::Index>(c));
    sym.generator.d[q - 1][p - 1] = x(static_cast<Eigen::Index>(c));
  }
  for (int k = 1; k < 16; ++k)
    if (std::find(active.begin(), active.end(), k) == active.end()) sym.free_indices.push_back(k);
  sym.fit_residual = residual;
  finish_candidate(sym, AnsatzStructure::unital_symmetric, opt);
  if (sym.kossakowski) sym.note = "null-space dimension " + std::to_string(pairs.size() - cod.rank()) + " in the fit";

  std::vector<DissipatorCandidate> out{std::move(sym)};
  try {
    for (auto& c : fit_diagonal_unital(s, ansatz, opt)) out.push_back(std::move(c));
  } catch (const InconsistentFit&) {
  }
  return out;
}

LabDissipator::LabDissipator(const KossakowskiMatrix& k, Trajectory<4> u) : k_(k), diss_(k), u_(std::move(u)) {
  require_hermitian(k, "LabDissipator");
  const Mat4 id = Mat4::identity();
  for (const auto& m : u_.samples())
    if (frobenius_distance(m.adjoint() * m, id) > 1e-8)
      throw std::invalid_argument("LabDissipator: frame sequence is not unitary");
}

Mat4 LabDissipator::unitary_at(double t) const {
  const double x = (t - u_.t0()) / u_.dt();
  const double nearest = std::round(x);
  if (std::abs(x - nearest) < 1e-9 || x <= 0.0 || x >= static_cast<double>(u_.size() - 1))
    return u_[static_cast<std::size_t>(std::clamp(nearest, 0.0, static_cast<double>(u_.size() - 1)))];
  return polar_unitary(interpolate(u_, t));
}

Mat4 LabDissipator::operator()(double t, const Mat4& rho) const {
  const Mat4 u = unitary_at(t);
  return u * diss_.apply(u.adjoint() * rho * u) * u.adjoint();
}

KossakowskiMatrix LabDissipator::kossakowski_at(double t) const {
  const Mat4 u = unitary_at(t);
  RealMat15 o{};  // U G_m U^dagger = sum_a O_am G_a
  for (int m = 1; m < 16; ++m) {
    const auto col = project(u * g(m) * u.adjoint());
    for (int a = 0; a < 15; ++a) o[a][m - 1] = col[a] / 4.0;
  }
  KossakowskiMatrix out;
  for (int a = 0; a < 15; ++a)
    for (int b = 0; b < 15; ++b) {
      cplx s{};
      for (int m = 0; m < 15; ++m)
        for (int n = 0; n < 15; ++n)
          if (k_.k[m][n] != cplx(0.0)) s += o[a][m] * k_.k[m][n] * o[b][n];
      out.k[a][b] = s;
    }
  return out;
}

Generator<4> master_generator(const Trajectory<4>& hseq, const LabDissipator& diss) {
  return [hseq, diss](double t, const Mat4& rho) {
    return -kI * commutator(interpolate(hseq, t), rho) + diss(t, rho);
  };
}

Generator<4> master_generator(const Mat4& h, const KossakowskiMatrix& k) {
  return [h, d = Dissipator(k)](double, const Mat4& rho) { return -kI * commutator(h, rho) + d.apply(rho); };
}

RoundTrip roundtrip_verify(const Trajectory<4>& traj, const Generator<4>& gen) {
  const auto res = rk4_integrate_unchecked(gen, traj[0], traj.grid());
  RoundTrip rt;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Mat4& a = res.trajectory[i];
    const double f = frobenius_distance(a, traj[i]);
    if (f > rt.max_frobenius) {
      rt.max_frobenius = f;
      rt.t_at_max = traj.time(i);
    }
    rt.max_marginal_a = std::max(rt.max_marginal_a, frobenius_distance(partial_trace(a, Subsystem::B),
                                                                       partial_trace(traj[i], Subsystem::B)));
    rt.max_marginal_b = std::max(rt.max_marginal_b, frobenius_distance(partial_trace(a, Subsystem::A),
                                                                       partial_trace(traj[i], Subsystem::A)));
  }
  return rt;
}

std::optional<std::size_t> MasterReconstruction::best() const {
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (!c.cp.valid || !c.kossakowski) continue;
    if (!pick) {
      pick = i;
      continue;
    }
    const auto& p = candidates[*pick];
    const double dp = p.roundtrip ? p.roundtrip->max_frobenius : std::numeric_limits<double>::infinity();
    const double dc = c.roundtrip ? c.roundtrip->max_frobenius : std::numeric_limits<double>::infinity();
    if (dc < dp) pick = i;
  }
  return pick;
}

MasterReconstruction reconstruct_master(const Trajectory<4>& traj, const MasterOptions& opt, Execution ex) {
  for (std::size_t i = 0; i < traj.size(); ++i) DensityMatrix<4>::from(traj[i]);
  const auto track = track_eigenframes(traj, opt.gauge, ex);
  auto u = evolution_from_frames(track, traj.t0(), traj.dt());
  auto hs = hamiltonian_from_evolution(u);
  std::vector<Mat4> gamma(traj.size());
  for_each_index(traj.size(), ex, [&](std::size_t i) { gamma[i] = u[i].adjoint() * traj[i] * u[i]; });
  Trajectory<4> frame(traj.t0(), traj.dt(), std::move(gamma));

  const auto series = coherence_series(frame);
  const DissipatorAnsatz ansatz{AnsatzFrame::diagonal, opt.structure, {}};
  auto candidates = opt.structure == AnsatzStructure::unital_diagonal ? fit_diagonal_unital(series, ansatz, opt.fit)
                                                                      : fit_symmetric_unital(series, ansatz, opt.fit);
  for (auto& c : candidates) {
    if (!c.kossakowski) continue;
    const Real15 d = c.kossakowski->k.diagonal();
    c.integrated = integrated_cp_check(std::vector<Real15>(traj.size(), d), traj.t0(), traj.dt(), opt.fit.cp_tol);
  }
  if (opt.roundtrip) {
    for_each_index(candidates.size(), ex, [&](std::size_t i) {
      auto& c = candidates[i];
      if (!c.cp.valid || !c.kossakowski) return;
      const LabDissipator diss(c.kossakowski->k, u);
      c.roundtrip = roundtrip_verify(traj, master_generator(hs.h, diss));
    });
  }
  return {std::move(u), std::move(hs), std::move(frame), active_components(series, opt.fit.active_tol),
          std::move(candidates)};
}

}  // namespace qmp
