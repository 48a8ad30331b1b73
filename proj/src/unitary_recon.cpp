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

#include "qmp/unitary_recon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

namespace qmp {

namespace {

using Slots = std::vector<int>;

// Groups of slots whose values agree within tol, chained through sorted order.
std::vector<Slots> clusters_of(const std::array<double, 4>& v, double tol) {
  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] > v[b]; });
  std::vector<Slots> out{{order[0]}};
  for (int i = 1; i < 4; ++i) {
    if (v[order[i - 1]] - v[order[i]] <= tol)
      out.back().push_back(order[i]);
    else
      out.push_back({order[i]});
  }
  for (auto& c : out) std::sort(c.begin(), c.end());
  return out;
}

std::array<int, 4> labels_of(const std::vector<Slots>& clusters) {
  std::array<int, 4> lab{};
  for (const auto& c : clusters)
    for (int s : c) lab[s] = c.front();
  return lab;
}

// Block matrix: (a^dagger b) on the rows/columns in `slots`, identity elsewhere.
Mat4 overlap_block(const Mat4& a, const Mat4& b, const Slots& slots) {
  Mat4 m = Mat4::identity();
  for (int i : slots)
    for (int j : slots) {
      cplx s{};
      for (int k = 0; k < 4; ++k) s += std::conj(a(k, i)) * b(k, j);
      m(i, j) = s;
    }
  return m;
}

// Column-restricted product: columns in `slots` of v are replaced by v * r.
void rotate_columns(Mat4& v, const Mat4& r, const Slots& slots) {
  Mat4 out = v;
  for (int j : slots)
    for (int k = 0; k < 4; ++k) {
      cplx s{};
      for (int i : slots) s += v(k, i) * r(i, j);
      out(k, j) = s;
    }
  v = out;
}

std::optional<Mat4> try_polar(const Mat4& m) {
  try {
    return polar_unitary(m);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void align_phase(Mat4& w, const Mat4& prev, int j) {
  cplx ov{};
  for (int k = 0; k < 4; ++k) ov += std::conj(prev(k, j)) * w(k, j);
  const double mag = std::abs(ov);
  if (mag < 1e-300) return;
  const cplx ph = std::conj(ov) / mag;
  for (int k = 0; k < 4; ++k) w(k, j) *= ph;
}

std::array<int, 4> best_assignment(const Mat4& prev, const Mat4& w) {
  std::array<std::array<double, 4>, 4> score{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cplx s{};
      for (int k = 0; k < 4; ++k) s += std::conj(prev(k, i)) * w(k, j);
      score[i][j] = std::norm(s);
    }
  std::array<int, 4> perm{0, 1, 2, 3}, best = perm;
  double best_score = -1.0;
  do {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += score[i][perm[i]];
    if (s > best_score + 1e-15) {
      best_score = s;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

EigenSystem<4> descending(const EigenSystem<4>& es) {
  EigenSystem<4> d;
  for (int j = 0; j < 4; ++j) {
    d.values[j] = es.values[3 - j];
    for (int k = 0; k < 4; ++k) d.vectors(k, j) = es.vectors(k, 3 - j);
  }
  return d;
}

}  // namespace

OrbitSpec orbit_rep(const DensityMatrix<4>& rho, double degeneracy_tol) {
  const auto es = descending(spectrum(rho.mat()));
  OrbitSpec o;
  o.gamma = es.values;
  o.partition.push_back({0});
  for (int i = 1; i < 4; ++i) {
    if (o.gamma[i - 1] - o.gamma[i] <= degeneracy_tol)
      o.partition.back().push_back(i);
    else
      o.partition.push_back({i});
  }
  int sq = 0;
  for (const auto& p : o.partition) sq += static_cast<int>(p.size() * p.size());
  o.orbit_dimension = 16 - sq;
  return o;
}

template <std::size_t N>
Iwasawa<N> iwasawa_decompose(const CMat<N>& z) {
  if (!z.is_finite()) throw std::invalid_argument("iwasawa_decompose: non-finite input");
  const cplx det = determinant(z);
  if (std::abs(det - 1.0) > 1e-10) {
    std::ostringstream os;
    os << "iwasawa_decompose: det z = " << det.real() << (det.imag() < 0 ? "" : "+") << det.imag()
       << "i, rescale to unit determinant first";
    throw std::invalid_argument(os.str());
  }
  // z^dagger z = L D L^dagger with L unit lower triangular, so r = L^dagger and a = sqrt(D).
  const CMat<N> m = z.adjoint() * z;
  CMat<N> l = CMat<N>::identity();
  std::array<double, N> d{};
  const double scale = std::max(1.0, m.frobenius_norm());
  for (std::size_t j = 0; j < N; ++j) {
    double dj = m(j, j).real();
    for (std::size_t k = 0; k < j; ++k) dj -= std::norm(l(j, k)) * d[k];
    if (!(dj > 1e-14 * scale)) throw std::invalid_argument("iwasawa_decompose: singular matrix");
    d[j] = dj;
    for (std::size_t i = j + 1; i < N; ++i) {
      cplx s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k)) * d[k];
      l(i, j) = s / dj;
    }
  }
  Iwasawa<N> out;
  out.r = l.adjoint();
  for (std::size_t j = 0; j < N; ++j) out.a[j] = std::sqrt(d[j]);
  // u = z r^{-1} a^{-1}; r^{-1} by back substitution on the unit upper triangle.
  CMat<N> rinv = CMat<N>::identity();
  for (std::size_t c = 0; c < N; ++c)
    for (std::size_t i = c; i-- > 0;) {
      cplx s{};
      for (std::size_t k = i + 1; k <= c; ++k) s += out.r(i, k) * rinv(k, c);
      rinv(i, c) = -s;
    }
  out.u = z * rinv;
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t i = 0; i < N; ++i) out.u(i, j) /= out.a[j];
  return out;
}

template Iwasawa<2> iwasawa_decompose(const CMat<2>&);
template Iwasawa<4> iwasawa_decompose(const CMat<4>&);

EigenframeTrack track_eigenframes(const Trajectory<4>& traj, const GaugeConfig& cfg, Execution ex) {
  const std::size_t n = traj.size();
  auto systems = map_indices<EigenSystem<4>>(n, ex, [&](std::size_t i) { return descending(spectrum(traj[i])); });

  EigenframeTrack tr;
  tr.frames.resize(n);
  tr.values.resize(n);
  std::vector<std::array<int, 4>> labels(n);
  tr.frames[0] = systems[0].vectors;
  tr.values[0] = systems[0].values;
  labels[0] = labels_of(clusters_of(tr.values[0], cfg.cluster_tol));

  for (std::size_t step = 1; step < n; ++step) {
    const Mat4& prev = tr.frames[step - 1];
    const auto perm = best_assignment(prev, systems[step].vectors);
    Mat4 w;
    std::array<double, 4> val{};
    for (int i = 0; i < 4; ++i) {
      val[i] = systems[step].values[perm[i]];
      for (int k = 0; k < 4; ++k) w(k, i) = systems[step].vectors(k, perm[i]);
    }
    const auto now = clusters_of(val, cfg.cluster_tol);
    const auto lab = labels_of(now);

    // A block degenerate since the first sample carries an arbitrary basis;
    // when it splits, rotate its whole history onto the new eigenvectors.
    for (const auto& old : clusters_of(tr.values[step - 1], cfg.cluster_tol)) {
      if (old.size() < 2) continue;
      const bool split = std::any_of(old.begin(), old.end(), [&](int s) { return lab[s] != lab[old.front()]; });
      if (!split) continue;
      bool from_start = true;
      for (std::size_t k = 0; k < step && from_start; ++k)
        for (int s : old) from_start = from_start && labels[k][s] == labels[k][old.front()];
      if (!from_start) continue;
      const auto r = try_polar(overlap_block(tr.frames[step - 1], w, old));
      if (!r) continue;
      for (std::size_t k = 0; k < step; ++k) rotate_columns(tr.frames[k], *r, old);
    }

    for (const auto& c : now) {
      if (c.size() == 1) {
        align_phase(w, tr.frames[step - 1], c.front());
        continue;
      }
      if (const auto r = try_polar(overlap_block(w, tr.frames[step - 1], c)))
        rotate_columns(w, *r, c);
      else
        for (int s : c) align_phase(w, tr.frames[step - 1], s);
    }
    tr.frames[step] = w;
    tr.values[step] = val;
    labels[step] = lab;
  }
  return tr;
}

Trajectory<4> evolution_from_frames(const EigenframeTrack& track, double t0, double dt) {
  const Mat4 v0dag = track.frames.front().adjoint();
  std::vector<Mat4> u(track.frames.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = track.frames[i] * v0dag;
  return Trajectory<4>(t0, dt, std::move(u));
}

double EvolutionSequence::max_residual() const {
  return residual.empty() ? 0.0 : *std::max_element(residual.begin(), residual.end());
}

double EvolutionSequence::max_unitarity_defect() const {
  return unitarity.empty() ? 0.0 : *std::max_element(unitarity.begin(), unitarity.end());
}

EvolutionSequence reconstruct_evolution(const Trajectory<4>& traj, const GaugeConfig& cfg, Execution ex) {
  const auto rho0 = DensityMatrix<4>::from(traj[0]);
  const auto spec0 = eigenvalues(traj[0]);
  const auto drifts = map_indices<double>(traj.size(), ex, [&](std::size_t i) {
    const auto s = eigenvalues(traj[i]);
    double d = 0.0;
    for (int k = 0; k < 4; ++k) d = std::max(d, std::abs(s[k] - spec0[k]));
    return d;
  });
  const auto worst = std::max_element(drifts.begin(), drifts.end());
  if (*worst > cfg.spectrum_tol) {
    std::ostringstream os;
    os << "spectrum drifts by " << *worst << " at t = " << traj.time(worst - drifts.begin())
       << " (tolerance " << cfg.spectrum_tol << "); no unitary evolution connects the samples";
    throw NonUnitaryTrajectory(os.str(), *worst);
  }

  const auto track = track_eigenframes(traj, cfg, ex);
  EvolutionSequence out{evolution_from_frames(track, traj.t0(), traj.dt()), {}, {}, orbit_rep(rho0, cfg.cluster_tol),
                        *worst};
  const Mat4 id = Mat4::identity();
  out.residual = map_indices<double>(traj.size(), ex, [&](std::size_t i) {
    const Mat4& u = out.u[i];
    return frobenius_distance(u * traj[0] * u.adjoint(), traj[i]);
  });
  out.unitarity = map_indices<double>(traj.size(), ex, [&](std::size_t i) {
    return frobenius_distance(out.u[i].adjoint() * out.u[i], id);
  });
  return out;
}

double HamiltonianSeries::max_anti_hermitian_defect() const {
  return anti_hermitian_defect.empty()
             ? 0.0
             : *std::max_element(anti_hermitian_defect.begin(), anti_hermitian_defect.end());
}

std::vector<PauliDecomposition> HamiltonianSeries::pauli() const {
  std::vector<PauliDecomposition> out;
  out.reserve(h.size());
  for (const auto& m : h.samples()) out.push_back(pauli_decompose(m));
  return out;
}

HamiltonianSeries hamiltonian_from_evolution(const Trajectory<4>& u) {
  const auto du = finite_diff(u);
  std::vector<Mat4> h(u.size());
  std::vector<double> defect(u.size()), trace(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Mat4 raw = kI * du[i] * u[i].adjoint();
    defect[i] = 0.5 * (raw - raw.adjoint()).frobenius_norm();
    Mat4 herm = raw.hermitian_part();
    trace[i] = herm.trace().real() / 4.0;
    herm -= Mat4::identity() * trace[i];
    h[i] = herm;
  }
  return {Trajectory<4>(u.t0(), u.dt(), std::move(h)), std::move(defect), std::move(trace)};
}

Mat4 interpolate(const Trajectory<4>& traj, double t) {
  const double x = (t - traj.t0()) / traj.dt();
  if (!(x > 0.0)) return traj[0];
  const std::size_t last = traj.size() - 1;
  if (x >= static_cast<double>(last)) return traj[last];
  const auto i = static_cast<std::size_t>(x);
  const double f = x - static_cast<double>(i);
  return traj[i] * (1.0 - f) + traj[i + 1] * f;
}

}  // namespace qmp
