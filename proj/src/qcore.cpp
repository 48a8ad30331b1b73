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

#include "qmp/qcore.hpp"

#include <limits>
#include <numeric>

namespace qmp {

namespace {

constexpr int kMaxSweeps = 50;
constexpr double kOffNormTol = 1e-14;
constexpr double kGaugeTol = 1e-12;

template <std::size_t N>
void require_hermitian(const CMat<N>& h, const char* who) {
  const double scale = std::max(1.0, h.frobenius_norm());
  if (h.hermiticity_defect() > kHermitianTol * scale)
    throw std::invalid_argument(std::string(who) + ": matrix is not Hermitian (defect " +
                                std::to_string(h.hermiticity_defect()) + ")");
}

template <std::size_t N>
double off_norm(const CMat<N>& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace

Mat4 tensor(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

Mat2 partial_trace(const Mat4& rho, Subsystem traced) {
  Mat2 out;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      cplx s{};
      for (std::size_t m = 0; m < 2; ++m) {
        if (traced == Subsystem::B)
          s += rho(2 * i + m, 2 * j + m);
        else
          s += rho(2 * m + i, 2 * m + j);
      }
      out(i, j) = s;
    }
  }
  return out;
}

template <std::size_t N>
ValidationReport validate_state(const CMat<N>& rho, double tol) {
  ValidationReport rep;
  if (!rho.is_finite()) {
    rep.hermiticity_defect = rep.trace_defect = std::numeric_limits<double>::infinity();
    rep.min_eigenvalue = -std::numeric_limits<double>::infinity();
    return rep;
  }
  rep.hermiticity_defect = rho.hermiticity_defect();
  rep.trace_defect = std::abs(rho.trace() - 1.0);
  rep.min_eigenvalue = spectrum(rho.hermitian_part()).values[0];
  rep.valid = rep.hermiticity_defect <= tol && rep.trace_defect <= tol && rep.min_eigenvalue >= -tol;
  return rep;
}

template <std::size_t N>
std::optional<CMat<N>> cholesky_psd(const CMat<N>& rho) {
  require_hermitian(rho, "cholesky_psd");
  constexpr double kZeroPivot = 1e-10;
  constexpr double kResidualTol = 1e-8;
  CMat<N> l;
  for (std::size_t j = 0; j < N; ++j) {
    double d = rho(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (d > kPivotTol) {
      const double ljj = std::sqrt(d);
      l(j, j) = ljj;
      for (std::size_t i = j + 1; i < N; ++i) {
        cplx s = rho(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
        l(i, j) = s / ljj;
      }
    } else if (d >= -kZeroPivot) {
      // Zero pivot: the rest of the column must vanish too.
      for (std::size_t i = j + 1; i < N; ++i) {
        cplx s = rho(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
        if (std::abs(s) > kResidualTol) return std::nullopt;
      }
    } else {
      return std::nullopt;
    }
  }
  return l;
}

template <std::size_t N>
PowerTrace trace_power(const CMat<N>& rho, int k) {
  if (k < 1 || k > 4) throw std::out_of_range("trace_power: k must be in 1..4");
  CMat<N> p = rho;
  for (int i = 1; i < k; ++i) p = p * rho;
  const cplx t = p.trace();
  return {t.real(), std::abs(t.imag())};
}

template <std::size_t N>
EigenSystem<N> spectrum(const CMat<N>& h) {
  require_hermitian(h, "spectrum");
  CMat<N> a = h.hermitian_part();
  CMat<N> v = CMat<N>::identity();
  const double thresh = kOffNormTol * std::max(1.0, a.frobenius_norm());

  for (int sweep = 0; sweep < kMaxSweeps && off_norm(a) > thresh; ++sweep) {
    for (std::size_t p = 0; p + 1 < N; ++p) {
      for (std::size_t q = p + 1; q < N; ++q) {
        const double apq = std::abs(a(p, q));
        if (apq == 0.0) continue;
        const cplx phase = std::conj(a(p, q)) / apq;  // e^{-i phi}
        const double theta = (a(q, q).real() - a(p, p).real()) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx wpp = c, wpq = s, wqp = -s * phase, wqq = c * phase;

        for (std::size_t k = 0; k < N; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * wpp + akq * wqp;
          a(k, q) = akp * wpq + akq * wqq;
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * wpp + vkq * wqp;
          v(k, q) = vkp * wpq + vkq * wqq;
        }
        for (std::size_t k = 0; k < N; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(wpp) * apk + std::conj(wqp) * aqk;
          a(q, k) = std::conj(wpq) * apk + std::conj(wqq) * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
  }

  std::array<std::size_t, N> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });

  EigenSystem<N> out;
  for (std::size_t j = 0; j < N; ++j) {
    const std::size_t src = order[j];
    out.values[j] = a(src, src).real();
    cplx gauge = 1.0;
    for (std::size_t i = 0; i < N; ++i) {
      if (std::abs(v(i, src)) > kGaugeTol) {
        gauge = std::conj(v(i, src)) / std::abs(v(i, src));
        break;
      }
    }
    for (std::size_t i = 0; i < N; ++i) out.vectors(i, j) = v(i, src) * gauge;
  }
  return out;
}

template <std::size_t N>
CMat<N> unitary_propagator(const CMat<N>& h, double t) {
  const auto es = spectrum(h);
  CMat<N> out;
  for (std::size_t k = 0; k < N; ++k) {
    const cplx ph = std::exp(-kI * es.values[k] * t);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) out(i, j) += es.vectors(i, k) * ph * std::conj(es.vectors(j, k));
  }
  return out;
}

template <std::size_t N>
CMat<N> polar_unitary(const CMat<N>& a) {
  const auto es = spectrum((a.adjoint() * a).hermitian_part());
  if (!(es.values[0] > 1e-24 * std::max(1.0, es.values[N - 1])))
    throw std::invalid_argument("polar_unitary: singular matrix");
  CMat<N> inv_sqrt;
  for (std::size_t k = 0; k < N; ++k) {
    const double w = 1.0 / std::sqrt(es.values[k]);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j)
        inv_sqrt(i, j) += es.vectors(i, k) * w * std::conj(es.vectors(j, k));
  }
  return a * inv_sqrt;
}

template <std::size_t N>
cplx determinant(const CMat<N>& m) {
  CMat<N> a = m;
  cplx det = 1.0;
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < N; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (a(piv, c) == cplx{}) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < N; ++k) std::swap(a(c, k), a(piv, k));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t r = c + 1; r < N; ++r) {
      const cplx f = a(r, c) / a(c, c);
      for (std::size_t k = c; k < N; ++k) a(r, k) -= f * a(c, k);
    }
  }
  return det;
}

template <std::size_t N>
Trajectory<N> finite_diff(const Trajectory<N>& traj) {
  const std::size_t n = traj.size();
  const double inv2dt = 1.0 / (2.0 * traj.dt());
  std::vector<CMat<N>> d(n);
  d[0] = (-3.0 * traj[0] + 4.0 * traj[1] - traj[2]) * inv2dt;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (traj[i + 1] - traj[i - 1]) * inv2dt;
  d[n - 1] = (3.0 * traj[n - 1] - 4.0 * traj[n - 2] + traj[n - 3]) * inv2dt;
  return Trajectory<N>(traj.t0(), traj.dt(), std::move(d));
}

template <std::size_t N>
Rk4Result<N> rk4_integrate_unchecked(const Generator<N>& f, const CMat<N>& x0, const Grid& grid) {
  if (!(grid.dt > 0.0)) throw std::invalid_argument("rk4_integrate: dt must be > 0");
  if (grid.steps < 2) throw std::invalid_argument("rk4_integrate: need at least 2 steps");
  const double h = grid.dt;
  const cplx tr0 = x0.trace();

  std::vector<CMat<N>> xs;
  xs.reserve(grid.samples());
  std::vector<double> trace_drift, herm_drift;
  trace_drift.reserve(grid.samples());
  herm_drift.reserve(grid.samples());

  auto eval = [&](double t, const CMat<N>& x) {
    CMat<N> k = f(t, x);
    if (!k.is_finite()) throw std::runtime_error("rk4_integrate: generator returned non-finite values at t=" +
                                                 std::to_string(t));
    return k;
  };

  CMat<N> x = x0;
  xs.push_back(x);
  trace_drift.push_back(0.0);
  herm_drift.push_back(x.hermiticity_defect());
  for (std::size_t i = 0; i < grid.steps; ++i) {
    const double t = grid.time(i);
    const CMat<N> k1 = eval(t, x);
    const CMat<N> k2 = eval(t + 0.5 * h, x + (0.5 * h) * k1);
    const CMat<N> k3 = eval(t + 0.5 * h, x + (0.5 * h) * k2);
    const CMat<N> k4 = eval(t + h, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.is_finite()) throw std::runtime_error("rk4_integrate: state blew up at t=" + std::to_string(t + h));
    xs.push_back(x);
    trace_drift.push_back(std::abs(x.trace() - tr0));
    herm_drift.push_back(x.hermiticity_defect());
  }
  return {Trajectory<N>(grid.t0, grid.dt, std::move(xs)), std::move(trace_drift), std::move(herm_drift)};
}

template <std::size_t N>
Rk4Result<N> rk4_integrate(const Generator<N>& f, const DensityMatrix<N>& rho0, const Grid& grid) {
  return rk4_integrate_unchecked(f, rho0.mat(), grid);
}

#define QMP_INSTANTIATE(N)                                                                          \
  template ValidationReport validate_state<N>(const CMat<N>&, double);                              \
  template std::optional<CMat<N>> cholesky_psd<N>(const CMat<N>&);                                  \
  template PowerTrace trace_power<N>(const CMat<N>&, int);                                          \
  template EigenSystem<N> spectrum<N>(const CMat<N>&);                                              \
  template CMat<N> unitary_propagator<N>(const CMat<N>&, double);                                   \
  template CMat<N> polar_unitary<N>(const CMat<N>&);                                                \
  template cplx determinant<N>(const CMat<N>&);                                                     \
  template Trajectory<N> finite_diff<N>(const Trajectory<N>&);                                      \
  template Rk4Result<N> rk4_integrate_unchecked<N>(const Generator<N>&, const CMat<N>&, const Grid&); \
  template Rk4Result<N> rk4_integrate<N>(const Generator<N>&, const DensityMatrix<N>&, const Grid&);

QMP_INSTANTIATE(2)
QMP_INSTANTIATE(4)

#undef QMP_INSTANTIATE

}  // namespace qmp
