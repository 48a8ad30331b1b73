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

#include "cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "qmp/kinematics.hpp"
#include "qmp/measures.hpp"
#include "qmp/unitary_recon.hpp"

namespace qmp::cli {

using nlohmann::json;

namespace {

constexpr double kSelfCheckTol = 1e-12;

// nlohmann writes non-finite doubles as null already; this keeps the intent visible.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

std::string pauli_label(int k) {
  return "h" + std::to_string(pauli_first(k)) + std::to_string(pauli_second(k));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

template <std::size_t N>
Trajectory<N> load(const fs::path& file, SampleCheck check, double tol) {
  const auto f = read_file(file);
  try {
    return to_trajectory<N>(f, check, tol);
  } catch (const ValidationError& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
}

template <std::size_t N>
void save(const fs::path& path, const Trajectory<N>& traj, json params) {
  write_atomic(path, serialize(to_file(traj, std::move(params))));
}

void save_json(const fs::path& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "nan";
  return format_double(v);
}

json minmax(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {{"min", num(*lo)}, {"max", num(*hi)}};
}

json compatibility_json(const CompatibilityReport& rep) {
  json j;
  if (rep.unitarity) {
    const auto& u = *rep.unitarity;
    j["unitarity"] = {{"verdict", verdict(u.unitary)},
                      {"drift", {{"k2", num(u.drift[0])}, {"k3", num(u.drift[1])}, {"k4", num(u.drift[2])}}}};
  }
  const auto& iso = rep.isospectral;
  j["isospectral"] = {
      {"verdict", verdict(iso.isospectral)}, {"max_distance", num(iso.max_distance)}, {"t_at_max", num(iso.t_at_max)}};
  if (rep.window) {
    const auto& w = *rep.window;
    j["window"] = {{"verdict", w.exists ? "EXISTS" : "NONE"},
                   {"c_lo", num(w.c_lo)},
                   {"c_hi", num(w.c_hi)},
                   {"t_lo", num(w.t_lo)},
                   {"t_hi", num(w.t_hi)}};
  } else {
    j["window"] = {{"verdict", "UNDEFINED"}, {"reason", rep.window_error}};
  }
  if (rep.constants) {
    j["two_coherence_constants"] = {
        {"c", minmax(rep.constants->c)}, {"d1", minmax(rep.constants->d1)}, {"d2", minmax(rep.constants->d2)}};
  }
  return j;
}

std::optional<fs::path> sibling(const fs::path& file, const std::string& from, const std::string& to) {
  const std::string name = file.filename().string();
  const auto pos = name.rfind(from);
  if (pos == std::string::npos) return std::nullopt;
  auto other = file;
  other.replace_filename(name.substr(0, pos) + to + name.substr(pos + from.size()));
  if (!fs::exists(other)) return std::nullopt;
  return other;
}

json pauli_summary(const HamiltonianSeries& hs) {
  // Interior samples only; the end points carry one-sided differences.
  const auto dec = hs.pauli();
  json mean = json::object(), spread = json::object();
  for (int k = 1; k < 16; ++k) {
    double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t cnt = 0;
    for (std::size_t i = 1; i + 1 < dec.size(); ++i) {
      const double v = dec[i].h[pauli_first(k)][pauli_second(k)];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++cnt;
    }
    mean[pauli_label(k)] = num(cnt ? sum / static_cast<double>(cnt) : 0.0);
    spread[pauli_label(k)] = num(cnt ? hi - lo : 0.0);
  }
  return {{"mean", mean}, {"spread", spread}};
}

json nonzero_entries(const RealMat15& d) {
  json out = json::array();
  for (int i = 0; i < 15; ++i)
    for (int k = 0; k < 15; ++k)
      if (d[i][k] != 0.0) out.push_back({i + 1, k + 1, num(d[i][k])});
  return out;
}

json candidate_json(const DissipatorCandidate& c) {
  json j;
  j["name"] = c.name;
  j["fit_residual"] = num(c.fit_residual);
  j["free_indices"] = c.free_indices;
  if (!c.note.empty()) j["note"] = c.note;
  j["d_prime"] = nonzero_entries(c.generator.d);
  if (c.kossakowski) {
    const auto& kf = *c.kossakowski;
    json entries = json::array();
    for (int m = 0; m < 15; ++m)
      for (int n = 0; n < 15; ++n)
        if (kf.k.k[m][n] != cplx(0.0, 0.0))
          entries.push_back({m + 1, n + 1, num(kf.k.k[m][n].real()), num(kf.k.k[m][n].imag())});
    json eig = json::array();
    for (double v : c.cp.eigenvalues) eig.push_back(num(v));
    j["kossakowski"] = {{"entries", entries},
                        {"nullity", kf.nullity},
                        {"residual", num(kf.residual)},
                        {"eigenvalues", eig},
                        {"min_eigenvalue", num(c.cp.min_eigenvalue)}};
    j["cp"] = c.cp.valid ? "VALID" : "INVALID";
  } else {
    j["kossakowski"] = nullptr;
    j["cp"] = "UNDEFINED";
  }
  if (c.integrated) {
    const auto& r = *c.integrated;
    j["integrated_cp"] = {{"verdict", verdict(r.pass)},
                          {"worst_index", r.worst_index},
                          {"worst_time", num(r.worst_time)},
                          {"worst_value", num(r.worst_value)}};
  } else {
    j["integrated_cp"] = nullptr;
  }
  if (c.roundtrip) {
    const auto& r = *c.roundtrip;
    j["roundtrip"] = {{"max_frobenius", num(r.max_frobenius)},
                      {"max_marginal_a", num(r.max_marginal_a)},
                      {"max_marginal_b", num(r.max_marginal_b)},
                      {"t_at_max", num(r.t_at_max)}};
  } else {
    j["roundtrip"] = nullptr;
  }
  return j;
}

std::string ansatz_name(AnsatzStructure s) {
  return s == AnsatzStructure::unital_diagonal ? "unital-diagonal" : "unital-symmetric";
}

}  // namespace

double env_tolerance() {
  const char* raw = std::getenv("QMP_TOL");
  if (raw == nullptr || *raw == '\0') return kDefaultTol;
  const std::string s(raw);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v) || v <= 0.0)
    throw ValidationError("QMP_TOL must be a positive number, got '" + s + "'");
  return v;
}

std::size_t default_steps(const ScenarioOptions& opt) {
  double rate = 1.0;
  if (opt.name == "example1") rate = opt.J;
  if (opt.name == "example2") rate = opt.omega;
  if (opt.name == "example3") rate = 1.5 * opt.J;
  const double t_max = opt.t_max.value_or(opt.name == "example3" ? 10.0 : std::numbers::pi);
  const double n = std::ceil(std::abs(rate) * t_max / 0.01 - 1e-9);
  return std::max<std::size_t>(2, static_cast<std::size_t>(n));
}

ScenarioResult cmd_scenario(const ScenarioOptions& opt) {
  const auto finite_pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  const double t_max = opt.t_max.value_or(opt.name == "example3" ? 10.0 : std::numbers::pi);
  require(finite_pos(t_max), "--t-max must be positive");
  const std::size_t steps = opt.steps.value_or(default_steps(opt));
  require(steps >= 2, "--steps must be at least 2");
  const Grid g{0.0, t_max / static_cast<double>(steps), steps};

  json params = {{"scenario", opt.name}, {"t_max", t_max}, {"steps", steps}};
  ScenarioResult res;
  std::optional<Trajectory<4>> joint;
  std::optional<MarginalPair> marg;
  if (opt.name == "example1") {
    require(finite_pos(opt.J), "--J must be positive");
    params["J"] = opt.J;
    const CoherentExchange ex(opt.J);
    joint = ex.joint_trajectory(g);
    marg = ex.marginals(g);
  } else if (opt.name == "example2") {
    require(finite_pos(opt.omega), "--omega must be positive");
    params["omega"] = opt.omega;
    marg = CrossedCoherences(opt.omega).marginals(g);
    res.note = "example2 has no joint trajectory: the marginals admit no unitarily evolving joint state";
    params["note"] = res.note;
  } else if (opt.name == "example3") {
    require(finite_pos(opt.J), "--J must be positive");
    require(std::isfinite(opt.gamma) && opt.gamma >= 0.0, "--gamma must be non-negative");
    params["J"] = opt.J;
    params["gamma"] = opt.gamma;
    const DampedExchange ex(opt.J, opt.gamma);
    joint = ex.joint_trajectory(g);
    marg = ex.marginals(g);
  } else {
    throw ValidationError("unknown scenario '" + opt.name + "'");
  }

  if (joint) {
    double worst = 0.0;
    for (std::size_t i = 0; i < joint->size(); ++i) {
      worst = std::max(worst, max_abs_diff(partial_trace((*joint)[i], Subsystem::B), marg->a()[i]));
      worst = std::max(worst, max_abs_diff(partial_trace((*joint)[i], Subsystem::A), marg->b()[i]));
    }
    if (worst > kSelfCheckTol) {
      std::ostringstream os;
      os << opt.name << ": joint partial traces differ from the marginals by " << worst;
      throw std::runtime_error(os.str());
    }
    auto p = params;
    p["part"] = "joint";
    res.files.push_back(opt.out / (opt.name + "_joint.json"));
    save(res.files.back(), *joint, p);
  }
  auto pa = params, pb = params;
  pa["part"] = "marginal_a";
  pb["part"] = "marginal_b";
  res.files.push_back(opt.out / (opt.name + "_marginal_a.json"));
  save(res.files.back(), marg->a(), pa);
  res.files.push_back(opt.out / (opt.name + "_marginal_b.json"));
  save(res.files.back(), marg->b(), pb);
  return res;
}

json cmd_check(const fs::path& file, const std::optional<fs::path>& partner, double tol) {
  const auto f = read_file(file);
  json report = {{"command", "check"}, {"tol", tol}};
  if (f.dim == 4) {
    require(!partner, "a joint trajectory is checked on its own");
    report["inputs"] = {file.string()};
    Trajectory<4> traj = [&] {
      try {
        return to_trajectory<4>(f, SampleCheck::density, tol);
      } catch (const ValidationError& e) {
        throw ValidationError(file.string() + ": " + e.what());
      }
    }();
    report["kind"] = "joint";
    report.update(compatibility_json(check_joint(traj, tol)));
    return report;
  }

  fs::path fa = file, fb;
  if (partner) {
    fb = *partner;
  } else if (auto b = sibling(file, "marginal_a", "marginal_b")) {
    fb = *b;
  } else if (auto a = sibling(file, "marginal_b", "marginal_a")) {
    fa = *a;
    fb = file;
  } else {
    throw ValidationError(file.string() + ": a marginal trajectory needs its partner file");
  }
  const auto a = load<2>(fa, SampleCheck::density, tol);
  const auto b = load<2>(fb, SampleCheck::density, tol);
  std::optional<MarginalPair> pair;
  try {
    pair.emplace(a, b, tol);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  report["inputs"] = {fa.string(), fb.string()};
  report["kind"] = "marginals";
  report.update(compatibility_json(check_marginals(*pair, tol)));
  return report;
}

json cmd_reconstruct_unitary(const fs::path& file, const fs::path& out, double tol) {
  const auto traj = load<4>(file, SampleCheck::density, tol);
  json report = {{"command", "reconstruct unitary"}, {"input", file.string()}, {"tol", tol}};
  const auto ut = unitarity_test(traj, tol);
  report["unitarity_drift"] = {{"k2", num(ut.drift[0])}, {"k3", num(ut.drift[1])}, {"k4", num(ut.drift[2])}};

  const auto reject = [&](const std::string& why) {
    report["verdict"] = "REJECTED";
    report["reason"] = why;
    save_json(out / "unitary_report.json", report);
    throw ValidationError(why);
  };
  if (!ut.unitary) {
    std::ostringstream os;
    os << "trajectory is not unitary: trace-power drift (k=2,3,4) = " << ut.drift[0] << ", " << ut.drift[1] << ", "
       << ut.drift[2] << " exceeds " << tol;
    reject(os.str());
  }
  std::optional<EvolutionSequence> evo;
  try {
    evo = reconstruct_evolution(traj);
  } catch (const NonUnitaryTrajectory& e) {
    reject(e.what());
  }
  const auto hs = hamiltonian_from_evolution(evo->u);

  save(out / "hamiltonian.json", hs.h, {{"kind", "hamiltonian"}, {"source", file.filename().string()}});

  std::ostringstream csv;
  csv << 't';
  for (int k = 1; k < 16; ++k) csv << ',' << pauli_label(k);
  csv << '\n';
  const auto dec = hs.pauli();
  for (std::size_t i = 0; i < dec.size(); ++i) {
    csv << csv_number(hs.h.time(i));
    for (int k = 1; k < 16; ++k) csv << ',' << csv_number(dec[i].h[pauli_first(k)][pauli_second(k)]);
    csv << '\n';
  }
  write_atomic(out / "pauli_coefficients.csv", csv.str());

  json eig = json::array();
  for (double v : evo->orbit.gamma) eig.push_back(num(v));
  report["verdict"] = "ACCEPTED";
  report["orbit"] = {{"eigenvalues", eig}, {"orbit_dimension", evo->orbit.orbit_dimension}};
  report["spectrum_drift"] = num(evo->spectrum_drift);
  report["max_residual"] = num(evo->max_residual());
  report["max_unitarity_defect"] = num(evo->max_unitarity_defect());
  report["max_anti_hermitian_defect"] = num(hs.max_anti_hermitian_defect());
  report["pauli"] = pauli_summary(hs);
  save_json(out / "unitary_report.json", report);
  return report;
}

json cmd_reconstruct_master(const fs::path& file, AnsatzStructure ansatz, const fs::path& out, double tol) {
  const auto traj = load<4>(file, SampleCheck::density, tol);
  MasterOptions opt;
  opt.structure = ansatz;
  std::optional<MasterReconstruction> rec;
  try {
    rec = reconstruct_master(traj, opt);
  } catch (const InconsistentFit& e) {
    throw ValidationError(e.what());
  }

  json report = {{"command", "reconstruct master"}, {"input", file.string()}, {"ansatz", ansatz_name(ansatz)}};
  report["hamiltonian"] = pauli_summary(rec->hamiltonian);
  report["hamiltonian"]["max_anti_hermitian_defect"] = num(rec->hamiltonian.max_anti_hermitian_defect());
  report["active_components"] = rec->active;
  json cands = json::array();
  for (const auto& c : rec->candidates) cands.push_back(candidate_json(c));
  report["candidates"] = cands;
  const auto best = rec->best();
  report["best"] = best ? json(rec->candidates[*best].name) : json(nullptr);
  report["verdict"] = best ? "CP_VALID_FOUND" : "NO_CP_VALID";

  save(out / "hamiltonian.json", rec->hamiltonian.h, {{"kind", "hamiltonian"}, {"source", file.filename().string()}});
  save(out / "diagonal_frame.json", rec->frame, {{"kind", "diagonal_frame"}, {"source", file.filename().string()}});
  save_json(out / "master_report.json", report);
  if (!best) throw NoCpCandidate("no completely positive candidate reproduces " + file.string());
  return report;
}

void cmd_measures(const fs::path& file, const fs::path& out, double tol) {
  const auto traj = load<4>(file, SampleCheck::density, tol);
  const auto rows = measure_series(traj, tol);
  std::string csv = "t,purity_AB,purity_A,purity_B,negativity\n";
  csv.reserve(rows.size() * 100);
  for (const auto& r : rows) {
    csv += csv_number(r.t) + ',' + csv_number(r.purity_ab) + ',' + csv_number(r.purity_a) + ',' +
           csv_number(r.purity_b) + ',' + csv_number(r.negativity) + '\n';
  }
  write_atomic(out, csv);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-dependent quantum marginal problems for two qubits"};
  app.require_subcommand(1);
  std::optional<double> tol_flag;

  ScenarioOptions sc;
  double t_max = 0.0;
  std::size_t steps = 0;
  auto* scenario = app.add_subcommand("scenario", "Write joint and marginal trajectories of a built-in scenario");
  scenario->add_option("name", sc.name, "example1, example2 or example3")
      ->required()
      ->check(CLI::IsMember({"example1", "example2", "example3"}));
  scenario->add_option("--J", sc.J, "Coupling J")->capture_default_str();
  scenario->add_option("--omega", sc.omega, "Rotation frequency of example2")->capture_default_str();
  scenario->add_option("--gamma", sc.gamma, "Damping rate of example3")->capture_default_str();
  auto* t_max_opt = scenario->add_option("--t-max", t_max, "End time (pi, or 10 for example3)");
  auto* steps_opt = scenario->add_option("--steps", steps, "Number of intervals (rate * dt <= 0.01 by default)");
  scenario->add_option("--out", sc.out, "Output directory")->required();

  fs::path check_file;
  std::optional<fs::path> check_partner;
  fs::path check_out;
  auto* check = app.add_subcommand("check", "Unitarity, isospectrality and window report");
  check->add_option("file", check_file, "Joint or marginal trajectory")->required();
  check->add_option("partner", check_partner, "Second marginal trajectory");
  check->add_option("--tol", tol_flag, "Tolerance (default QMP_TOL or 1e-10)");
  check->add_option("--out", check_out, "Also write the report here");

  std::string mode, ansatz = "unital-diagonal";
  fs::path rec_file, rec_out;
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct a Hamiltonian or a master equation");
  reconstruct->add_option("mode", mode, "unitary or master")->required()->check(CLI::IsMember({"unitary", "master"}));
  reconstruct->add_option("file", rec_file, "Joint trajectory")->required();
  reconstruct->add_option("--ansatz", ansatz, "Dissipator ansatz")
      ->check(CLI::IsMember({"unital-diagonal", "unital-symmetric"}))
      ->capture_default_str();
  reconstruct->add_option("--out", rec_out, "Output directory")->required();
  reconstruct->add_option("--tol", tol_flag, "Tolerance (default QMP_TOL or 1e-10)");

  fs::path meas_file, meas_out;
  auto* measures = app.add_subcommand("measures", "Purity and negativity series as CSV");
  measures->add_option("file", meas_file, "Joint trajectory")->required();
  measures->add_option("--out", meas_out, "CSV path")->required();
  measures->add_option("--tol", tol_flag, "Tolerance (default QMP_TOL or 1e-10)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kParse;
  }

  try {
    const double tol = tol_flag ? *tol_flag : env_tolerance();
    require(std::isfinite(tol) && tol > 0.0, "--tol must be positive");
    if (scenario->parsed()) {
      if (*t_max_opt) sc.t_max = t_max;
      if (*steps_opt) sc.steps = steps;
      const auto res = cmd_scenario(sc);
      if (!res.note.empty()) err << "note: " << res.note << '\n';
      for (const auto& f : res.files) out << f.string() << '\n';
    } else if (check->parsed()) {
      const auto report = cmd_check(check_file, check_partner, tol);
      if (!check_out.empty()) save_json(check_out, report);
      out << report.dump(2) << '\n';
    } else if (reconstruct->parsed()) {
      const json report =
          mode == "unitary"
              ? cmd_reconstruct_unitary(rec_file, rec_out, tol)
              : cmd_reconstruct_master(rec_file,
                                       ansatz == "unital-symmetric" ? AnsatzStructure::unital_symmetric
                                                                    : AnsatzStructure::unital_diagonal,
                                       rec_out, tol);
      out << report.value("verdict", "") << '\n';
    } else if (measures->parsed()) {
      cmd_measures(meas_file, meas_out, tol);
      out << meas_out.string() << '\n';
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const ValidationError& e) {
    err << "validation failed: " << e.what() << '\n';
    return kValidation;
  } catch (const NoCpCandidate& e) {
    out << "NO_CP_VALID\n";
    err << e.what() << '\n';
    return kNoCpCandidate;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}

}  // namespace qmp::cli
