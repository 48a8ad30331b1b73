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

#include "cli/trajectory_file.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qmp::cli {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <std::size_t N>
TrajectoryFile to_file(const Trajectory<N>& traj, json params) {
  TrajectoryFile f;
  f.dim = static_cast<int>(N);
  f.t0 = traj.t0();
  f.dt = traj.dt();
  f.params = std::move(params);
  f.samples.reserve(traj.size());
  for (const auto& m : traj.samples()) f.samples.emplace_back(m.entries().begin(), m.entries().end());
  return f;
}

template <std::size_t N>
Trajectory<N> to_trajectory(const TrajectoryFile& f, SampleCheck check, double tol) {
  if (f.dim != static_cast<int>(N))
    throw ValidationError("expected dim " + std::to_string(N) + ", file has dim " + std::to_string(f.dim));
  std::vector<CMat<N>> out;
  out.reserve(f.samples.size());
  for (std::size_t i = 0; i < f.samples.size(); ++i) {
    CMat<N> m;
    std::copy(f.samples[i].begin(), f.samples[i].end(), m.entries().begin());
    if (check == SampleCheck::density) {
      const auto rep = validate_state(m, tol);
      if (!rep.valid) {
        std::ostringstream os;
        os << "sample " << i << " is not a density matrix (hermiticity " << rep.hermiticity_defect << ", trace "
           << rep.trace_defect << ", min eigenvalue " << rep.min_eigenvalue << ")";
        throw ValidationError(os.str());
      }
    } else if (m.hermiticity_defect() > tol * std::max(1.0, m.frobenius_norm())) {
      throw ValidationError("sample " + std::to_string(i) + " is not Hermitian");
    }
    out.push_back(m);
  }
  try {
    return Trajectory<N>(f.t0, f.dt, std::move(out));
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

template TrajectoryFile to_file(const Trajectory<2>&, json);
template TrajectoryFile to_file(const Trajectory<4>&, json);
template Trajectory<2> to_trajectory(const TrajectoryFile&, SampleCheck, double);
template Trajectory<4> to_trajectory(const TrajectoryFile&, SampleCheck, double);

std::string serialize(const TrajectoryFile& f) {
  std::ostringstream os;
  os << "{\n  \"dim\": " << f.dim << ",\n  \"t0\": " << format_double(f.t0) << ",\n  \"dt\": " << format_double(f.dt)
     << ",\n  \"n\": " << f.samples.size() << ",\n  \"params\": " << f.params.dump() << ",\n  \"samples\": [";
  for (std::size_t i = 0; i < f.samples.size(); ++i) {
    os << (i ? ",\n    [" : "\n    [");
    for (std::size_t k = 0; k < f.samples[i].size(); ++k) {
      if (k) os << ',';
      os << '[' << format_double(f.samples[i][k].real()) << ',' << format_double(f.samples[i][k].imag()) << ']';
    }
    os << ']';
  }
  os << "\n  ]\n}\n";
  return os.str();
}

namespace {

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw ParseError(std::string("missing numeric field '") + key + "'");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ParseError(std::string("field '") + key + "' is not finite");
  return v;
}

}  // namespace

TrajectoryFile parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("top level must be an object");
  TrajectoryFile f;
  if (!j.contains("dim") || !j.at("dim").is_number_integer()) throw ParseError("missing integer field 'dim'");
  f.dim = j.at("dim").get<int>();
  if (f.dim != 2 && f.dim != 4) throw ParseError("dim must be 2 or 4");
  f.t0 = number(j, "t0");
  f.dt = number(j, "dt");
  if (!j.contains("n") || !j.at("n").is_number_unsigned()) throw ParseError("missing non-negative integer field 'n'");
  const auto n = j.at("n").get<std::size_t>();
  if (j.contains("params")) f.params = j.at("params");
  if (!j.contains("samples") || !j.at("samples").is_array()) throw ParseError("missing array field 'samples'");
  const auto& s = j.at("samples");
  if (s.size() != n)
    throw ParseError("n = " + std::to_string(n) + " but samples has " + std::to_string(s.size()) + " entries");
  const auto entries = static_cast<std::size_t>(f.dim * f.dim);
  f.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = s[i];
    if (!row.is_array() || row.size() != entries)
      throw ParseError("sample " + std::to_string(i) + " must hold " + std::to_string(entries) + " entries");
    std::vector<cplx> m;
    m.reserve(entries);
    for (const auto& e : row) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw ParseError("sample " + std::to_string(i) + ": entries must be [re, im] pairs");
      const cplx v(e[0].get<double>(), e[1].get<double>());
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw ParseError("sample " + std::to_string(i) + " has a non-finite entry");
      m.push_back(v);
    }
    f.samples.push_back(std::move(m));
  }
  return f;
}

TrajectoryFile read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qmp::cli
