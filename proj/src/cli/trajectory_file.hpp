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

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmp/qcore.hpp"

namespace qmp::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kNoCpCandidate = 3, kParse = 4 };

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {dim, t0, dt, n, params, samples}; samples[i] holds dim*dim [re, im] pairs, row-major.
struct TrajectoryFile {
  int dim = 0;
  double t0 = 0.0;
  double dt = 0.0;
  nlohmann::json params = nlohmann::json::object();
  std::vector<std::vector<cplx>> samples;
};

enum class SampleCheck { density, hermitian };

template <std::size_t N>
TrajectoryFile to_file(const Trajectory<N>& traj, nlohmann::json params = nlohmann::json::object());

/// Throws ValidationError for a dimension mismatch or a sample that fails `check`.
template <std::size_t N>
Trajectory<N> to_trajectory(const TrajectoryFile& f, SampleCheck check, double tol);

/// One sample per line so files diff well. Doubles use the shortest text that
/// parses back to the same bits.
std::string serialize(const TrajectoryFile& f);

/// Throws ParseError on malformed text or schema violations.
TrajectoryFile parse(const std::string& text);

TrajectoryFile read_file(const std::filesystem::path& path);

/// Writes through a temporary in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace qmp::cli
