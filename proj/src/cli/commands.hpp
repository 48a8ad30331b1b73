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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cli/trajectory_file.hpp"
#include "json.hpp"
#include "qmp/dissipative_recon.hpp"

namespace qmp::cli {

namespace fs = std::filesystem;

/// Raised after the master report has been written.
class NoCpCandidate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// QMP_TOL if set and valid, else kDefaultTol. Throws ValidationError for junk.
double env_tolerance();

struct ScenarioOptions {
  std::string name;  // example1 | example2 | example3
  double J = 2.0;
  double omega = 1.0;
  double gamma = 0.2;
  std::optional<double> t_max;     // pi for example1/2, 10 for example3
  std::optional<std::size_t> steps;
  fs::path out = ".";
};

/// Smallest step count with rate * dt <= 0.01, rate = J, omega or 3J/2.
std::size_t default_steps(const ScenarioOptions& opt);

struct ScenarioResult {
  std::vector<fs::path> files;
  std::string note;
};

ScenarioResult cmd_scenario(const ScenarioOptions& opt);

/// Report for a joint file, or for a marginal pair. A lone marginal_a file picks
/// up its marginal_b sibling.
nlohmann::json cmd_check(const fs::path& file, const std::optional<fs::path>& partner, double tol);

/// Writes hamiltonian.json, pauli_coefficients.csv and unitary_report.json into
/// `out`. Throws ValidationError when the input is not unitary.
nlohmann::json cmd_reconstruct_unitary(const fs::path& file, const fs::path& out, double tol);

/// Writes master_report.json, hamiltonian.json and diagonal_frame.json into `out`.
/// Throws NoCpCandidate when no candidate passes the CP check.
nlohmann::json cmd_reconstruct_master(const fs::path& file, AnsatzStructure ansatz, const fs::path& out, double tol);

void cmd_measures(const fs::path& file, const fs::path& out, double tol);

/// Entry point of the qmp tool. Returns an ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qmp::cli
