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

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cli/commands.hpp"
#include "oracles.hpp"
#include "qmp/kinematics.hpp"

using namespace qmp;
using namespace qmp::cli;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("qmp_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

int run_tool(const std::string& args) {
  const std::string cmd = std::string(QMP_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

ScenarioOptions scenario(const std::string& name, const fs::path& out) {
  ScenarioOptions o;
  o.name = name;
  o.out = out;
  return o;
}

}  // namespace

TEST(TrajectoryFile, SerializationIsBitExact) {
  oracle::Rng rng(404);
  std::vector<Mat4> samples;
  for (int i = 0; i < 20; ++i) samples.push_back(rng.state<4>());
  samples[3](0, 1) = cplx(1e-300, -5e-324);
  samples[3](1, 0) = std::conj(samples[3](0, 1));
  const Trajectory<4> traj(0.1, 1.0 / 3.0, samples);
  const auto f = parse(serialize(to_file(traj, {{"tag", "x"}})));
  EXPECT_EQ(f.dim, 4);
  EXPECT_EQ(f.t0, 0.1);
  EXPECT_EQ(f.dt, 1.0 / 3.0);
  EXPECT_EQ(f.params.at("tag"), "x");
  const auto back = to_trajectory<4>(f, SampleCheck::hermitian, 1e-10);
  for (std::size_t i = 0; i < traj.size(); ++i)
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_EQ(std::bit_cast<std::uint64_t>(back[i](r, c).real()), std::bit_cast<std::uint64_t>(traj[i](r, c).real()));
        EXPECT_EQ(std::bit_cast<std::uint64_t>(back[i](r, c).imag()), std::bit_cast<std::uint64_t>(traj[i](r, c).imag()));
      }
}

TEST(TrajectoryFile, SchemaViolationsAreParseErrors) {
  const auto good = serialize(to_file(CoherentExchange(2.0).joint_trajectory(Grid{0.0, 0.1, 4})));
  EXPECT_NO_THROW(parse(good));
  EXPECT_THROW(parse("{not json"), ParseError);
  EXPECT_THROW(parse("[1, 2]"), ParseError);
  auto j = json::parse(good);
  j["n"] = 7;
  EXPECT_THROW(parse(j.dump()), ParseError);
  j = json::parse(good);
  j["dim"] = 3;
  EXPECT_THROW(parse(j.dump()), ParseError);
  j = json::parse(good);
  j["samples"][1].erase(0);
  EXPECT_THROW(parse(j.dump()), ParseError);
  j = json::parse(good);
  j["samples"][0][0] = json::array({1.0});
  EXPECT_THROW(parse(j.dump()), ParseError);
  j = json::parse(good);
  j.erase("dt");
  EXPECT_THROW(parse(j.dump()), ParseError);
}

TEST(TrajectoryFile, StrictAndLenientChecks) {
  const Mat4 h = oracle::pauli_product(1, 3);  // Hermitian, traceless, indefinite
  const Trajectory<4> traj(0.0, 0.1, {h, h, h});
  const auto f = to_file(traj);
  EXPECT_NO_THROW(to_trajectory<4>(f, SampleCheck::hermitian, 1e-10));
  EXPECT_THROW(to_trajectory<4>(f, SampleCheck::density, 1e-10), ValidationError);
  EXPECT_THROW(to_trajectory<2>(f, SampleCheck::hermitian, 1e-10), ValidationError);
  auto g = f;
  g.samples[1][1] += cplx(0.0, 0.5);
  EXPECT_THROW(to_trajectory<4>(g, SampleCheck::hermitian, 1e-10), ValidationError);
}

TEST(DefaultSteps, KeepsRateTimesStepBelowOnePercent) {
  auto o = scenario("example1", ".");
  EXPECT_EQ(default_steps(o), 629u);
  o.name = "example3";
  EXPECT_EQ(default_steps(o), 3000u);
  o.name = "example2";
  o.omega = 1.0;
  EXPECT_EQ(default_steps(o), 315u);
}

TEST(EnvTolerance, ReadsAndRejects) {
  ::unsetenv("QMP_TOL");
  EXPECT_EQ(env_tolerance(), kDefaultTol);
  ::setenv("QMP_TOL", "1e-7", 1);
  EXPECT_EQ(env_tolerance(), 1e-7);
  ::setenv("QMP_TOL", "abc", 1);
  EXPECT_THROW(env_tolerance(), ValidationError);
  ::setenv("QMP_TOL", "-1", 1);
  EXPECT_THROW(env_tolerance(), ValidationError);
  ::unsetenv("QMP_TOL");
}

TEST_F(CliTest, ScenarioWritesExpectedFiles) {
  auto o = scenario("example1", dir_);
  o.steps = 200;
  const auto r1 = cmd_scenario(o);
  ASSERT_EQ(r1.files.size(), 3u);
  for (const auto& f : r1.files) EXPECT_TRUE(fs::exists(f)) << f;
  const auto joint = to_trajectory<4>(read_file(dir_ / "example1_joint.json"), SampleCheck::density, 1e-10);
  const auto a = to_trajectory<2>(read_file(dir_ / "example1_marginal_a.json"), SampleCheck::density, 1e-10);
  EXPECT_EQ(joint.size(), 201u);
  EXPECT_NEAR(joint.t_end(), std::numbers::pi, 1e-12);
  for (std::size_t i = 0; i < joint.size(); ++i)
    EXPECT_LE(max_abs_diff(partial_trace(joint[i], Subsystem::B), a[i]), 1e-12);

  const auto r2 = cmd_scenario(scenario("example2", dir_));
  EXPECT_EQ(r2.files.size(), 2u);
  EXPECT_FALSE(r2.note.empty());
  EXPECT_FALSE(fs::exists(dir_ / "example2_joint.json"));
  EXPECT_EQ(read_file(dir_ / "example2_marginal_a.json").params.at("note"), r2.note);
}

TEST_F(CliTest, ScenarioIsDeterministic) {
  auto o = scenario("example3", dir_);
  o.steps = 50;
  cmd_scenario(o);
  const auto first = slurp(dir_ / "example3_joint.json");
  cmd_scenario(o);
  EXPECT_EQ(slurp(dir_ / "example3_joint.json"), first);
}

TEST_F(CliTest, CheckVerdicts) {
  cmd_scenario(scenario("example1", dir_));
  const auto r1 = cmd_check(dir_ / "example1_joint.json", std::nullopt, 1e-10);
  EXPECT_EQ(r1["unitarity"]["verdict"], "PASS");
  EXPECT_EQ(r1["window"]["verdict"], "EXISTS");

  cmd_scenario(scenario("example2", dir_));
  for (const auto* name : {"example2_marginal_a.json", "example2_marginal_b.json"}) {
    const auto r2 = cmd_check(dir_ / name, std::nullopt, 1e-10);
    EXPECT_EQ(r2["kind"], "marginals");
    EXPECT_EQ(r2["window"]["verdict"], "NONE");
    EXPECT_NEAR(r2["window"]["c_lo"].get<double>(), 0.707107, 1e-6);
    EXPECT_NEAR(r2["window"]["c_hi"].get<double>(), 0.292893, 1e-6);
  }

  auto o = scenario("example3", dir_);
  o.steps = 500;
  cmd_scenario(o);
  const auto r3 = cmd_check(dir_ / "example3_joint.json", std::nullopt, 1e-10);
  EXPECT_EQ(r3["unitarity"]["verdict"], "FAIL");
  EXPECT_GT(r3["unitarity"]["drift"]["k2"].get<double>(), 0.3);
}

TEST_F(CliTest, ReconstructUnitaryRecoversExchangeHamiltonian) {
  cmd_scenario(scenario("example1", dir_));
  const auto out = dir_ / "unitary";
  const auto rep = cmd_reconstruct_unitary(dir_ / "example1_joint.json", out, 1e-10);
  EXPECT_EQ(rep["verdict"], "ACCEPTED");
  std::string header;
  const auto rows = read_csv(out / "pauli_coefficients.csv", &header);
  EXPECT_EQ(header.substr(0, 12), "t,h01,h02,h0");
  ASSERT_EQ(rows.size(), 630u);
  for (std::size_t i = 1; i + 1 < rows.size(); ++i)
    for (int k = 1; k < 16; ++k) {
      const double want = (k == 5 || k == 10) ? -0.5 : 0.0;  // h11, h22
      EXPECT_NEAR(rows[i][k], want, 1e-5) << "k=" << k << " i=" << i;
    }
  const auto h = to_trajectory<4>(read_file(out / "hamiltonian.json"), SampleCheck::hermitian, 1e-10);
  EXPECT_EQ(h.size(), 630u);
}

TEST_F(CliTest, ReconstructUnitaryOfConstantTrajectoryIsZero) {
  const auto rho = oracle::Rng(8).state<4>();
  const Trajectory<4> traj(0.0, 0.01, std::vector<Mat4>(50, rho));
  write_atomic(dir_ / "const.json", serialize(to_file(traj)));
  cmd_reconstruct_unitary(dir_ / "const.json", dir_, 1e-10);
  const auto h = to_trajectory<4>(read_file(dir_ / "hamiltonian.json"), SampleCheck::hermitian, 1e-10);
  for (const auto& m : h.samples()) EXPECT_LE(m.frobenius_norm(), 1e-12);
}

TEST_F(CliTest, ReconstructUnitaryRejectsDampedTrajectory) {
  auto o = scenario("example3", dir_);
  o.steps = 300;
  cmd_scenario(o);
  EXPECT_THROW(cmd_reconstruct_unitary(dir_ / "example3_joint.json", dir_ / "u", 1e-10), ValidationError);
  const auto rep = read_json(dir_ / "u" / "unitary_report.json");
  EXPECT_EQ(rep["verdict"], "REJECTED");
  EXPECT_GT(rep["unitarity_drift"]["k2"].get<double>(), 0.3);
}

TEST_F(CliTest, ReconstructMasterForDampedExchange) {
  auto o = scenario("example3", dir_);
  o.steps = 10000;
  cmd_scenario(o);
  const auto rep = cmd_reconstruct_master(dir_ / "example3_joint.json", AnsatzStructure::unital_diagonal, dir_, 1e-10);
  EXPECT_EQ(rep["verdict"], "CP_VALID_FOUND");
  bool single = false, zero = false;
  for (const auto& c : rep["candidates"]) {
    if (c["cp"] == "VALID" && !c["roundtrip"].is_null()) {
      const auto& e = c["kossakowski"]["entries"];
      if (e.size() == 1 && std::abs(e[0][2].get<double>() - 0.1) < 1e-6 &&
          c["roundtrip"]["max_frobenius"].get<double>() < 1e-4)
        single = true;
    }
    if (c["name"] == "zero-completion") {
      EXPECT_EQ(c["cp"], "INVALID");
      EXPECT_NEAR(c["kossakowski"]["min_eigenvalue"].get<double>(), -0.025, 1e-6);
      zero = true;
    }
  }
  EXPECT_TRUE(single);
  EXPECT_TRUE(zero);
  EXPECT_TRUE(fs::exists(dir_ / "master_report.json"));
  EXPECT_TRUE(fs::exists(dir_ / "diagonal_frame.json"));
  EXPECT_NEAR(rep["hamiltonian"]["mean"]["h11"].get<double>(), -0.75, 1e-5);
  EXPECT_NEAR(rep["hamiltonian"]["mean"]["h22"].get<double>(), 0.75, 1e-5);
}

TEST_F(CliTest, ReconstructMasterOfUnitaryTrajectoryIsTrivial) {
  auto o = scenario("example1", dir_);
  o.steps = 1500;
  cmd_scenario(o);
  const auto rep = cmd_reconstruct_master(dir_ / "example1_joint.json", AnsatzStructure::unital_diagonal, dir_, 1e-10);
  ASSERT_FALSE(rep["best"].is_null());
  for (const auto& c : rep["candidates"])
    if (c["name"] == rep["best"]) {
      for (const auto& e : c["d_prime"]) EXPECT_LE(std::abs(e[2].get<double>()), 1e-6);
      EXPECT_LT(c["roundtrip"]["max_frobenius"].get<double>(), 1e-6);
    }
}

TEST_F(CliTest, MeasuresCsv) {
  auto o = scenario("example3", dir_);
  o.t_max = 2.0;
  cmd_scenario(o);
  cmd_measures(dir_ / "example3_joint.json", dir_ / "m.csv", 1e-10);
  std::string header;
  const auto rows = read_csv(dir_ / "m.csv", &header);
  EXPECT_EQ(header, "t,purity_AB,purity_A,purity_B,negativity");
  ASSERT_FALSE(rows.empty());
  EXPECT_NEAR(rows[0][4], 0.0, 1e-12);
  EXPECT_NEAR(rows[0][2], 1.0, 1e-12);
  EXPECT_NEAR(rows[0][3], 1.0, 1e-12);
  double peak = 0.0;
  for (const auto& r : rows) peak = std::max(peak, r[4]);
  EXPECT_GT(peak, 0.05);

  cmd_scenario(scenario("example1", dir_));
  cmd_measures(dir_ / "example1_joint.json", dir_ / "m1.csv", 1e-10);
  for (const auto& r : read_csv(dir_ / "m1.csv")) EXPECT_NEAR(r[1], read_csv(dir_ / "m1.csv")[0][1], 1e-12);
}

TEST_F(CliTest, MeasuresOfProductTrajectoryHaveZeroNegativity) {
  oracle::Rng rng(31);
  std::vector<Mat4> s;
  for (int i = 0; i < 10; ++i) s.push_back(tensor(rng.state<2>(), rng.state<2>()));
  write_atomic(dir_ / "p.json", serialize(to_file(Trajectory<4>(0.0, 0.1, s))));
  cmd_measures(dir_ / "p.json", dir_ / "p.csv", 1e-10);
  for (const auto& r : read_csv(dir_ / "p.csv")) EXPECT_EQ(r[4], 0.0);
}

TEST_F(CliTest, ExitCodes) {
  const std::string d = dir_.string();
  EXPECT_EQ(run_tool("scenario example1 --steps 100 --out " + d), 0);
  EXPECT_EQ(run_tool("check " + d + "/example1_joint.json"), 0);
  EXPECT_EQ(run_tool("reconstruct unitary " + d + "/example1_joint.json --out " + d + "/u"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "u" / "unitary_report.json"));
  EXPECT_EQ(run_tool("measures " + d + "/example1_joint.json --out " + d + "/m.csv"), 0);

  EXPECT_EQ(run_tool("scenario example3 --steps 100 --out " + d), 0);
  EXPECT_EQ(run_tool("reconstruct unitary " + d + "/example3_joint.json --out " + d + "/u3"), 2);
  EXPECT_EQ(run_tool("scenario example1 --J -1 --out " + d), 2);
  EXPECT_EQ(run_tool("check " + d + "/example1_joint.json --tol -1"), 2);
  EXPECT_EQ(run_tool("measures " + d + "/example1_marginal_a.json --out " + d + "/x.csv"), 2);

  write_atomic(dir_ / "broken.json", "{\"dim\": 4, ");
  EXPECT_EQ(run_tool("check " + d + "/broken.json"), 4);
  EXPECT_EQ(run_tool("measures " + d + "/missing.json --out " + d + "/x.csv"), 4);
  EXPECT_EQ(run_tool("scenario example9 --out " + d), 4);
  EXPECT_EQ(run_tool("reconstruct sideways " + d + "/example1_joint.json --out " + d), 4);
  EXPECT_EQ(run_tool("--help"), 0);

  EXPECT_EQ(run_tool("check " + d + "/example1_joint.json"), 0);
  EXPECT_EQ(std::system(("QMP_TOL=bad " + std::string(QMP_TOOL_PATH) + " check " + d +
                         "/example1_joint.json > /dev/null 2>&1")
                            .c_str()) >>
                8,
            2);
}

TEST_F(CliTest, ExitCodeWithoutCpCandidate) {
  // One coherence decays while two others that pin it stay constant: every
  // diagonal dissipator reproducing this needs a negative rate.
  std::vector<Mat4> s;
  const double dt = 0.002;
  for (int i = 0; i <= 500; ++i) {
    const double a = 0.15 * std::exp(-dt * i);
    s.push_back((Mat4::identity() + oracle::pauli_product(0, 3) * a + oracle::pauli_product(3, 0) * 0.3 +
                 oracle::pauli_product(3, 3) * 0.2) *
                0.25);
  }
  write_atomic(dir_ / "noncp.json", serialize(to_file(Trajectory<4>(0.0, dt, s))));
  EXPECT_EQ(run_tool("reconstruct master " + dir_.string() + "/noncp.json --out " + dir_.string()), 3);
  const auto rep = read_json(dir_ / "master_report.json");
  EXPECT_EQ(rep["verdict"], "NO_CP_VALID");
  EXPECT_TRUE(rep["best"].is_null());
  EXPECT_FALSE(rep["candidates"].empty());
}
