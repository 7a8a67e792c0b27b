#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "gsmd/error.hpp"
#include "gsmd/harness.hpp"

using namespace gsmd;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[run.a]
algorithm = md
objective = rank_one_quadratic
objective.n = 5
geometry = entropy_simplex
T = 100
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("gsmd_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int cli(const std::string& args, const fs::path& root) {
  const std::string cmd = std::string(kOutputRootEnv) + "='" + root.string() + "' '" + GSMD_CLI_PATH + "' " + args +
                          " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("minimal spec gets defaults") {
  const ExperimentSpec s = parse_spec(kMinimal);
  REQUIRE(s.runs.size() == 1);
  const RunSpec& r = s.runs[0];
  CHECK(r.name == "a");
  CHECK(r.group.empty());
  CHECK(r.algorithm == "md");
  CHECK(r.T == 100);
  CHECK_FALSE(r.eta);
  CHECK(r.link == "analytic");
  CHECK(s.dir == "out");
  CHECK(s.formats == std::vector<std::string>{"csv", "json"});
  CHECK(render(s).find("eta = paper_default") != std::string::npos);
}

TEST_CASE("eta above the cap is rejected") {
  CHECK_THROWS_AS(parse_spec(std::string(kMinimal) + "eta = 2\n"), ValidationError);
  CHECK_NOTHROW(parse_spec(std::string(kMinimal) + "eta = 0.5\n"));
}

TEST_CASE("seed range expands into a group") {
  const ExperimentSpec s = parse_spec(R"(
[run.s]
algorithm = smd
objective = rank_one_quadratic
objective.n = 10
geometry = entropy_simplex
T = 50
seed = 0..19
noise.sigma_coeffs = 0.5, 0.5
)");
  REQUIRE(s.runs.size() == 20);
  for (int k = 0; k < 20; ++k) {
    const RunSpec& r = s.runs[static_cast<std::size_t>(k)];
    CHECK(r.name == "s@" + std::to_string(k));
    CHECK(r.group == "s");
    CHECK(r.seed == static_cast<std::uint64_t>(k));
    RunSpec same = r;
    same.seed = 0;
    same.name = s.runs[0].name;
    CHECK(same == s.runs[0]);
  }
}

TEST_CASE("parse errors carry line and key") {
  try {
    parse_spec("[run.a]\nalgorithm = md\nbogus = 1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.key() == "bogus");
  }
  try {
    parse_spec("[experiment]\ndir = a\ndir = b\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_spec("[run.a]\nalgorithm = md\n"), ParseError);
  CHECK_THROWS_AS(parse_spec("[nonsense]\n"), ParseError);
  CHECK_THROWS_AS(parse_spec("[run.a\n"), ParseError);
}

TEST_CASE("semantic validation") {
  // noise on a deterministic method
  CHECK_THROWS_AS(parse_spec(std::string(kMinimal) + "noise.sigma_coeffs = 1\n"), ValidationError);
  // e_seq needs an amd run
  CHECK_THROWS_AS(parse_spec(std::string("[experiment]\nchecks = e_seq\n") + kMinimal), ValidationError);
  CHECK_THROWS_AS(parse_spec(std::string(kMinimal) + "geometry.radius = 1\n"), ValidationError);
}

TEST_CASE("render round-trips") {
  const ExperimentSpec s = parse_spec(R"(
# comment
[experiment]
checks = grad_bound, theorem_bound, self_bounding
formats = json
dir = some/where
slope_windows = 10:100, 5:50

[run.a]
algorithm = omd
objective = logistic_kernel
objective.n = 4
objective.w_seed = 3
geometry = euclidean_ball
geometry.radius = 1.5
geometry.center = 0.1, 0, 0, -0.1
T = 30
link = affine
link.L0 = 0.25
link.L1 = 3

[run.b]
algorithm = smd
objective = rank_one_quadratic
objective.n = 6
geometry = entropy_simplex
T = 20
seed = 3..5
noise.sigma_coeffs = 0.5, 0.5
noise.shape = coordinate_pair
)");
  CHECK(parse_spec(render(s)) == s);
  CHECK(render(parse_spec(render(s))) == render(s));
}

TEST_CASE("slope of synthetic curves") {
  std::vector<long long> t;
  std::vector<double> a, b;
  for (long long k = 1; k <= 1000; k = k * 11 / 10 + 1) {
    t.push_back(k);
    a.push_back(7.0 / static_cast<double>(k));
    b.push_back(3.0 / static_cast<double>(k * k));
  }
  CHECK(slope_of_curve("x", t, a, {1, 1000}).slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(slope_of_curve("x", t, b, {1, 1000}).slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(slope_of_curve("x", t, b, {1, 1000}).r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(slope_of_curve("x", t, a, {2, 4}), DegenerateError);
  std::vector<double> floor(t.size(), 1e-16);
  CHECK_THROWS_AS(slope_of_curve("x", t, floor, {1, 1000}), DegenerateError);
}

TEST_CASE("empty spec writes nothing") {
  TempDir tmp("empty");
  ExperimentSpec s = parse_spec("[experiment]\ndir = " + (tmp.path / "out").string() + "\n");
  const ExecuteResult r = execute(s);
  CHECK(r.exit_code == kExitOk);
  CHECK(r.output_dir.empty());
  CHECK_FALSE(fs::exists(tmp.path / "out"));
}

TEST_CASE("prox_oracle-only spec passes") {
  TempDir tmp("prox");
  std::string text = "[experiment]\nchecks = prox_oracle\nformats = json\ndir = " + tmp.path.string() + "\n";
  for (int n : {2, 3, 5}) {
    text += "[run.p" + std::to_string(n) +
            "]\nalgorithm = md\nobjective = rank_one_quadratic\ngeometry = entropy_simplex\nT = 1\nobjective.n = " +
            std::to_string(n) + "\n";
  }
  const ExecuteResult r = execute(parse_spec(text));
  CHECK(r.exit_code == kExitOk);
  for (int n : {2, 3, 5}) {
    const auto j = nlohmann::json::parse(slurp(tmp.path / ("p" + std::to_string(n) + ".json")));
    CHECK(j["checks"]["prox_oracle"]["passed"] == true);
    CHECK(j["checks"]["prox_oracle"]["max_deviation"].get<double>() < 1e-8);
  }
  CHECK(fs::exists(tmp.path / "manifest.json"));
  CHECK_FALSE(fs::exists(tmp.path / "p2.csv"));
}

TEST_CASE("md theorem bound is recorded") {
  TempDir tmp("md");
  const ExecuteResult r = execute(parse_spec("[experiment]\nchecks = theorem_bound\nslope_windows = 10:300\ndir = " +
                                             tmp.path.string() + "\n" + kMinimal));
  CHECK(r.exit_code == kExitOk);
  const auto j = nlohmann::json::parse(slurp(tmp.path / "a.json"));
  const auto& tb = j["checks"]["theorem_bound"];
  CHECK(tb["passed"] == true);
  CHECK(tb["min_slack"].get<double>() >= -tb["fstar_gap"].get<double>());
  CHECK(j["constants"]["eta"].get<double>() == doctest::Approx(1.0));
  CHECK(j["slopes"].size() == 1);

  const std::string csv = slurp(tmp.path / "a.csv");
  CHECK(csv.rfind("t,f_gap,avg_gap,grad_dual_norm,aux_grad_dual_norm,step,move,e_t,bound\n", 0) == 0);
  // md has no aux gradient or e_t
  std::istringstream lines(csv);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(first.rfind("1,", 0) == 0);
  CHECK(first.find(",NA,") != std::string::npos);
}

TEST_CASE("execution is deterministic") {
  TempDir tmp("det");
  const std::string text = "[experiment]\nchecks = grad_bound, theorem_bound\n" + std::string(R"(
[run.m]
algorithm = mp
objective = logistic_regression
objective.n = 6
objective.w_seed = 1
geometry = entropy_simplex
T = 200

[run.s]
algorithm = smd
objective = rank_one_quadratic
objective.n = 10
geometry = entropy_simplex
T = 300
seed = 0..3
noise.sigma_coeffs = 0.5, 0.5
)");
  ExperimentSpec a = parse_spec(text + "");
  a.dir = (tmp.path / "one").string();
  ExperimentSpec b = a;
  b.dir = (tmp.path / "two").string();
  const ExecuteResult ra = execute(a, {true, true});
  const ExecuteResult rb = execute(b, {false, true});
  CHECK(ra.exit_code == rb.exit_code);
  for (const char* f : {"m.csv", "s@0.csv", "s@3.csv", "group_s.csv", "m.json", "s@2.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(tmp.path / "one" / f));
    CHECK(slurp(tmp.path / "one" / f) == slurp(tmp.path / "two" / f));
  }
}

TEST_CASE("output root applies to relative directories") {
  ::setenv(kOutputRootEnv, "/tmp/root", 1);
  CHECK(resolve_output_dir("out/x") == "/tmp/root/out/x");
  CHECK(resolve_output_dir("/abs") == "/abs");
  ::unsetenv(kOutputRootEnv);
  CHECK(resolve_output_dir("out/x") == "out/x");
}

TEST_CASE("cli exit codes") {
  TempDir tmp("cli");
  const fs::path ok = write_file(tmp.path / "ok.cfg", "[experiment]\nchecks = theorem_bound\ndir = res\n" + std::string(kMinimal));
  CHECK(cli("run '" + ok.string() + "'", tmp.path) == kExitOk);
  CHECK(fs::exists(tmp.path / "res" / "a.csv"));
  CHECK(cli("sweep '" + ok.string() + "'", tmp.path) == kExitOk);

  fs::remove_all(tmp.path / "res");
  CHECK(cli("check '" + ok.string() + "'", tmp.path) == kExitOk);
  CHECK(fs::exists(tmp.path / "res" / "a.json"));
  CHECK_FALSE(fs::exists(tmp.path / "res" / "a.csv"));

  // the accelerated bound as stated is violated on this problem
  const fs::path amd = write_file(tmp.path / "amd.cfg", R"([experiment]
checks = theorem_bound
dir = amd
[run.amd]
algorithm = amd
objective = rank_one_quadratic
objective.n = 20
geometry = entropy_simplex
T = 50
)");
  CHECK(cli("run '" + amd.string() + "'", tmp.path) == kExitCheckFailed);

  const fs::path bad = write_file(tmp.path / "bad.cfg", std::string(kMinimal) + "eta = 5\n");
  CHECK(cli("run '" + bad.string() + "'", tmp.path) == kExitConfigError);
  CHECK(cli("run '" + (tmp.path / "missing.cfg").string() + "'", tmp.path) == kExitConfigError);
  CHECK(cli("frobnicate", tmp.path) == kExitConfigError);

  write_file(tmp.path / "blocker", "x");
  const fs::path io = write_file(tmp.path / "io.cfg", "[experiment]\ndir = blocker/sub\n" + std::string(kMinimal));
  CHECK(cli("run '" + io.string() + "'", tmp.path) == kExitRuntimeError);

  CHECK(cli("profile --objective rank_one_quadratic --dims 4,6,8 --samples 5 --out prof", tmp.path) == kExitOk);
  const std::string csv = slurp(tmp.path / "prof" / "profile.csv");
  CHECK(csv.rfind("n,L0_hat,L1_hat,L0_tilde,L1_tilde,ratio\n4,", 0) == 0);
  std::istringstream rows(csv);
  std::string line;
  std::getline(rows, line);
  std::getline(rows, line);
  std::vector<double> cells;
  std::istringstream cs(line);
  for (std::string c; std::getline(cs, c, ',');) cells.push_back(std::stod(c));
  REQUIRE(cells.size() == 6);
  CHECK(cells[1] == doctest::Approx(3.0));
  CHECK(cells[2] == 0.0);
  CHECK(cells[3] == doctest::Approx(1.0));
  CHECK(cells[5] == doctest::Approx(1.0 / 3.0));
  const auto j = nlohmann::json::parse(slurp(tmp.path / "prof" / "profile.json"));
  CHECK(j["b"].get<double>() > 0.0);
  CHECK(cli("profile --dims 1", tmp.path) == kExitConfigError);
}
