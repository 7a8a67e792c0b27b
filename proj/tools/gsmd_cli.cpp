// Command-line front end: run / sweep / check a config, or profile link functions.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gsmd/config.hpp"
#include "gsmd/error.hpp"
#include "gsmd/harness.hpp"
#include "gsmd/params.hpp"
#include "gsmd/profiler.hpp"

namespace fs = std::filesystem;
using namespace gsmd;

namespace {

std::vector<int> parse_dims(const std::string& text) {
  std::vector<int> dims;
  if (text.find(':') != std::string::npos) {
    std::vector<long long> parts;
    std::size_t start = 0;
    while (true) {
      const auto colon = text.find(':', start);
      parts.push_back(parse_int(text.substr(start, colon - start), "--dims"));
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
    if (parts.size() != 3 || parts[2] <= 0 || parts[1] < parts[0])
      throw ValidationError("--dims range must be first:last:step");
    for (long long n = parts[0]; n <= parts[1]; n += parts[2]) dims.push_back(static_cast<int>(n));
    return dims;
  }
  for (const auto& item : split_list(text)) dims.push_back(static_cast<int>(parse_int(item, "--dims")));
  if (dims.empty()) throw ValidationError("--dims is empty");
  return dims;
}

int run_spec(const std::string& path, ExecuteOptions opt, bool echo) {
  ExperimentSpec spec;
  try {
    spec = load_spec(path);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  if (echo) std::cout << render(spec) << "\n";
  ExecuteResult res;
  try {
    res = execute(spec, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  for (const auto& o : res.runs) {
    if (!o.error.empty()) {
      std::cout << o.name << ": ERROR " << o.error << "\n";
      continue;
    }
    std::cout << o.name << ": " << (o.passed() ? "ok" : "FAILED");
    for (const auto& c : o.checks) std::cout << " " << to_string(c.check) << "=" << (c.passed ? "pass" : "fail");
    for (const auto& s : o.slopes)
      std::cout << " slope[" << s.window.t_min << ":" << s.window.t_max << "]=" << format_double(s.slope);
    std::cout << "\n";
  }
  for (const auto& g : res.groups) {
    std::cout << "group " << g.name << " (" << g.members << " runs, median)";
    for (const auto& s : g.slopes)
      std::cout << " slope[" << s.window.t_min << ":" << s.window.t_max << "]=" << format_double(s.slope);
    std::cout << "\n";
  }
  if (!res.output_dir.empty()) std::cout << "wrote " << res.output_dir << "\n";
  return res.exit_code;
}

int run_profile(const ProfileOptions& opt, const std::string& out_dir) {
  ProfileResult res;
  try {
    res = profile(opt);
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  std::ostringstream csv;
  csv << "n,L0_hat,L1_hat,L0_tilde,L1_tilde,ratio\n";
  for (const auto& r : res.rows) {
    csv << r.n << ',' << cell(r.hat ? std::optional(r.hat->L0) : std::nullopt) << ','
        << cell(r.hat ? std::optional(r.hat->L1) : std::nullopt) << ','
        << cell(r.tilde ? std::optional(r.tilde->L0) : std::nullopt) << ','
        << cell(r.tilde ? std::optional(r.tilde->L1) : std::nullopt) << ',' << cell(r.ratio) << '\n';
  }
  nlohmann::json j = {{"objective", opt.objective},
                      {"samples", opt.samples},
                      {"seed", opt.seed},
                      {"sampling", res.sampling},
                      {"aggregation", res.aggregation}};
  if (res.fit) {
    j["a"] = res.fit->a;
    j["b"] = res.fit->b;
    j["residual"] = res.fit->residual;
  } else {
    j["a"] = j["b"] = j["residual"] = nullptr;
  }
  try {
    const fs::path dir = resolve_output_dir(out_dir);
    fs::create_directories(dir);
    std::ofstream(dir / "profile.csv") << csv.str();
    std::ofstream(dir / "profile.json") << j.dump(2) << "\n";
    std::cout << csv.str();
    if (res.fit) std::cout << "fit: a=" << format_double(res.fit->a) << " b=" << format_double(res.fit->b) << "\n";
    std::cout << "wrote " << dir.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mirror-descent optimizers under generalized smoothness"};
  app.require_subcommand(1);

  std::string spec_path;
  bool echo = false;
  auto* run = app.add_subcommand("run", "Execute every run of a config, one after another");
  run->add_option("spec", spec_path, "Config file")->required();
  run->add_flag("--echo", echo, "Print the config with defaults filled in");
  auto* sweep = app.add_subcommand("sweep", "Execute a config with runs spread over worker threads");
  sweep->add_option("spec", spec_path, "Config file")->required();
  sweep->add_flag("--echo", echo, "Print the config with defaults filled in");
  auto* check = app.add_subcommand("check", "Evaluate checks only; no trajectory files");
  check->add_option("spec", spec_path, "Config file")->required();
  check->add_flag("--echo", echo, "Print the config with defaults filled in");

  ProfileOptions popt;
  std::string dims = "6:99:3";
  std::string pair = "both";
  std::string out_dir = "profile";
  std::vector<std::string> params;
  auto* prof = app.add_subcommand("profile", "Estimate affine link functions empirically");
  prof->add_option("--objective", popt.objective, "Objective preset")->capture_default_str();
  prof->add_option("--dims", dims, "Dimensions: first:last:step or a comma list")->capture_default_str();
  prof->add_option("--samples", popt.samples, "Simplex points per dimension")->capture_default_str();
  prof->add_option("--seed", popt.seed, "Seed")->capture_default_str();
  prof->add_option("--pair", pair, "Norm pair")->check(CLI::IsMember({"euclidean", "one_infinity", "both"}))->capture_default_str();
  prof->add_option("--param", params, "Extra objective parameter key=value (repeatable)");
  prof->add_option("--out", out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfigError;
  }

  if (*run) return run_spec(spec_path, {false, true}, echo);
  if (*sweep) return run_spec(spec_path, {true, true}, echo);
  if (*check) return run_spec(spec_path, {true, false}, echo);

  try {
    popt.dims = parse_dims(dims);
    popt.euclidean = pair != "one_infinity";
    popt.one_infinity = pair != "euclidean";
    for (const auto& kv : params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ValidationError("--param expects key=value");
      popt.params[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
    }
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return run_profile(popt, out_dir);
}
