#include "gsmd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gsmd/error.hpp"
#include "gsmd/params.hpp"
#include "gsmd/prox_oracle.hpp"
#include "gsmd/rng.hpp"
#include "gsmd/smoothness_checks.hpp"
#include "gsmd/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gsmd {

namespace {

constexpr double kSlopeFloor = 1e-14;
constexpr int kSelfBoundingPoints = 1000;
constexpr int kProxPairs = 200;
constexpr double kProxTol = 1e-8;
constexpr int kLocalSmoothTrials = 1000;

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : "NA"; }
std::string cell(const std::optional<double>& v) { return v ? cell(*v) : "NA"; }

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json slope_json(const SlopeReport& s) {
  return {{"algorithm", s.algorithm},
          {"window", {s.window.t_min, s.window.t_max}},
          {"slope", num(s.slope)},
          {"intercept", num(s.intercept)},
          {"r_squared", num(s.r_squared)},
          {"points", s.points}};
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

CheckOutcome tally_check(Check c, const RunRecord& rec) {
  const InvariantTally& t = rec.invariants;
  CheckOutcome out{c, true, json::object()};
  switch (c) {
    case Check::grad_bound:
      out.passed = t.grad_bound_violations == 0 && t.aux_grad_violations == 0;
      out.detail = {{"violations", t.grad_bound_violations},
                    {"aux_violations", t.aux_grad_violations},
                    {"max_ratio", num(t.max_grad_ratio)},
                    {"max_aux_ratio", num(t.max_aux_grad_ratio)}};
      if (rec.algorithm == Algorithm::omd) {
        out.passed = out.passed && t.stability_violations == 0;
        out.detail["stability_violations"] = t.stability_violations;
        out.detail["max_stability_ratio"] = num(t.max_stability_ratio);
      }
      break;
    case Check::descent:
      out.passed = t.descent_violations == 0;
      out.detail = {{"violations", t.descent_violations}, {"max_increase", num(t.max_descent_increase)}};
      break;
    case Check::e_seq:
      out.passed = t.e_seq_violations == 0;
      out.detail = {{"violations", t.e_seq_violations}, {"max_ratio", num(t.max_e_ratio)}};
      break;
    case Check::theorem_bound:
      out.passed = t.bound_violations == 0;
      out.detail = {{"violations", t.bound_violations},
                    {"min_slack", num(t.min_bound_slack)},
                    {"fstar_gap", num(rec.constants.fstar_gap)}};
      break;
    default:
      break;
  }
  out.detail["steps"] = t.steps;
  return out;
}

std::string fstar_key(const RunSpec& r) {
  std::ostringstream k;
  k << r.objective;
  for (const auto& [a, b] : r.objective_params) k << ';' << a << '=' << b;
  k << '|' << r.geometry << '|' << (r.radius ? format_double(*r.radius) : "");
  for (double c : r.center) k << ',' << format_double(c);
  return k.str();
}

}  // namespace

bool RunOutcome::passed() const {
  return error.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.passed; });
}

SlopeReport slope_of_curve(const std::string& algorithm, const std::vector<long long>& t,
                           const std::vector<double>& gap, SlopeWindow window) {
  std::vector<double> lx, ly;
  int in_window = 0;
  for (std::size_t i = 0; i < t.size() && i < gap.size(); ++i) {
    if (t[i] < window.t_min || t[i] > window.t_max) continue;
    ++in_window;
    if (!(gap[i] > kSlopeFloor)) continue;
    lx.push_back(std::log(static_cast<double>(t[i])));
    ly.push_back(std::log(gap[i]));
  }
  if (lx.size() < 5) {
    throw DegenerateError("window " + std::to_string(window.t_min) + ":" + std::to_string(window.t_max) + " has " +
                          std::to_string(lx.size()) + " of " + std::to_string(in_window) +
                          " checkpoints above the 1e-14 floor; need 5");
  }
  const LineFit f = linear_fit(lx, ly);
  return {algorithm, window, f.slope, f.intercept, f.r_squared, static_cast<int>(lx.size())};
}

SlopeReport slope(const RunRecord& record, SlopeWindow window) {
  std::vector<long long> t;
  std::vector<double> g;
  for (const auto& r : record.records) {
    t.push_back(r.t);
    g.push_back(theorem_gap(record.algorithm, r));
  }
  return slope_of_curve(to_string(record.algorithm), t, g, window);
}

void write_run_csv(std::ostream& out, const RunRecord& rec) {
  out << "t,f_gap,avg_gap,grad_dual_norm,aux_grad_dual_norm,step,move,e_t,bound\n";
  for (std::size_t i = 0; i < rec.records.size(); ++i) {
    const auto& r = rec.records[i];
    const double bound = i < rec.bound_curve.size() ? rec.bound_curve[i] : std::nan("");
    out << r.t << ',' << cell(r.f_gap) << ',' << cell(r.avg_gap) << ',' << cell(r.grad_dual_norm) << ','
        << cell(r.aux_grad_dual_norm) << ',' << cell(r.step) << ',' << cell(r.move) << ',' << cell(r.e_t) << ','
        << cell(bound) << '\n';
  }
}

RunOutcome evaluate_run(const RunSpec& spec, const std::vector<Check>& checks,
                        const std::vector<SlopeWindow>& windows, const std::optional<ReferenceOptimum>& fstar) {
  RunOutcome out;
  out.name = spec.name;
  out.group = spec.group;
  RunConfig cfg = build_run_config(spec);
  cfg.fstar = fstar;
  out.record = run(cfg);
  const RunRecord& rec = *out.record;
  const RunConstants& k = rec.constants;

  for (Check c : checks) {
    if (!check_applies(c, rec.algorithm)) continue;
    switch (c) {
      case Check::self_bounding: {
        Rng rng(derive_seed(spec.seed, 1));
        std::vector<Vector> pts;
        for (int i = 0; i < kSelfBoundingPoints; ++i) pts.push_back(sample_domain_point(cfg.geometry.domain(), rng));
        const auto inf = cfg.objective.ambient_infimum();
        const double fs = inf ? *inf : k.fstar;
        const auto rep = check_self_bounding(cfg.objective, cfg.geometry.norm_pair(), cfg.link, pts, fs);
        out.checks.push_back({c, rep.violations.empty(),
                              {{"points", pts.size()},
                               {"violations", rep.violations.size()},
                               {"worst_relative_margin", num(rep.worst_relative_margin)},
                               {"fstar", num(fs)},
                               {"fstar_source", inf ? "ambient_infimum" : "reference_minimum"}}});
        break;
      }
      case Check::prox_oracle: {
        const auto rep = compare_prox_to_oracle_serial(cfg.geometry, kProxPairs, derive_seed(spec.seed, 2));
        out.checks.push_back({c, rep.max_deviation <= kProxTol,
                              {{"pairs", rep.pairs}, {"max_deviation", num(rep.max_deviation)}, {"tolerance", kProxTol}}});
        break;
      }
      case Check::local_smooth: {
        if (k.G == 0.0) {
          out.checks.push_back({c, true, {{"note", "G = 0, nothing to sample"}}});
          break;
        }
        try {
          const auto rep = check_local_smooth(cfg.objective, cfg.geometry, cfg.link, cfg.geometry.argmin_psi(), k.G,
                                              kLocalSmoothTrials, derive_seed(spec.seed, 3));
          out.checks.push_back({c, rep.violations() == 0,
                                {{"pairs", rep.pairs_checked},
                                 {"lipschitz_violations", rep.lipschitz_violations},
                                 {"quadratic_violations", rep.quadratic_violations},
                                 {"radius", num(rep.radius)},
                                 {"max_lipschitz_ratio", num(rep.max_lipschitz_ratio)},
                                 {"coverage", num(rep.coverage)}}});
        } catch (const DomainError& e) {
          out.checks.push_back({c, false, {{"error", e.what()}}});
        }
        break;
      }
      default:
        out.checks.push_back(tally_check(c, rec));
    }
  }

  if (!rec.terminated_at_optimum) {
    for (const auto& w : windows) {
      try {
        out.slopes.push_back(slope(rec, w));
      } catch (const DegenerateError& e) {
        out.slope_notes.push_back({{"window", {w.t_min, w.t_max}}, {"truncated", true}, {"reason", e.what()}});
      }
    }
  }
  return out;
}

json run_summary(const RunSpec& spec, const RunOutcome& o) {
  json j;
  j["name"] = o.name;
  j["group"] = o.group.empty() ? json(nullptr) : json(o.group);
  j["config"] = {{"algorithm", spec.algorithm},
                 {"T", spec.T},
                 {"eta", spec.eta ? json(*spec.eta) : json("paper_default")},
                 {"seed", spec.seed},
                 {"objective", spec.objective},
                 {"objective_params", spec.objective_params},
                 {"geometry", spec.geometry},
                 {"link", spec.link},
                 {"link_params", spec.link_params}};
  if (!spec.sigma_coeffs.empty()) {
    j["config"]["noise"] = {{"sigma_coeffs", spec.sigma_coeffs}, {"shape", spec.noise_shape}};
  }
  if (!o.error.empty()) {
    j["error"] = o.error;
    j["passed"] = false;
    return j;
  }
  const RunRecord& rec = *o.record;
  const RunConstants& k = rec.constants;
  j["rng_algorithm"] = rec.rng_algorithm;
  j["terminated_at_optimum"] = rec.terminated_at_optimum;
  json c = {{"fstar", num(k.fstar)}, {"fstar_gap", num(k.fstar_gap)}, {"fstar_method", k.fstar_method},
            {"F", num(k.F)},         {"G", num(k.G)},                 {"L", num(k.L)},
            {"factor", num(k.factor)}, {"D_sq", num(k.D_sq)}};
  if (rec.algorithm == Algorithm::amd) {
    c["eta_base"] = num(k.eta);
    c["tau"] = k.tau;
  } else if (rec.algorithm != Algorithm::smd) {
    c["eta"] = num(k.eta);
  }
  j["constants"] = c;
  const InvariantTally& t = rec.invariants;
  j["invariants"] = {{"steps", t.steps},
                     {"grad_bound_violations", t.grad_bound_violations},
                     {"max_grad_ratio", num(t.max_grad_ratio)},
                     {"aux_grad_violations", t.aux_grad_violations},
                     {"max_aux_grad_ratio", num(t.max_aux_grad_ratio)},
                     {"descent_violations", t.descent_violations},
                     {"max_descent_increase", num(t.max_descent_increase)},
                     {"e_seq_violations", t.e_seq_violations},
                     {"max_e_ratio", num(t.max_e_ratio)},
                     {"stability_violations", t.stability_violations},
                     {"max_stability_ratio", num(t.max_stability_ratio)},
                     {"bound_violations", t.bound_violations},
                     {"min_bound_slack", num(t.min_bound_slack)},
                     {"noise_samples", t.noise_samples},
                     {"max_noise_ratio", num(t.max_noise_ratio)}};
  if (!rec.records.empty()) {
    const auto& last = rec.records.back();
    j["final"] = {{"t", last.t}, {"f_gap", num(last.f_gap)}, {"avg_gap", last.avg_gap ? num(*last.avg_gap) : json(nullptr)}};
  }
  json checks = json::object();
  for (const auto& ch : o.checks) {
    json d = ch.detail;
    d["passed"] = ch.passed;
    checks[to_string(ch.check)] = d;
  }
  j["checks"] = checks;
  json slopes = json::array();
  for (const auto& s : o.slopes) slopes.push_back(slope_json(s));
  j["slopes"] = slopes;
  j["slope_notes"] = o.slope_notes;
  j["passed"] = o.passed();
  return j;
}

std::string resolve_output_dir(const std::string& dir) {
  const char* root = std::getenv(kOutputRootEnv);
  if (!root || !*root || fs::path(dir).is_absolute()) return dir;
  return (fs::path(root) / dir).string();
}

ExecuteResult execute(const ExperimentSpec& spec, const ExecuteOptions& opt) {
  ExecuteResult result;
  if (spec.runs.empty()) return result;

  const int n = static_cast<int>(spec.runs.size());
  result.runs.resize(spec.runs.size());

  // Reference optima are shared by runs on the same problem, so solve each once.
  std::map<std::string, std::optional<ReferenceOptimum>> refs;
  std::map<std::string, std::string> ref_errors;
  for (const auto& r : spec.runs) {
    const std::string key = fstar_key(r);
    if (refs.count(key) || ref_errors.count(key)) continue;
    try {
      const Objective obj = build_objective(r);
      refs[key] = reference_fstar(obj, build_geometry(r, obj.dim()));
    } catch (const std::exception& e) {
      ref_errors[key] = e.what();
    }
  }

  auto one = [&](int i) {
    const RunSpec& r = spec.runs[static_cast<std::size_t>(i)];
    RunOutcome& o = result.runs[static_cast<std::size_t>(i)];
    const std::string key = fstar_key(r);
    try {
      if (auto it = ref_errors.find(key); it != ref_errors.end()) throw ConvergenceError(it->second);
      o = evaluate_run(r, spec.checks, spec.slope_windows, refs.at(key));
    } catch (const std::exception& e) {
      o = RunOutcome{};
      o.name = r.name;
      o.group = r.group;
      o.error = e.what();
    }
  };
  if (opt.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) one(i);
  } else {
    for (int i = 0; i < n; ++i) one(i);
  }

  // seed groups: median of the rate gap at each shared checkpoint
  std::vector<std::string> group_order;
  for (const auto& r : spec.runs)
    if (!r.group.empty() && std::find(group_order.begin(), group_order.end(), r.group) == group_order.end())
      group_order.push_back(r.group);
  for (const auto& g : group_order) {
    GroupOutcome go;
    go.name = g;
    std::vector<const RunRecord*> members;
    for (std::size_t i = 0; i < spec.runs.size(); ++i) {
      if (spec.runs[i].group != g) continue;
      go.algorithm = spec.runs[i].algorithm;
      if (result.runs[i].record && !result.runs[i].record->terminated_at_optimum)
        members.push_back(&*result.runs[i].record);
    }
    go.members = static_cast<int>(members.size());
    if (!members.empty()) {
      const std::size_t len = members.front()->records.size();
      for (std::size_t j = 0; j < len; ++j) {
        std::vector<double> gaps;
        for (const RunRecord* m : members) gaps.push_back(theorem_gap(m->algorithm, m->records[j]));
        go.t.push_back(members.front()->records[j].t);
        go.median_gap.push_back(median(gaps));
      }
      for (const auto& w : spec.slope_windows) {
        try {
          go.slopes.push_back(slope_of_curve(go.algorithm, go.t, go.median_gap, w));
        } catch (const DegenerateError& e) {
          go.slope_notes.push_back({{"window", {w.t_min, w.t_max}}, {"truncated", true}, {"reason", e.what()}});
        }
      }
    }
    result.groups.push_back(std::move(go));
  }

  bool any_error = false, any_fail = false;
  for (const auto& o : result.runs) {
    any_error = any_error || !o.error.empty();
    any_fail = any_fail || !o.passed();
  }
  result.exit_code = any_error ? kExitRuntimeError : any_fail ? kExitCheckFailed : kExitOk;

  const bool want_csv = std::find(spec.formats.begin(), spec.formats.end(), "csv") != spec.formats.end();
  const bool want_json = std::find(spec.formats.begin(), spec.formats.end(), "json") != spec.formats.end();
  const fs::path dir = resolve_output_dir(spec.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  result.output_dir = dir.string();

  std::vector<std::exception_ptr> io_errors(spec.runs.size());
  auto write_one = [&](int i) {
    const RunSpec& r = spec.runs[static_cast<std::size_t>(i)];
    const RunOutcome& o = result.runs[static_cast<std::size_t>(i)];
    try {
      if (want_csv && opt.persist_trajectories && o.record) {
        std::ostringstream csv;
        write_run_csv(csv, *o.record);
        write_atomic(dir / (r.name + ".csv"), csv.str());
      }
      if (want_json) write_atomic(dir / (r.name + ".json"), run_summary(r, o).dump(2) + "\n");
    } catch (...) {
      io_errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  if (opt.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) write_one(i);
  } else {
    for (int i = 0; i < n; ++i) write_one(i);
  }
  for (const auto& e : io_errors)
    if (e) std::rethrow_exception(e);

  json groups = json::array();
  for (const auto& g : result.groups) {
    if (want_csv && !g.t.empty()) {
      std::ostringstream csv;
      csv << "t,median_gap\n";
      for (std::size_t j = 0; j < g.t.size(); ++j) csv << g.t[j] << ',' << cell(g.median_gap[j]) << '\n';
      write_atomic(dir / ("group_" + g.name + ".csv"), csv.str());
    }
    json slopes = json::array();
    for (const auto& s : g.slopes) slopes.push_back(slope_json(s));
    groups.push_back({{"name", g.name},
                      {"algorithm", g.algorithm},
                      {"members", g.members},
                      {"aggregate", "median"},
                      {"csv", want_csv && !g.t.empty() ? json("group_" + g.name + ".csv") : json(nullptr)},
                      {"slopes", slopes},
                      {"slope_notes", g.slope_notes}});
  }

  // manifest is written last, by one writer, once every per-run file exists
  if (want_json) {
    json runs = json::array();
    for (std::size_t i = 0; i < spec.runs.size(); ++i) {
      const auto& r = spec.runs[i];
      const auto& o = result.runs[i];
      runs.push_back({{"name", r.name},
                      {"csv", want_csv && opt.persist_trajectories && o.record ? json(r.name + ".csv") : json(nullptr)},
                      {"json", r.name + ".json"},
                      {"passed", o.passed()},
                      {"error", o.error.empty() ? json(nullptr) : json(o.error)}});
    }
    json checks = json::array();
    for (Check c : spec.checks) checks.push_back(to_string(c));
    json manifest = {{"exit_code", result.exit_code},
                     {"checks", checks},
                     {"runs", runs},
                     {"groups", groups},
                     {"spec", render(spec)}};
    write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  }
  return result;
}

}  // namespace gsmd
