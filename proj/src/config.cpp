#include "gsmd/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gsmd/error.hpp"
#include "gsmd/params.hpp"

namespace gsmd {

namespace {

struct Entry {
  int line;
  std::string key;
  std::string value;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
};

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '@';
  });
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.size() > prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::vector<std::string> parts;
  for (double d : v) parts.push_back(format_double(d));
  return join(parts);
}

std::vector<Section> split_sections(const std::string& text) {
  std::vector<Section> sections;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(line, "", "unterminated section header");
      const std::string name = trim(s.substr(1, s.size() - 2));
      if (name != "experiment" && !(starts_with(name, "run.") && valid_name(name.substr(4))))
        throw ParseError(line, "", "unknown section '" + name + "' (expected [experiment] or [run.<name>])");
      if (!seen.insert(name).second) throw ParseError(line, "", "duplicate section [" + name + "]");
      sections.push_back({name, line, {}});
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(line, "", "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError(line, "", "empty key");
    if (sections.empty()) throw ParseError(line, key, "key outside of a section");
    for (const auto& e : sections.back().entries)
      if (e.key == key) throw ParseError(line, key, "duplicate key");
    sections.back().entries.push_back({line, key, value});
  }
  return sections;
}

// Re-raise value errors with the line and key they came from.
template <class F>
auto at(const Entry& e, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& err) {
    throw ParseError(e.line, e.key, err.what());
  }
}

void parse_experiment(const Section& sec, ExperimentSpec& spec) {
  for (const auto& e : sec.entries) {
    if (e.key == "checks") {
      spec.checks.clear();
      for (const auto& c : split_list(e.value)) {
        const Check check = at(e, [&] { return check_from_string(c); });
        if (std::find(spec.checks.begin(), spec.checks.end(), check) != spec.checks.end())
          throw ParseError(e.line, e.key, "check '" + c + "' listed twice");
        spec.checks.push_back(check);
      }
    } else if (e.key == "formats") {
      spec.formats.clear();
      for (const auto& f : split_list(e.value)) {
        if (f != "csv" && f != "json") throw ParseError(e.line, e.key, "unknown format '" + f + "'");
        if (std::find(spec.formats.begin(), spec.formats.end(), f) == spec.formats.end()) spec.formats.push_back(f);
      }
    } else if (e.key == "dir") {
      if (e.value.empty()) throw ParseError(e.line, e.key, "dir must not be empty");
      spec.dir = e.value;
    } else if (e.key == "slope_windows") {
      spec.slope_windows.clear();
      for (const auto& w : split_list(e.value)) {
        const auto colon = w.find(':');
        if (colon == std::string::npos) throw ParseError(e.line, e.key, "window '" + w + "' is not t_min:t_max");
        SlopeWindow win;
        win.t_min = at(e, [&] { return parse_int(w.substr(0, colon), "slope window"); });
        win.t_max = at(e, [&] { return parse_int(w.substr(colon + 1), "slope window"); });
        if (win.t_min < 1 || win.t_max <= win.t_min)
          throw ParseError(e.line, e.key, "window '" + w + "' needs 1 <= t_min < t_max");
        spec.slope_windows.push_back(win);
      }
    } else {
      throw ParseError(e.line, e.key, "unknown key in [experiment]");
    }
  }
}

// Returns the runs of one section, expanded over a seed range when given.
std::vector<RunSpec> parse_run(const Section& sec) {
  RunSpec run;
  run.name = sec.name.substr(4);
  std::optional<std::pair<std::uint64_t, std::uint64_t>> seed_range;
  std::set<std::string> have;
  for (const auto& e : sec.entries) {
    have.insert(e.key);
    if (e.key == "algorithm") {
      at(e, [&] { return algorithm_from_string(e.value); });
      run.algorithm = e.value;
    } else if (e.key == "T") {
      run.T = at(e, [&] { return parse_int(e.value, "T"); });
      if (run.T < 1 || run.T > 10'000'000) throw ParseError(e.line, e.key, "T must be in [1, 1e7]");
    } else if (e.key == "eta") {
      if (e.value != "paper_default") {
        run.eta = at(e, [&] { return parse_double(e.value, "eta"); });
        if (!(*run.eta > 0.0)) throw ParseError(e.line, e.key, "eta must be positive");
      }
    } else if (e.key == "seed") {
      const auto dots = e.value.find("..");
      if (dots == std::string::npos) {
        run.seed = at(e, [&] { return parse_u64(e.value, "seed"); });
      } else {
        const auto lo = at(e, [&] { return parse_u64(e.value.substr(0, dots), "seed"); });
        const auto hi = at(e, [&] { return parse_u64(e.value.substr(dots + 2), "seed"); });
        if (hi < lo || hi - lo >= 10000) throw ParseError(e.line, e.key, "seed range must be a..b with 0 <= b-a < 10000");
        seed_range = {lo, hi};
      }
    } else if (e.key == "group") {
      if (!valid_name(e.value)) throw ParseError(e.line, e.key, "invalid group name");
      run.group = e.value;
    } else if (e.key == "objective") {
      run.objective = e.value;
    } else if (starts_with(e.key, "objective.")) {
      run.objective_params[e.key.substr(10)] = e.value;
    } else if (e.key == "geometry") {
      if (e.value != "entropy_simplex" && e.value != "euclidean_ball")
        throw ParseError(e.line, e.key, "unknown geometry '" + e.value + "'");
      run.geometry = e.value;
    } else if (e.key == "geometry.radius") {
      run.radius = at(e, [&] { return parse_double(e.value, "geometry.radius"); });
    } else if (e.key == "geometry.center") {
      run.center = at(e, [&] { return parse_double_list(e.value, "geometry.center"); });
    } else if (e.key == "link") {
      static const std::set<std::string> families{"analytic", "constant", "affine", "power", "tabulated"};
      if (!families.count(e.value)) throw ParseError(e.line, e.key, "unknown link '" + e.value + "'");
      run.link = e.value;
    } else if (starts_with(e.key, "link.")) {
      static const std::set<std::string> keys{"L", "L0", "L1", "c", "beta", "points", "terminal_slope", "terminal_degree"};
      const std::string k = e.key.substr(5);
      if (!keys.count(k)) throw ParseError(e.line, e.key, "unknown link parameter");
      run.link_params[k] = e.value;
    } else if (e.key == "noise.sigma_coeffs") {
      run.sigma_coeffs = at(e, [&] { return parse_double_list(e.value, "noise.sigma_coeffs"); });
      if (run.sigma_coeffs.empty()) throw ParseError(e.line, e.key, "needs at least one coefficient");
    } else if (e.key == "noise.shape") {
      at(e, [&] { return noise_shape_from_string(e.value); });
      run.noise_shape = e.value;
    } else if (e.key == "noise.direction") {
      run.noise_direction = at(e, [&] { return parse_double_list(e.value, "noise.direction"); });
    } else {
      throw ParseError(e.line, e.key, "unknown key in [" + sec.name + "]");
    }
  }
  for (const char* required : {"algorithm", "objective", "geometry", "T"})
    if (!have.count(required)) throw ParseError(sec.line, required, "missing required key in [" + sec.name + "]");
  if (!run.sigma_coeffs.empty() && run.noise_shape.empty()) run.noise_shape = "sign_flip";
  if (run.sigma_coeffs.empty() && (!run.noise_shape.empty() || !run.noise_direction.empty()))
    throw ParseError(sec.line, "noise.sigma_coeffs", "noise.shape/direction given without noise.sigma_coeffs");

  if (!seed_range) return {run};
  std::vector<RunSpec> out;
  for (std::uint64_t s = seed_range->first; s <= seed_range->second; ++s) {
    RunSpec r = run;
    r.name = run.name + "@" + std::to_string(s);
    if (r.group.empty()) r.group = run.name;
    r.seed = s;
    out.push_back(std::move(r));
  }
  return out;
}

// Semantic checks that need the built objects (eta caps, link availability).
void validate(const RunSpec& run) {
  const Algorithm alg = algorithm_from_string(run.algorithm);
  if (alg == Algorithm::smd && run.sigma_coeffs.empty())
    throw ValidationError("run '" + run.name + "': smd needs noise.sigma_coeffs");
  if (alg != Algorithm::smd && !run.sigma_coeffs.empty())
    throw ValidationError("run '" + run.name + "': noise is only used by smd");
  try {
    const RunConfig cfg = build_run_config(run);
    if (run.eta) prepare_run(cfg);
  } catch (const StepSizeError& e) {
    throw ValidationError("run '" + run.name + "': " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("run '" + run.name + "': " + e.what());
  } catch (const DomainError& e) {
    throw ValidationError("run '" + run.name + "': " + e.what());
  } catch (const UnsupportedError& e) {
    throw ValidationError("run '" + run.name + "': " + e.what());
  }
}

}  // namespace

bool check_applies(Check c, Algorithm a) {
  switch (c) {
    case Check::grad_bound:
    case Check::theorem_bound: return a != Algorithm::smd;
    case Check::descent: return a == Algorithm::md || a == Algorithm::mp;
    case Check::e_seq: return a == Algorithm::amd;
    default: return true;
  }
}

std::string to_string(Check c) {
  switch (c) {
    case Check::grad_bound: return "grad_bound";
    case Check::descent: return "descent";
    case Check::e_seq: return "e_seq";
    case Check::theorem_bound: return "theorem_bound";
    case Check::self_bounding: return "self_bounding";
    case Check::prox_oracle: return "prox_oracle";
    case Check::local_smooth: return "local_smooth";
  }
  return "unknown";
}

Check check_from_string(const std::string& name) {
  for (Check c : {Check::grad_bound, Check::descent, Check::e_seq, Check::theorem_bound, Check::self_bounding,
                  Check::prox_oracle, Check::local_smooth})
    if (to_string(c) == name) return c;
  throw ValidationError("unknown check '" + name + "'");
}

ExperimentSpec parse_spec(const std::string& text) {
  ExperimentSpec spec;
  std::set<std::string> names;
  for (const auto& sec : split_sections(text)) {
    if (sec.name == "experiment") {
      parse_experiment(sec, spec);
      continue;
    }
    for (auto& r : parse_run(sec)) {
      if (!names.insert(r.name).second) throw ParseError(sec.line, "", "run name '" + r.name + "' is not unique");
      spec.runs.push_back(std::move(r));
    }
  }

  std::map<std::string, long long> group_T;
  for (std::size_t i = 0; i < spec.runs.size(); ++i) {
    const RunSpec& r = spec.runs[i];
    // runs of one seed sweep differ only in seed; validating the first is enough
    if (i == 0 || r.group.empty() || spec.runs[i - 1].group != r.group) validate(r);
    if (!r.group.empty()) {
      auto [it, fresh] = group_T.emplace(r.group, r.T);
      if (!fresh && it->second != r.T) throw ValidationError("group '" + r.group + "' mixes different T");
    }
  }
  if (!spec.runs.empty()) {
    for (Check c : spec.checks) {
      const bool any = std::any_of(spec.runs.begin(), spec.runs.end(),
                                   [&](const RunSpec& r) { return check_applies(c, algorithm_from_string(r.algorithm)); });
      if (!any) throw ValidationError("check '" + to_string(c) + "' does not apply to any run");
    }
  }
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

std::string render(const ExperimentSpec& spec) {
  std::ostringstream out;
  std::vector<std::string> checks;
  for (Check c : spec.checks) checks.push_back(to_string(c));
  std::vector<std::string> windows;
  for (const auto& w : spec.slope_windows) windows.push_back(std::to_string(w.t_min) + ":" + std::to_string(w.t_max));
  out << "[experiment]\n";
  out << "checks = " << join(checks) << "\n";
  out << "formats = " << join(spec.formats) << "\n";
  out << "dir = " << spec.dir << "\n";
  out << "slope_windows = " << join(windows) << "\n";
  for (const auto& r : spec.runs) {
    out << "\n[run." << r.name << "]\n";
    out << "algorithm = " << r.algorithm << "\n";
    out << "T = " << r.T << "\n";
    out << "eta = " << (r.eta ? format_double(*r.eta) : "paper_default") << "\n";
    out << "seed = " << r.seed << "\n";
    if (!r.group.empty()) out << "group = " << r.group << "\n";
    out << "objective = " << r.objective << "\n";
    for (const auto& [k, v] : r.objective_params) out << "objective." << k << " = " << v << "\n";
    out << "geometry = " << r.geometry << "\n";
    if (r.radius) out << "geometry.radius = " << format_double(*r.radius) << "\n";
    if (!r.center.empty()) out << "geometry.center = " << join_doubles(r.center) << "\n";
    out << "link = " << r.link << "\n";
    for (const auto& [k, v] : r.link_params) out << "link." << k << " = " << v << "\n";
    if (!r.sigma_coeffs.empty()) {
      out << "noise.sigma_coeffs = " << join_doubles(r.sigma_coeffs) << "\n";
      out << "noise.shape = " << r.noise_shape << "\n";
      if (!r.noise_direction.empty()) out << "noise.direction = " << join_doubles(r.noise_direction) << "\n";
    }
  }
  return out.str();
}

Objective build_objective(const RunSpec& run) { return make_objective(run.objective, run.objective_params); }

Geometry build_geometry(const RunSpec& run, int dim) {
  if (run.geometry == "entropy_simplex") {
    if (run.radius || !run.center.empty())
      throw ValidationError("entropy_simplex takes no radius or center");
    return Geometry::entropy_simplex(dim);
  }
  if (run.geometry == "euclidean_ball") {
    if (!run.radius) throw ValidationError("euclidean_ball needs geometry.radius");
    Vector center = Vector::Zero(dim);
    if (!run.center.empty()) {
      if (static_cast<int>(run.center.size()) != dim)
        throw ValidationError("geometry.center has the wrong dimension");
      center = Eigen::Map<const Vector>(run.center.data(), dim);
    }
    return Geometry::euclidean_ball(center, *run.radius);
  }
  throw ValidationError("unknown geometry '" + run.geometry + "'");
}

LinkFunction build_link(const RunSpec& run, const Objective& obj, const Geometry& geom) {
  const ParamTable& p = run.link_params;
  auto num = [&](const char* key) {
    auto it = p.find(key);
    if (it == p.end()) throw ValidationError(std::string("link '") + run.link + "' needs link." + key);
    return parse_double(it->second, std::string("link.") + key);
  };
  auto only = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : p) {
      bool ok = false;
      for (const char* key : keys) ok = ok || k == key;
      if (!ok) throw ValidationError("link '" + run.link + "' has no parameter '" + k + "'");
    }
  };
  if (run.link == "analytic") {
    only({});
    return obj.analytic_link(geom.norm_pair());
  }
  if (run.link == "constant") {
    only({"L"});
    return LinkFunction::constant(num("L"));
  }
  if (run.link == "affine") {
    only({"L0", "L1"});
    return LinkFunction::affine(num("L0"), num("L1"));
  }
  if (run.link == "power") {
    only({"c", "beta"});
    return LinkFunction::power(num("c"), num("beta"));
  }
  if (run.link == "tabulated") {
    only({"points", "terminal_slope", "terminal_degree"});
    auto it = p.find("points");
    if (it == p.end()) throw ValidationError("link 'tabulated' needs link.points");
    std::vector<std::pair<double, double>> pts;
    for (const auto& item : split_list(it->second)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ValidationError("link.points entries must be alpha:value");
      pts.emplace_back(parse_double(item.substr(0, colon), "link.points"),
                       parse_double(item.substr(colon + 1), "link.points"));
    }
    const double degree = p.count("terminal_degree") ? num("terminal_degree") : 1.0;
    return LinkFunction::tabulated(std::move(pts), num("terminal_slope"), degree);
  }
  throw ValidationError("unknown link '" + run.link + "'");
}

RunConfig build_run_config(const RunSpec& run) {
  const Algorithm alg = algorithm_from_string(run.algorithm);
  Objective obj = build_objective(run);
  Geometry geom = build_geometry(run, obj.dim());
  LinkFunction link = build_link(run, obj, geom);
  std::optional<NoiseModel> noise;
  if (!run.sigma_coeffs.empty()) {
    std::optional<Vector> dir;
    if (!run.noise_direction.empty()) {
      if (static_cast<int>(run.noise_direction.size()) != obj.dim())
        throw ValidationError("noise.direction has the wrong dimension");
      dir = Eigen::Map<const Vector>(run.noise_direction.data(), obj.dim());
    }
    noise.emplace(run.sigma_coeffs, noise_shape_from_string(run.noise_shape), dir);
  }
  return RunConfig{alg, std::move(obj), std::move(geom), std::move(link), run.T, run.eta, run.seed,
                   std::move(noise), false, std::nullopt};
}

}  // namespace gsmd
