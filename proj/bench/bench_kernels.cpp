// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include <filesystem>

#include "gsmd/harness.hpp"
#include "gsmd/profiler.hpp"
#include "gsmd/prox_oracle.hpp"

using namespace gsmd;

namespace {

void prox_oracle(benchmark::State& st, bool parallel) {
  const Geometry g = Geometry::entropy_simplex(5);
  for (auto _ : st) {
    auto r = parallel ? compare_prox_to_oracle(g, 200, 1) : compare_prox_to_oracle_serial(g, 200, 1);
    benchmark::DoNotOptimize(r.max_deviation);
  }
}

void links(benchmark::State& st, bool parallel) {
  const Objective f(AppendixMix{static_cast<int>(st.range(0))});
  for (auto _ : st) {
    auto r = parallel ? sample_links(f, NormPair::euclidean, 500, 1) : sample_links_serial(f, NormPair::euclidean, 500, 1);
    benchmark::DoNotOptimize(r.data());
  }
}

void dims(benchmark::State& st, bool parallel) {
  ProfileOptions opt;
  for (int n = 6; n <= 45; n += 3) opt.dims.push_back(n);
  opt.samples = 100;
  for (auto _ : st) {
    auto r = parallel ? profile(opt) : profile_serial(opt);
    benchmark::DoNotOptimize(r.fit->b);
  }
}

void sweep(benchmark::State& st, bool parallel) {
  ExperimentSpec spec = parse_spec(R"(
[experiment]
checks = self_bounding
formats = json
[run.s]
algorithm = smd
objective = rank_one_quadratic
objective.n = 10
geometry = entropy_simplex
T = 2000
seed = 0..7
noise.sigma_coeffs = 0.5, 0.5
)");
  spec.dir = (std::filesystem::temp_directory_path() / "gsmd_bench").string();
  for (auto _ : st) {
    auto r = execute(spec, {parallel, false});
    benchmark::DoNotOptimize(r.exit_code);
  }
  std::filesystem::remove_all(spec.dir);
}

}  // namespace

BENCHMARK_CAPTURE(prox_oracle, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(prox_oracle, parallel, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(links, serial, false)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(links, parallel, true)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(dims, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(dims, parallel, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sweep, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sweep, parallel, true)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
