// Serial reference vs OpenMP kernels. Arg 0 = Exec::Serial, 1 = Exec::Parallel;
// both produce identical results, only the wall time differs.

#include <benchmark/benchmark.h>

#include "fairsample/fairness.hpp"
#include "fairsample/generator.hpp"
#include "fairsample/ising.hpp"
#include "fairsample/oracle.hpp"
#include "fairsample/samplers.hpp"

using namespace fairsample;

namespace {

Exec policy(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

Instance trimmed_c2(int active, std::uint64_t seed) {
    Defects d;
    for (int q = 31; q >= active; --q) d.qubits.push_back(q);
    Rng rng = make_rng(seed);
    return draw_couplings(build_chimera(2, d), rng);
}

Instance filtered(int c, std::uint64_t seed) {
    return *generate_instance(build_chimera(c, {}), seed).instance;
}

void BM_BruteForce(benchmark::State& state) {
    const Instance inst = trimmed_c2(static_cast<int>(state.range(1)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(brute_force_enumerate(inst, policy(state)).count);
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(1)));
}
BENCHMARK(BM_BruteForce)->ArgsProduct({{0, 1}, {20, 24}})->Unit(benchmark::kMillisecond);

void BM_UniformBaseline(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(uniform_baseline(1000, 24, 10000, 7, policy(state)).mean);
}
BENCHMARK(BM_UniformBaseline)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Bootstrap(benchmark::State& state) {
    const std::vector<std::uint64_t> counts = {10, 20, 40, 80, 160, 320, 11, 22, 44, 88, 176, 352};
    for (auto _ : state) benchmark::DoNotOptimize(bootstrap_ci(counts, 10000, 3, policy(state)).low);
}
BENCHMARK(BM_Bootstrap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GaugeReadsSA(benchmark::State& state) {
    const Instance inst = filtered(2, 1);
    SamplerConfig cfg;
    cfg.kind = SamplerKind::SimulatedAnnealing;
    for (auto _ : state) benchmark::DoNotOptimize(run_with_gauges(inst, cfg, 4, 50, 5, policy(state)).size());
    state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_GaugeReadsSA)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PTSweep(benchmark::State& state) {
    const Instance inst = filtered(3, 2);
    const BaseModel model(inst);
    PTParams p;
    auto temps = p.temperatures();
    for (double& t : temps) t *= static_cast<double>(model.max_coupling());
    PTState<std::int64_t> pt = init_pt_state(model, temps, 4, 9);
    for (auto _ : state) pt_sweep(pt, model, policy(state));
    state.SetItemsProcessed(state.iterations() * 4 * p.n_temps);
}
BENCHMARK(BM_PTSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
