#include <benchmark/benchmark.h>

#include <vector>

#include "nlforms/forms.hpp"
#include "nlforms/generators.hpp"
#include "nlforms/measures.hpp"
#include "nlforms/process.hpp"
#include "nlforms/qr.hpp"
#include "nlforms/rng.hpp"

using namespace nlforms;

namespace {

DiscreteStateSpace grid_space(long n) {
    std::vector<std::vector<double>> states;
    std::vector<double> mu(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
    for (long k = 0; k < n; ++k) states.push_back({0.5 * static_cast<double>(k)});
    return DiscreteStateSpace(std::move(states), std::move(mu));
}

void BM_DiscreteForm(benchmark::State& state) {
    const long n = state.range(0);
    const DiscreteStateSpace space = grid_space(n);
    FormConfig cfg;
    Rng rng(1);
    std::vector<double> u(static_cast<std::size_t>(n)), v(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        u[k] = rng.uniform();
        v[k] = rng.uniform();
    }
    for (auto _ : state) benchmark::DoNotOptimize(discrete_form_exact(u, v, space, cfg));
}
BENCHMARK(BM_DiscreteForm)->Arg(16)->Arg(64)->Arg(256);

void BM_Semigroup(benchmark::State& state) {
    const long n = state.range(0);
    const GeneratorMatrix gen = build_generator(grid_space(n), FormConfig{});
    for (auto _ : state) benchmark::DoNotOptimize(semigroup(gen, 1.0));
}
BENCHMARK(BM_Semigroup)->Arg(16)->Arg(64)->Arg(128);

void BM_LatticeSweep(benchmark::State& state) {
    LatticePhi4Measure::Params params;
    params.d = 2;
    params.side = static_cast<int>(state.range(0));
    params.coupling = 0.5;
    const LatticePhi4Measure measure(params);
    std::vector<double> phi(static_cast<std::size_t>(measure.sites()), 0.0);
    Rng rng(2);
    for (auto _ : state) benchmark::DoNotOptimize(mcmc_step(measure, phi, 0.7, rng));
    state.SetItemsProcessed(state.iterations() * measure.sites());
}
BENCHMARK(BM_LatticeSweep)->Arg(8)->Arg(16)->Arg(32);

void BM_SummabilityCheck(benchmark::State& state) {
    const EigenSequence eig = EigenSequence::power(1.0, state.range(0));
    const QRInput input = preset("example0", eig);
    for (auto _ : state) benchmark::DoNotOptimize(check_lp_case(input));
}
BENCHMARK(BM_SummabilityCheck)->Arg(10000)->Arg(100000);

void BM_JumpSimulation(benchmark::State& state) {
    FormConfig cfg;
    cfg.profile = KernelProfile::stable;
    const DiscreteStateSpace space({{0.5}, {-0.5}}, {0.3, 0.7});
    const GeneratorMatrix gen = build_generator(space, cfg);
    std::uint64_t seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(simulate(gen, 0, 1000.0, seed++));
}
BENCHMARK(BM_JumpSimulation);

}  // namespace

BENCHMARK_MAIN();
