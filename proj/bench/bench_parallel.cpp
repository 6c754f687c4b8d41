// Serial reference against the OpenMP path for the parallel kernels.
// Run with OMP_NUM_THREADS set to the worker count of interest.

#include <benchmark/benchmark.h>

#include "jcbeat/conditioning.hpp"
#include "jcbeat/error.hpp"
#include "jcbeat/four_level.hpp"
#include "jcbeat/lindblad.hpp"
#include "jcbeat/trajectories.hpp"
#include "jcbeat/wigner.hpp"

using namespace jcbeat;

namespace {

SystemParams params(double eps_over_g, int n_trunc) {
    SystemParams p;
    p.g = 500;
    p.kappa = 0.5;
    p.gamma = 1;
    p.eps_d = eps_over_g * p.g;
    p.spec = HilbertSpec(n_trunc);
    return p;
}

Execution mode(const benchmark::State& state) {
    return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& state) {
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

void BM_WignerClosedForm(benchmark::State& state) {
    const auto e = effective_params(params(0.075, 8));
    const auto c = cavity_coefficients(steady_state_4l(e));
    const auto grid = GridSpec::square(2.5, 0.005);
    for (auto _ : state) benchmark::DoNotOptimize(wigner_grid(c, grid, mode(state)));
    label(state);
}

void BM_WignerDisplacedParity(benchmark::State& state) {
    const auto p = params(0.075, 12);
    const auto rho = reduce_to_cavity(steady_state(p));
    const auto grid = GridSpec::square(2.5, 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(wigner_general(rho, grid, {}, mode(state)));
    label(state);
}

void BM_Ensemble(benchmark::State& state) {
    EnsembleSpec spec;
    spec.method = state.range(1) == 0 ? Unraveling::mc : Unraveling::qsd;
    spec.params = params(0.075, 6);
    spec.init = {{1.0, ground_state(spec.params.spec)}};
    for (int k = 0; k <= 20; ++k) spec.times.push_back(0.01 * k);
    spec.count = 32;
    for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(spec, mode(state)));
    state.SetLabel(std::string(state.range(0) == 0 ? "serial " : "parallel ") + to_string(spec.method));
}

} // namespace

BENCHMARK(BM_WignerClosedForm)->Arg(0)->Arg(1)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WignerDisplacedParity)->Arg(0)->Arg(1)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ensemble)->Args({0, 0})->Args({1, 0})->Args({0, 1})->Args({1, 1})->UseRealTime()->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    diag::set_sink([](const std::string&) {});
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
