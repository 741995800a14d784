#include <memory>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "oifs/config.hpp"
#include "oifs/pipeline.hpp"
#include "oifs/schwarz.hpp"

using namespace oifs;

namespace {

const RunConfig& default_config() {
    static const RunConfig cfg = parse_config_text("");
    return cfg;
}

const TrainingRun& trained() {
    static const TrainingRun run = train_subdomain_roms(default_config());
    return run;
}

void BM_Assemble(benchmark::State& state) {
    const auto mesh = build_mesh({0.0, 1.0, 0.0, 1.0}, static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble(mesh, CdrParams{}));
    }
}
BENCHMARK(BM_Assemble)->Arg(27)->Arg(50);

void BM_FeSubdomainStep(benchmark::State& state) {
    const auto& spec = default_config().decomposition.subdomains[3];
    const auto sys = assemble(subdomain_mesh(spec), default_config().cdr_params());
    const ImplicitEulerStepper stepper(sys, default_config().problem.dt);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(sys->interior_size());
    const Eigen::VectorXd g = Eigen::VectorXd::Zero(sys->boundary_size());
    for (auto _ : state) {
        v = stepper.step(v, g, g, 0.1);
        benchmark::DoNotOptimize(v.data());
    }
}
BENCHMARK(BM_FeSubdomainStep);

void BM_RomSubdomainStep(benchmark::State& state) {
    const TrainedRom& rom = trained().roms.front();
    const RomStepper stepper(rom.ops, default_config().problem.dt);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(rom.basis.r);
    const Eigen::VectorXd g = Eigen::VectorXd::Zero(rom.ops.m());
    for (auto _ : state) {
        v = stepper.step(v, g);
        benchmark::DoNotOptimize(v.data());
    }
}
BENCHMARK(BM_RomSubdomainStep);

void BM_OpInfFit(benchmark::State& state) {
    const int r = static_cast<int>(state.range(0));
    const int m = 108;
    const int nt = 100;
    std::mt19937 rng(1);
    std::normal_distribution<double> n01;
    auto randn = [&](int rows, int cols) {
        Eigen::MatrixXd a(rows, cols);
        for (auto& x : a.reshaped()) {
            x = n01(rng);
        }
        return a;
    };
    const Eigen::MatrixXd y = randn(r, nt), ydot = randn(r, nt), g = randn(m, nt);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_operators(y, ydot, g, 0.0));
    }
}
BENCHMARK(BM_OpInfFit)->Arg(10)->Arg(30);

// Full coupled time loop over [0, 0.5]; arg 0 = all-FE, 1 = hybrid.
void BM_SchwarzRun(benchmark::State& state) {
    RunConfig cfg = default_config();
    cfg.problem.t_final = 0.5;
    const bool all_fe = state.range(0) == 0;
    const auto& roms = trained().roms;
    for (auto _ : state) {
        const CoupledRun run = run_schwarz(cfg, roms, all_fe);
        state.counters["solve_s"] = run.result.timings.solve_seconds;
        state.counters["iters"] = run.result.mean_iterations();
    }
}
BENCHMARK(BM_SchwarzRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
