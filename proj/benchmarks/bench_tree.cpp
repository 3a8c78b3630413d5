#include <benchmark/benchmark.h>

#include "futmon/demos.hpp"
#include "futmon/oracle.hpp"

// Throughput of the hot paths: single transaction execution, tree growth
// and the window decision, across branching factors m for a fixed window.

using namespace futmon;

namespace {

CompiledScenario worstCase(int k, int m) {
    return compileScenario(sizeWorstCaseScenario(k, m));
}

void BM_applyTx(benchmark::State& state) {
    CompiledScenario cs = compileScenario(demoScenario("lender-correct-client"));
    for (auto _ : state) {
        benchmark::DoNotOptimize(applyTx(cs.txs[0], cs.genesis, cs.registry));
    }
}
BENCHMARK(BM_applyTx);

void BM_extendFullWindow(benchmark::State& state) {
    int k = static_cast<int>(state.range(0));
    int m = static_cast<int>(state.range(1));
    CompiledScenario cs = worstCase(k, m);
    BlockchainRun run = initRun(cs.genesis, cs.window);
    for (std::size_t i = 0; i + 1 < cs.txs.size(); ++i) run = step(run, cs.txs[i], cs.registry);
    const Transaction& last = cs.txs.back();
    for (auto _ : state) {
        benchmark::DoNotOptimize(extend(run.tree, last, cs.registry));
    }
    state.counters["nodes"] = static_cast<double>(sizeOf(run.tree));
}
BENCHMARK(BM_extendFullWindow)->Args({4, 0})->Args({4, 2})->Args({4, 4})->Args({8, 4})->Args({8, 6});

void BM_stepAndDecide(benchmark::State& state) {
    int k = static_cast<int>(state.range(0));
    int m = static_cast<int>(state.range(1));
    CompiledScenario cs = worstCase(k, m);
    BlockchainRun full = initRun(cs.genesis, cs.window);
    for (const auto& tx : cs.txs) full = step(full, tx, cs.registry);
    Transaction ping = drainPing(nextSubmissionIndex(full));
    for (auto _ : state) {
        benchmark::DoNotOptimize(step(full, ping, cs.registry));
    }
}
BENCHMARK(BM_stepAndDecide)->Args({4, 2})->Args({4, 4})->Args({8, 6});

void BM_oracleExchange(benchmark::State& state) {
    CompiledScenario cs = compileScenario(demoScenario("appendix-exchange"));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            enumerateConsistentFutures(cs.genesis, cs.txs, cs.window, cs.registry));
    }
}
BENCHMARK(BM_oracleExchange);

}  // namespace

BENCHMARK_MAIN();
