#include <benchmark/benchmark.h>

#include "trackcast/cells/cells.hpp"
#include "trackcast/nn/ops.hpp"

using namespace trackcast;

namespace {

// Args: kind (0 convlstm, 1 lstm, 2 gru), input channels, hidden, positions, steps.
void BM_UnrollForwardBackward(benchmark::State& state) {
    const auto kind = static_cast<cells::CellKind>(state.range(0));
    const auto in = static_cast<std::size_t>(state.range(1));
    const auto hidden = static_cast<std::size_t>(state.range(2));
    const auto positions = static_cast<std::size_t>(state.range(3));
    const auto steps = static_cast<std::size_t>(state.range(4));
    nn::ParameterStore store;
    nn::Rng rng(7);
    cells::RecurrentLayer layer{
        kind == cells::CellKind::convlstm
            ? cells::RecurrentLayer{cells::ConvLSTMCellParams::create(store, "c", in, hidden, 11, positions, rng)}
            : cells::RecurrentLayer{cells::PointwiseRNNParams::create(store, "p", kind, in, hidden, rng)}};
    std::vector<nn::Tensor> xs(steps, nn::Tensor({in, positions}, 0.1));
    nn::Tensor target({hidden, positions}, 0.2);
    for (auto _ : state) {
        nn::Tape tape;
        std::vector<nn::Var> vars;
        for (const auto& x : xs) vars.push_back(tape.constant(x));
        auto hs = cells::unroll(tape, store, layer, vars);
        auto grads = tape.backward(nn::ops::mse_loss(hs.back(), tape.constant(target)));
        benchmark::DoNotOptimize(grads.size());
    }
}

} // namespace

BENCHMARK(BM_UnrollForwardBackward)
    ->Args({0, 72, 16, 512, 6})
    ->Args({0, 72, 8, 512, 6})
    ->Args({1, 72, 16, 512, 6})
    ->Args({2, 72, 16, 512, 6})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
