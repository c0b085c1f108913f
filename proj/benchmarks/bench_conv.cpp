#include <benchmark/benchmark.h>

#include <random>

#include "trackcast/nn/conv.hpp"

using trackcast::nn::Tensor;

namespace {

Tensor random(trackcast::nn::Shape shape, std::mt19937_64& rng) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> d(-1, 1);
    for (auto& v : t.values()) v = d(rng);
    return t;
}

// Args: in_channels, out_channels, width, positions.
void BM_Conv1dForward(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto in = static_cast<std::size_t>(state.range(0));
    const auto out = static_cast<std::size_t>(state.range(1));
    const auto width = static_cast<std::size_t>(state.range(2));
    const auto positions = static_cast<std::size_t>(state.range(3));
    Tensor x = random({in, positions}, rng);
    Tensor w = random({out, in, width}, rng);
    Tensor b = random({out}, rng);
    Tensor y({out, positions});
    for (auto _ : state) {
        trackcast::nn::kernels::conv1d_forward(x, w, &b, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.counters["MAC/s"] = benchmark::Counter(
        static_cast<double>(in * out * width * positions), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Conv1dBackward(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const auto in = static_cast<std::size_t>(state.range(0));
    const auto out = static_cast<std::size_t>(state.range(1));
    const auto width = static_cast<std::size_t>(state.range(2));
    const auto positions = static_cast<std::size_t>(state.range(3));
    Tensor x = random({in, positions}, rng);
    Tensor w = random({out, in, width}, rng);
    Tensor g = random({out, positions}, rng);
    Tensor gx({in, positions}), gw({out, in, width}), gb({out});
    for (auto _ : state) {
        trackcast::nn::kernels::conv1d_backward(x, w, g, &gx, &gw, &gb);
        benchmark::DoNotOptimize(gw.data());
    }
    state.counters["MAC/s"] = benchmark::Counter(
        2.0 * static_cast<double>(in * out * width * positions), benchmark::Counter::kIsIterationInvariantRate);
}

} // namespace

// Desk-scale ConvLSTM gate convolution (72 inputs, 16 hidden -> 64 gates) and smaller variants.
BENCHMARK(BM_Conv1dForward)->Args({72, 64, 11, 512})->Args({16, 64, 11, 512})->Args({72, 32, 11, 512})->Args({72, 64, 1, 512});
BENCHMARK(BM_Conv1dBackward)->Args({72, 64, 11, 512})->Args({16, 64, 11, 512})->Args({72, 32, 11, 512});
BENCHMARK_MAIN();
