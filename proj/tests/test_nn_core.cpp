#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "trackcast/cells/cells.hpp"
#include "trackcast/errors.hpp"
#include "trackcast/nn/adam.hpp"
#include "trackcast/nn/conv.hpp"
#include "trackcast/nn/gradcheck.hpp"
#include "trackcast/nn/ops.hpp"

using namespace trackcast;
using nn::Tensor;

namespace {

// Direct triple sum, one output element at a time.
double conv_oracle(const Tensor& in, const nn::ConvKernel1D& k, std::size_t c, std::size_t l) {
    const long half = static_cast<long>(k.width() - 1) / 2;
    double acc = k.bias[c];
    for (std::size_t ci = 0; ci < k.in_channels(); ++ci) {
        for (std::size_t j = 0; j < k.width(); ++j) {
            const long src = static_cast<long>(l) + static_cast<long>(j) - half;
            if (src < 0 || src >= static_cast<long>(in.dim(1))) continue;
            acc += k.weights(c, ci, j) * in(ci, static_cast<std::size_t>(src));
        }
    }
    return acc;
}

nn::ConvKernel1D random_kernel(std::size_t out, std::size_t in, std::size_t width,
                               std::mt19937_64& rng) {
    return {testutil::random_tensor({out, in, width}, rng), testutil::random_tensor({out}, rng)};
}

} // namespace

TEST_CASE("conv1d identity kernel returns the input") {
    Tensor input({1, 3}, {1, 2, 3});
    nn::ConvKernel1D k{Tensor({1, 1, 1}, {1.0}), Tensor({1}, {0.0})};
    Tensor out = nn::conv1d(input, k);
    CHECK(out.to_vector() == std::vector<double>{1, 2, 3});
}

TEST_CASE("conv1d of zero input is the bias everywhere") {
    std::mt19937_64 rng(3);
    auto k = random_kernel(3, 2, 5, rng);
    Tensor out = nn::conv1d(Tensor({2, 9}), k);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t l = 0; l < 9; ++l) CHECK(out(c, l) == k.bias[c]);
}

TEST_CASE("conv1d matches the brute-force summation oracle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor in = testutil::random_tensor({2, 8}, rng);
        auto k = random_kernel(3, 2, 3, rng);
        Tensor out = nn::conv1d(in, k);
        REQUIRE(out.shape() == nn::Shape{3, 8});
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t l = 0; l < 8; ++l) CHECK(out(c, l) == doctest::Approx(conv_oracle(in, k, c, l)).epsilon(1e-13));
    }
    // Wider kernel than the signal: every tap falls off one edge somewhere.
    Tensor in = testutil::random_tensor({4, 5}, rng);
    auto k = random_kernel(2, 4, 11, rng);
    Tensor out = nn::conv1d(in, k);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t l = 0; l < 5; ++l) CHECK(out(c, l) == doctest::Approx(conv_oracle(in, k, c, l)).epsilon(1e-13));
}

TEST_CASE("conv1d rejects channel mismatch and even widths") {
    std::mt19937_64 rng(1);
    auto k = random_kernel(1, 2, 3, rng);
    CHECK_THROWS_AS(nn::conv1d(Tensor({3, 4}), k), DimensionError);
    CHECK_THROWS_AS(nn::ConvKernel1D::zeros(1, 1, 4), ConfigurationError);
    nn::ConvKernel1D even{Tensor({1, 1, 2}), Tensor({1})};
    CHECK_THROWS_AS(nn::conv1d(Tensor({1, 4}), even), ConfigurationError);
}

TEST_CASE("conv1d is linear without bias and translation-equivariant in the interior") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        auto k = random_kernel(3, 2, 5, rng);
        k.bias.fill(0.0);
        Tensor x = testutil::random_tensor({2, 32}, rng);
        Tensor y = testutil::random_tensor({2, 32}, rng);
        const double a = 1.7, b = -0.3;
        Tensor combo({2, 32});
        for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = a * x[i] + b * y[i];
        Tensor lhs = nn::conv1d(combo, k);
        Tensor cx = nn::conv1d(x, k), cy = nn::conv1d(y, k);
        for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(lhs[i] == doctest::Approx(a * cx[i] + b * cy[i]).epsilon(1e-12));

        const std::size_t s = 3, half = 2;
        Tensor shifted({2, 32});
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t l = s; l < 32; ++l) shifted(c, l) = x(c, l - s);
        Tensor out_shifted = nn::conv1d(shifted, k);
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t l = s + half; l + half < 32; ++l)
                CHECK(out_shifted(c, l) == doctest::Approx(cx(c, l - s)).epsilon(1e-12));
    }
}

TEST_CASE("dense layer") {
    Tensor eye({2, 2}, {1, 0, 0, 1});
    CHECK(nn::dense(Tensor({2}, {0, 1}), eye, Tensor({2})).to_vector() == std::vector<double>{0, 1});
    Tensor zeros({4, 2});
    Tensor bias({4}, {4, 3, 2, 1});
    CHECK(nn::dense(Tensor({2}, {0.3, -2}), zeros, bias).storage() == bias.storage());

    std::mt19937_64 rng(8);
    Tensor w = testutil::random_tensor({4, 2}, rng);
    Tensor b = testutil::random_tensor({4}, rng);
    Tensor out = nn::dense(Tensor({2}, {1, 0}), w, b);
    for (std::size_t r = 0; r < 4; ++r) CHECK(out[r] == w(r, 0) + b[r]);

    CHECK_THROWS_AS(nn::dense(Tensor({3}), w, b), DimensionError);
}

TEST_CASE("mse loss") {
    nn::Tape tape;
    std::mt19937_64 rng(2);
    Tensor a = testutil::random_tensor({2, 2, 3}, rng);
    CHECK(nn::ops::mse_loss(tape.constant(a), tape.constant(a)).value()[0] == 0.0);

    Tensor shifted = a;
    for (auto& v : shifted.values()) v += 1.0;
    CHECK(nn::ops::mse_loss(tape.constant(shifted), tape.constant(a)).value()[0] == doctest::Approx(1.0).epsilon(1e-15));

    for (int trial = 0; trial < 50; ++trial) {
        Tensor p = testutil::random_tensor({2, 2, 3}, rng, -3, 3);
        Tensor t = testutil::random_tensor({2, 2, 3}, rng, -3, 3);
        double acc = 0.0;
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                for (std::size_t k = 0; k < 3; ++k) acc += std::pow(p(i, j, k) - t(i, j, k), 2);
        const double loss = nn::ops::mse_loss(tape.constant(p), tape.constant(t)).value()[0];
        CHECK(loss == doctest::Approx(acc / 12.0).epsilon(1e-14));
        CHECK(loss >= 0.0);
    }
    CHECK_THROWS_AS(nn::ops::mse_loss(tape.constant(Tensor({2, 3})), tape.constant(Tensor({3, 2}))), DimensionError);
}

TEST_CASE("backward through dense + mse matches the closed-form chain rule") {
    nn::ParameterStore store;
    const auto w = store.add("w", Tensor({1, 1}, {0.7}));
    const auto b = store.add("b", Tensor({1}, {-0.2}));
    const double x = 1.3, y = 0.4;
    nn::Tape tape;
    auto pred = nn::ops::dense(tape.constant(Tensor({1}, {x})), tape.parameter(store[w]), tape.parameter(store[b]));
    auto loss = nn::ops::mse_loss(pred, tape.constant(Tensor({1}, {y})));
    auto grads = tape.backward(loss);
    CHECK(grads[w][0] == doctest::Approx(2.0 * (0.7 * x - 0.2 - y) * x).epsilon(1e-15));
    CHECK(grads[b][0] == doctest::Approx(2.0 * (0.7 * x - 0.2 - y)).epsilon(1e-15));
}

TEST_CASE("backward of a constant loss gives zero gradients") {
    nn::ParameterStore store;
    store.add("w", Tensor({3}, 1.0));
    nn::Tape tape;
    tape.parameter(store[0]);
    auto loss = nn::ops::mse_loss(tape.constant(Tensor({2}, 1.0)), tape.constant(Tensor({2}, 0.5)));
    auto dense = tape.backward(loss).densify(store);
    for (double g : dense[0].values()) CHECK(g == 0.0);
}

TEST_CASE("backward rejects a loss from another tape or a non-scalar") {
    nn::Tape a, b;
    auto loss = a.constant(Tensor({1}, 1.0));
    CHECK_THROWS_AS(b.backward(loss), UsageError);
    CHECK_THROWS_AS(a.backward(a.constant(Tensor({2}, 1.0))), UsageError);
    CHECK_THROWS_AS(a.backward(nn::Var{}), UsageError);
}

TEST_CASE("per-op gradients match central finite differences") {
    std::mt19937_64 rng(21);
    for (int draw = 0; draw < 10; ++draw) {
        nn::ParameterStore store;
        const auto x = store.add("x", testutil::random_tensor({3, 7}, rng));
        const auto y = store.add("y", testutil::random_tensor({3, 7}, rng));
        const auto w = store.add("w", testutil::random_tensor({4, 3, 5}, rng));
        const auto b = store.add("b", testutil::random_tensor({4}, rng));
        const auto dw = store.add("dw", testutil::random_tensor({2, 4}, rng));
        const auto db = store.add("db", testutil::random_tensor({2}, rng));
        Tensor target = testutil::random_tensor({2, 7}, rng);
        Tensor vec_target = testutil::random_tensor({2}, rng);

        auto loss_fn = [&](nn::Tape& t) {
            namespace ops = nn::ops;
            auto px = t.parameter(store[x]);
            auto py = t.parameter(store[y]);
            auto mixed = ops::add(ops::mul(ops::sigmoid(px), ops::tanh(py)), ops::sub(px, ops::scale(py, 0.5)));
            auto conv = ops::conv1d(mixed, t.parameter(store[w]), t.parameter(store[b]));
            auto both = ops::concat_channels({conv, mixed});
            auto head = ops::slice_channels(both, 1, 2);
            auto l1 = ops::mse_loss(head, t.constant(target));
            auto vec = ops::dense(t.constant(Tensor({4}, {0.1, -0.4, 0.8, 0.3})), t.parameter(store[dw]), t.parameter(store[db]));
            auto l2 = ops::mse_loss(vec, t.constant(vec_target));
            return ops::sum({l1, l2});
        };
        auto res = nn::check_gradients(store, loss_fn);
        INFO("worst " << res.worst_parameter << "[" << res.worst_index << "] analytic " << res.worst_analytic << " numeric " << res.worst_numeric);
        CHECK(res.max_relative_error < 1e-4);
    }
}

TEST_CASE("convlstm cell loss, 1 channel, 4 positions, matches finite differences") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        nn::ParameterStore store;
        nn::Rng rng(seed);
        auto params = cells::ConvLSTMCellParams::create(store, "cell", 1, 1, 3, 4, rng);
        std::mt19937_64 data_rng(seed + 100);
        Tensor x = testutil::random_tensor({1, 4}, data_rng);
        Tensor h0 = testutil::random_tensor({1, 4}, data_rng);
        Tensor c0 = testutil::random_tensor({1, 4}, data_rng);
        Tensor target = testutil::random_tensor({1, 4}, data_rng);
        auto loss_fn = [&](nn::Tape& t) {
            auto next = cells::convlstm_step(t, store, params, t.constant(x), {t.constant(h0), t.constant(c0)});
            return nn::ops::mse_loss(next.hidden, t.constant(target));
        };
        auto res = nn::check_gradients(store, loss_fn);
        INFO("seed " << seed << " worst " << res.worst_parameter);
        CHECK(res.max_relative_error < 1e-4);
    }
}

TEST_CASE("adam: analytic first step, zero gradient, two-step recursion") {
    nn::ParameterStore store;
    store.add("p", Tensor({1}, {0.5}));
    nn::AdamState state(store, {});
    CHECK(state.step() == 0);
    CHECK(state.first_moment()[0][0] == 0.0);

    nn::adam_step(store, {Tensor({1}, {1.0})}, state);
    CHECK(state.step() == 1);
    CHECK(store[0].value[0] == doctest::Approx(0.5 - 0.001).epsilon(1e-9));

    nn::ParameterStore still;
    still.add("q", Tensor({2}, {0.25, -3.0}));
    nn::AdamState still_state(still, {});
    nn::adam_step(still, {Tensor({2}, 0.0)}, still_state);
    CHECK(still[0].value[0] == 0.25);
    CHECK(still[0].value[1] == -3.0);

    // Manual recursion for two steps with gradients 1 then 1.
    const double lr = 0.001, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double m = 0.0, v = 0.0, p = 0.5;
    for (int t = 1; t <= 2; ++t) {
        m = b1 * m + (1 - b1) * 1.0;
        v = b2 * v + (1 - b2) * 1.0;
        p -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
    }
    nn::adam_step(store, {Tensor({1}, {1.0})}, state);
    CHECK(state.step() == 2);
    CHECK(store[0].value[0] == doctest::Approx(p).epsilon(1e-15));
    CHECK(store[0].value[0] == doctest::Approx(0.5 - 0.002 / (1 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam rejects non-finite gradients and names the parameter") {
    nn::ParameterStore store;
    store.add("layer0.w_x", Tensor({2}, 1.0));
    nn::AdamState state(store, {});
    try {
        std::vector<Tensor> bad{Tensor({2}, std::vector<double>{1.0, std::nan("")})};
        nn::adam_step(store, bad, state);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("layer0.w_x") != std::string::npos);
    }
    CHECK(store[0].value[0] == 1.0);
    CHECK(state.step() == 0);
}

TEST_CASE("forward, backward and adam are bit-reproducible") {
    auto run = [] {
        nn::ParameterStore store;
        nn::Rng rng = nn::Rng::stream(42, "init");
        auto params = cells::ConvLSTMCellParams::create(store, "cell", 2, 3, 5, 12, rng);
        nn::AdamState adam(store, {});
        std::mt19937_64 data_rng(9);
        Tensor x = testutil::random_tensor({2, 12}, data_rng);
        Tensor target = testutil::random_tensor({3, 12}, data_rng);
        std::vector<double> trace;
        for (int it = 0; it < 5; ++it) {
            nn::Tape tape;
            auto zero = tape.constant(Tensor({3, 12}));
            auto s = cells::convlstm_step(tape, store, params, tape.constant(x), {zero, zero});
            auto loss = nn::ops::mse_loss(s.hidden, tape.constant(target));
            trace.push_back(loss.value()[0]);
            nn::adam_step(store, tape.backward(loss).densify(store), adam);
        }
        for (const auto& p : store) trace.insert(trace.end(), p.value.storage().begin(), p.value.storage().end());
        return trace;
    };
    CHECK(run() == run());
}
