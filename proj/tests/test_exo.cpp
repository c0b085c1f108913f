#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "trackcast/errors.hpp"
#include "trackcast/exo/embedding.hpp"
#include "trackcast/nn/adam.hpp"
#include "trackcast/nn/ops.hpp"

using namespace trackcast;
using exo::ExogenousBundle;
using exo::ExogenousFlags;
using nn::Tensor;

namespace {

ExogenousBundle random_bundle(std::size_t T, std::size_t L, std::mt19937_64& rng) {
    auto b = ExogenousBundle::empty(T, L);
    std::bernoulli_distribution flag(0.2);
    std::uniform_int_distribution<int> cat(0, 4);
    std::uniform_real_distribution<double> pos(0.0, 30.0);
    for (auto& v : b.maintenance.values()) v = flag(rng) ? 1.0 : 0.0;
    for (auto& v : b.rail_joint.values()) v = flag(rng) ? 1.0 : 0.0;
    for (auto& s : b.under_structure) s = static_cast<std::uint8_t>(cat(rng));
    for (auto& v : b.tonnage.values()) v = pos(rng);
    for (auto& v : b.rainfall.values()) v = pos(rng);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t l = 0; l < L; ++l)
            b.ballast_age(t, l) = b.under_structure[l] == 0 ? 0.0 : pos(rng);
    return b;
}

struct Embedder {
    nn::ParameterStore store;
    exo::EmbeddingParams params;

    explicit Embedder(std::uint64_t seed, bool per_category = false) {
        auto rng = nn::Rng::stream(seed, "init");
        params = exo::EmbeddingParams::create(store, "embed", rng, per_category);
    }
};

// out[o] = sum_i W[o][i] * x[i] + b[o] for a (4, n, 1) kernel.
std::array<double, 4> dense4(const Tensor& w, const Tensor& b, std::span<const double> x) {
    std::array<double, 4> out{};
    for (std::size_t o = 0; o < 4; ++o) {
        double acc = b[o];
        for (std::size_t i = 0; i < x.size(); ++i) acc += w(o, i, 0) * x[i];
        out[o] = acc;
    }
    return out;
}

} // namespace

TEST_CASE("encode_binary maps 1 and 0 to distinct one-hots") {
    CHECK(exo::encode_binary(1.0) == std::array<double, 2>{1.0, 0.0});
    CHECK(exo::encode_binary(0.0) == std::array<double, 2>{0.0, 1.0});
    for (double b : {0.0, 1.0}) {
        auto e = exo::encode_binary(b);
        CHECK(e[0] + e[1] == 1.0);
    }
    CHECK_THROWS_AS(exo::encode_binary(2.0), EncodingError);
    CHECK_THROWS_AS(exo::encode_binary(0.5), EncodingError);
}

TEST_CASE("encode_structure") {
    CHECK(exo::encode_structure(1) == std::array<double, 5>{0, 1, 0, 0, 0});
    CHECK(exo::encode_structure(0) == std::array<double, 5>{1, 0, 0, 0, 0});
    for (std::size_t c = 0; c < 5; ++c) {
        auto e = exo::encode_structure(c);
        int nonzero = 0;
        for (double v : e) nonzero += v != 0.0;
        CHECK(nonzero == 1);
        CHECK(e[c] == 1.0);
    }
    CHECK_THROWS_AS(exo::encode_structure(5), EncodingError);
}

TEST_CASE("embedded channel counts") {
    CHECK(exo::embedded_channels(ExogenousFlags::all()) == 62);
    CHECK(exo::embedded_channels(ExogenousFlags::none()) == 0);
    auto f = ExogenousFlags::all();
    f.set(exo::Source::maintenance, false);
    CHECK(exo::embedded_channels(f) == 26);
    for (auto s : exo::kAllSources) {
        CHECK(exo::parse_source(exo::to_string(s)) == s);
    }
    CHECK_FALSE(exo::parse_source("turnouts").has_value());
}

TEST_CASE("embedded tensor shape and layout for every flag subset") {
    std::mt19937_64 rng(3);
    auto bundle = random_bundle(8, 13, rng);
    Embedder e(1);
    for (unsigned mask = 0; mask < 64; ++mask) {
        ExogenousFlags flags = ExogenousFlags::none();
        for (std::size_t i = 0; i < 6; ++i) flags.set(exo::kAllSources[i], (mask >> i) & 1u);
        auto z = exo::embed_bundle(e.store, e.params, exo::PassthroughScaling::identity(), bundle,
                                   {1, 6}, flags);
        const std::size_t C = exo::embedded_channels(flags);
        if (C == 0) {
            CHECK(z.empty());
        } else {
            CHECK(z.shape() == nn::Shape{6, C, 13});
        }
    }
}

TEST_CASE("all-zero maintenance with zero bias is the (0,1) column image everywhere") {
    auto bundle = ExogenousBundle::empty(5, 9);
    Embedder e(2);
    auto& w = e.store[e.params.maintenance_weights[0]].value;
    e.store[e.params.maintenance_bias[0]].value.fill(0.0);
    ExogenousFlags only = ExogenousFlags::none();
    only.maintenance = true;
    auto z = exo::embed_bundle(e.store, e.params, exo::PassthroughScaling::identity(), bundle, {0, 5}, only);
    REQUIRE(z.shape() == nn::Shape{5, 36, 9});
    for (std::size_t t = 0; t < 5; ++t)
        for (std::size_t k = 0; k < 9; ++k)
            for (std::size_t o = 0; o < 4; ++o)
                for (std::size_t l = 0; l < 9; ++l) CHECK(z(t, k * 4 + o, l) == w(o, 1, 0));
}

TEST_CASE("identity-like maintenance layer marks the flagged cell") {
    auto bundle = ExogenousBundle::empty(4, 10);
    bundle.maintenance(2, 3, 7) = 1.0;
    Embedder e(4);
    auto& w = e.store[e.params.maintenance_weights[0]].value;
    w.fill(0.0);
    w(0, 0, 0) = 1.0;
    w(1, 1, 0) = 1.0;
    e.store[e.params.maintenance_bias[0]].value.fill(0.0);
    ExogenousFlags only = ExogenousFlags::none();
    only.maintenance = true;
    auto z = exo::embed_bundle(e.store, e.params, exo::PassthroughScaling::identity(), bundle, {0, 4}, only);
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t k = 0; k < 9; ++k)
            for (std::size_t l = 0; l < 10; ++l) {
                const bool hit = t == 2 && k == 3 && l == 7;
                CHECK(z(t, k * 4 + 0, l) == (hit ? 1.0 : 0.0));
                CHECK(z(t, k * 4 + 1, l) == (hit ? 0.0 : 1.0));
                CHECK(z(t, k * 4 + 2, l) == 0.0);
                CHECK(z(t, k * 4 + 3, l) == 0.0);
            }
}

TEST_CASE("full embedding matches a hand-evaluated oracle") {
    std::mt19937_64 rng(11);
    for (bool per_category : {false, true}) {
        auto bundle = random_bundle(9, 12, rng);
        Embedder e(5, per_category);
        auto scaling = exo::PassthroughScaling::fit(bundle, 0, 6);
        const exo::Window win{2, 5};
        auto z = exo::embed_bundle(e.store, e.params, scaling, bundle, win);
        REQUIRE(z.shape() == nn::Shape{5, 62, 12});
        const auto& S = e.store;
        const auto& P = e.params;
        for (std::size_t s = 0; s < 5; ++s) {
            const std::size_t t = win.first + s;
            for (std::size_t l = 0; l < 12; ++l) {
                std::size_t c = 0;
                for (std::size_t k = 0; k < 9; ++k) {
                    const double m = bundle.maintenance(t, k, l);
                    const double x[2] = {m, 1.0 - m};
                    const auto layer = P.maintenance_layer(k);
                    auto y = dense4(S[P.maintenance_weights[layer]].value, S[P.maintenance_bias[layer]].value, x);
                    for (double v : y) CHECK(z(s, c++, l) == doctest::Approx(v).epsilon(1e-14));
                }
                double onehot[5] = {};
                onehot[bundle.under_structure[l]] = 1.0;
                auto ys = dense4(S[P.structure_weights].value, S[P.structure_bias].value, onehot);
                for (double v : ys) CHECK(z(s, c++, l) == doctest::Approx(v).epsilon(1e-14));
                for (std::size_t j = 0; j < 4; ++j) {
                    const double r = bundle.rail_joint(j, l);
                    const double x[2] = {r, 1.0 - r};
                    const auto layer = P.joint_layer(j);
                    auto y = dense4(S[P.joint_weights[layer]].value, S[P.joint_bias[layer]].value, x);
                    for (double v : y) CHECK(z(s, c++, l) == doctest::Approx(v).epsilon(1e-14));
                }
                CHECK(z(s, c++, l) == (bundle.ballast_age(t, l) - scaling.mean[0]) / scaling.scale[0]);
                CHECK(z(s, c++, l) == (bundle.tonnage(t, l) - scaling.mean[1]) / scaling.scale[1]);
                for (std::size_t r = 0; r < 4; ++r)
                    CHECK(z(s, c++, l) == (bundle.rainfall(t, r, l) - scaling.mean[2 + r]) / scaling.scale[2 + r]);
                CHECK(c == 62);
            }
        }
    }
}

TEST_CASE("passthrough block is bit-exact under identity scaling") {
    std::mt19937_64 rng(12);
    auto bundle = random_bundle(7, 20, rng);
    Embedder e(6);
    auto z = exo::embed_bundle(e.store, e.params, exo::PassthroughScaling::identity(), bundle, {1, 6});
    for (std::size_t s = 0; s < 6; ++s)
        for (std::size_t l = 0; l < 20; ++l) {
            CHECK(z(s, 56, l) == bundle.ballast_age(1 + s, l));
            CHECK(z(s, 57, l) == bundle.tonnage(1 + s, l));
            for (std::size_t r = 0; r < 4; ++r) CHECK(z(s, 58 + r, l) == bundle.rainfall(1 + s, r, l));
        }
}

TEST_CASE("fitted scaling standardises the training range") {
    std::mt19937_64 rng(13);
    auto bundle = random_bundle(10, 30, rng);
    auto s = exo::PassthroughScaling::fit(bundle, 0, 6);
    double sum = 0.0, sq = 0.0;
    for (std::size_t t = 0; t < 6; ++t)
        for (std::size_t l = 0; l < 30; ++l) {
            const double v = (bundle.tonnage(t, l) - s.mean[1]) / s.scale[1];
            sum += v;
            sq += v * v;
        }
    CHECK(sum / 180.0 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sq / 180.0 == doctest::Approx(1.0).epsilon(1e-12));
    auto constant = ExogenousBundle::empty(4, 5);
    auto c = exo::PassthroughScaling::fit(constant, 0, 4);
    CHECK(c.scale[0] == 1.0);
    CHECK_THROWS_AS(exo::PassthroughScaling::fit(constant, 2, 3), RangeError);
}

TEST_CASE("spatial-only channels are constant over the window and no input is zero") {
    std::mt19937_64 rng(14);
    for (int rep = 0; rep < 20; ++rep) {
        auto bundle = random_bundle(8, 17, rng);
        Embedder e(static_cast<std::uint64_t>(rep));
        auto z = exo::embed_bundle(e.store, e.params, exo::PassthroughScaling::identity(), bundle, {0, 8});
        for (std::size_t s = 1; s < 8; ++s)
            for (std::size_t c = 36; c < 56; ++c)
                for (std::size_t l = 0; l < 17; ++l) CHECK(z(s, c, l) == z(0, c, l));

        auto in = exo::embedding_inputs(bundle, {0, 8}, ExogenousFlags::all());
        auto column_nonzero = [](const Tensor& x) {
            for (std::size_t l = 0; l < x.dim(1); ++l) {
                double norm = 0.0;
                for (std::size_t c = 0; c < x.dim(0); ++c) norm += std::abs(x(c, l));
                if (norm == 0.0) return false;
            }
            return true;
        };
        for (const auto& step : in.maintenance)
            for (const auto& x : step) CHECK(column_nonzero(x));
        CHECK(column_nonzero(in.structure));
        for (const auto& x : in.joints) CHECK(column_nonzero(x));
    }
}

TEST_CASE("window and bundle errors") {
    auto bundle = ExogenousBundle::empty(5, 8);
    Embedder e(7);
    auto id = exo::PassthroughScaling::identity();
    CHECK_THROWS_AS(exo::embed_bundle(e.store, e.params, id, bundle, {2, 4}), RangeError);
    CHECK_THROWS_AS(exo::embed_bundle(e.store, e.params, id, bundle, {0, 0}), RangeError);
    bundle.maintenance(1, 0, 3) = 2.0;
    CHECK_THROWS_AS(exo::embed_bundle(e.store, e.params, id, bundle, {0, 3}), ValidationError);
    // The bad cell is outside this window.
    CHECK_NOTHROW(exo::embed_bundle(e.store, e.params, id, bundle, {2, 3}));
}

TEST_CASE("validation report lines") {
    auto bundle = ExogenousBundle::empty(3, 6);
    CHECK(exo::validate(bundle).empty());
    bundle.maintenance(2, 1, 4) = 2.0;
    bundle.under_structure[1] = 7;
    bundle.under_structure[5] = 0;
    bundle.ballast_age(0, 5) = 3.0;
    bundle.tonnage(1, 2) = -1.0;
    bundle.rail_joint(0, 0) = 0.5;
    bundle.rainfall(0, 3, 1) = std::nan("");
    auto issues = exo::validate(bundle);
    REQUIRE(issues.size() == 6);
    CHECK(issues[0].to_line().rfind("maintenance 2 4 ", 0) == 0);
    CHECK(issues[1].to_line().rfind("under_structure - 1 ", 0) == 0);
    CHECK(issues[2].to_line().rfind("rail_joint - 0 ", 0) == 0);
    CHECK(issues[3].to_line().rfind("ballast_age 0 5 ", 0) == 0);
    CHECK(issues[4].to_line().rfind("tonnage 1 2 ", 0) == 0);
    CHECK(issues[5].to_line().rfind("rainfall 0 1 ", 0) == 0);
    CHECK_THROWS_WITH_AS(exo::require_valid(bundle), doctest::Contains("maintenance 2 4"), ValidationError);

    auto misshapen = ExogenousBundle::empty(3, 6);
    misshapen.tonnage = Tensor({3, 5});
    REQUIRE(exo::validate(misshapen).size() == 1);
    CHECK(exo::validate(misshapen)[0].source == "tonnage");
}

TEST_CASE("bundle slice keeps spatial sources and cuts temporal ones") {
    std::mt19937_64 rng(15);
    auto bundle = random_bundle(6, 7, rng);
    auto s = bundle.slice(2, 3);
    CHECK(s.inspections == 3);
    CHECK(s.under_structure == bundle.under_structure);
    CHECK(testutil::bit_equal(s.rail_joint, bundle.rail_joint));
    for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t l = 0; l < 7; ++l) {
            CHECK(s.tonnage(t, l) == bundle.tonnage(t + 2, l));
            CHECK(s.maintenance(t, 8, l) == bundle.maintenance(t + 2, 8, l));
            CHECK(s.rainfall(t, 3, l) == bundle.rainfall(t + 2, 3, l));
        }
    CHECK_THROWS_AS(bundle.slice(4, 3), RangeError);
}

TEST_CASE("embedding layers receive gradient") {
    std::mt19937_64 rng(16);
    auto bundle = random_bundle(4, 10, rng);
    Embedder e(8);
    const auto before = e.store[e.params.maintenance_weights[0]].value;
    nn::AdamState state(e.store, nn::AdamConfig{});
    nn::Tape tape;
    auto steps = exo::embed_bundle(tape, e.store, e.params, exo::PassthroughScaling::identity(), bundle, {0, 4});
    std::vector<nn::Var> losses;
    for (auto& z : steps) losses.push_back(nn::ops::mse_loss(z, tape.constant(Tensor(z.value().shape(), 0.3))));
    auto grads = tape.backward(nn::ops::sum(losses));
    REQUIRE(grads.has(e.params.maintenance_weights[0]));
    REQUIRE(grads.has(e.params.structure_weights));
    REQUIRE(grads.has(e.params.joint_bias[0]));
    nn::adam_step(e.store, grads.densify(e.store), state);
    const auto& after = e.store[e.params.maintenance_weights[0]].value;
    CHECK(testutil::max_abs_diff(before, after) > 0.0);
}
