// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "trackcast/cells/cells.hpp"
#include "trackcast/errors.hpp"
#include "trackcast/evalkit/ablation.hpp"
#include "trackcast/evalkit/metrics.hpp"
#include "trackcast/evalkit/report.hpp"
#include "trackcast/exo/embedding.hpp"
#include "trackcast/forecaster/linear.hpp"
#include "trackcast/forecaster/train.hpp"
#include "trackcast/nn/gradcheck.hpp"
#include "trackcast/nn/ops.hpp"
#include "trackcast/trackgen/simulator.hpp"

using namespace trackcast;
using nn::Tensor;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

trackgen::TrackDataset toy_dataset(std::size_t L, std::size_t T, std::uint64_t seed) {
    trackgen::TrackScenario sc;
    sc.positions = L;
    sc.inspections = T;
    sc.seed = seed;
    sc.weak_spot_density = 0.1;
    return trackgen::simulate(sc);
}

// ---------------------------------------------------------------------------
// Desk-scale configuration shared by the directional criteria.

forecaster::ModelConfig desk_model(cells::CellKind kind, std::uint64_t seed) {
    forecaster::ModelConfig m;
    m.variant = kind;
    m.layers = 1;
    m.hidden = 8;
    m.positions = 512;
    m.seed = seed;
    return m;
}

forecaster::TrainConfig desk_training(std::uint64_t seed) {
    forecaster::TrainConfig t;
    t.epochs = 30;
    t.batch_size = 4;
    t.adam.learning_rate = 3e-3;
    t.seed = seed;
    return t;
}

trackgen::TrackScenario maintenance_heavy(std::uint64_t seed) {
    trackgen::TrackScenario sc;
    sc.seed = seed;
    sc.base_rate = 0.002;
    sc.weak_spot_density = 0.04;
    sc.trigger_probability = 0.5;
    sc.preventive_probability = 0.3;
    return sc;
}

// ---------------------------------------------------------------------------
// 1. Full-model gradient check.

Outcome gradient_correctness() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::string worst_where;
    std::size_t entries = 0;
    std::mt19937_64 rng(1001);
    const cells::CellKind kinds[] = {cells::CellKind::convlstm, cells::CellKind::lstm, cells::CellKind::gru};
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        for (auto kind : kinds) {
            forecaster::ModelConfig cfg;
            cfg.variant = kind;
            cfg.window = 3;
            cfg.layers = 2;
            cfg.hidden = 2;
            cfg.positions = 16;
            cfg.per_category_embedding = seed % 2 == 0;
            cfg.seed = seed;
            forecaster::ForecastModel model(cfg);
            std::uniform_real_distribution<double> mean(-1.0, 1.0), scale(0.5, 2.0);
            for (auto& v : model.input_scaling.mean) v = mean(rng);
            for (auto& v : model.input_scaling.scale) v = scale(rng);
            for (auto& v : model.passthrough_scaling.mean) v = mean(rng);
            for (auto& v : model.passthrough_scaling.scale) v = scale(rng);
            const auto ds = toy_dataset(16, 6, seed);
            const trackgen::WindowIndex w{1, 4};
            const Tensor target = forecaster::target_at(ds, w.target);
            auto loss = [&](nn::Tape& tape) {
                return nn::ops::mse_loss(model.forward(tape, ds, w), tape.constant(target));
            };
            nn::Tape probe;
            const double magnitude = std::abs(loss(probe).value()[0]);
            nn::GradCheckOptions opt;
            opt.step = 1e-5;
            // Central differences carry ~eps*|L|/h of roundoff, so gradients
            // below 1e-6*|L| are compared absolutely rather than relatively.
            opt.floor = 1e-6 * std::max(1.0, magnitude);
            opt.max_entries_per_parameter = 12;
            opt.seed = seed;
            const auto r = nn::check_gradients(model.parameters(), loss, opt);
            entries += r.entries_checked;
            if (r.max_relative_error > worst) {
                worst = r.max_relative_error;
                worst_where = std::string(cells::to_string(kind)) + " seed " + std::to_string(seed) + " " +
                              r.worst_parameter;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-4 && secs < 300.0, "max rel err " + sci(worst) + " (" + worst_where + ") over " +
                                              std::to_string(entries) + " entries, 300 models, " + fmt(secs, 1) + " s"};
}

// ---------------------------------------------------------------------------
// 2. ConvLSTM cell against a scalar transcription of its equations.

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Outcome cell_fidelity() {
    std::mt19937_64 rng(2002);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    double worst = 0.0;
    for (int draw = 0; draw < 1000; ++draw) {
        nn::ParameterStore store;
        nn::Rng init(static_cast<std::uint64_t>(draw));
        const auto p = cells::ConvLSTMCellParams::create(store, "cell", 1, 1, 1, 1, init);
        for (auto& param : store)
            for (auto& v : param.value.values()) v = d(rng);
        const double x = d(rng), h = d(rng), c = d(rng);
        const auto got = cells::convlstm_step(Tensor({1, 1}, x), {Tensor({1, 1}, h), Tensor({1, 1}, c)}, store, p);

        const auto& wx = store[p.input_kernel].value;
        const auto& wh = store[p.hidden_kernel].value;
        const auto& b = store[p.bias].value;
        const double wci = store[p.peephole_i].value[0], wcf = store[p.peephole_f].value[0],
                     wco = store[p.peephole_o].value[0];
        const double i = logistic(wx[0] * x + wh[0] * h + wci * c + b[0]);
        const double f = logistic(wx[1] * x + wh[1] * h + wcf * c + b[1]);
        const double c_next = f * c + i * std::tanh(wx[2] * x + wh[2] * h + b[2]);
        const double o = logistic(wx[3] * x + wh[3] * h + wco * c_next + b[3]);
        const double h_next = o * std::tanh(c_next);
        worst = std::max({worst, std::abs(got.cell[0] - c_next), std::abs(got.hidden[0] - h_next)});
    }

    // Zero parameters: every gate is 0.5 and the candidate is 0, so C halves
    // and H = tanh(C / 2) / 2 exactly.
    bool zero_ok = true;
    nn::ParameterStore store;
    nn::Rng init(7);
    const auto p = cells::ConvLSTMCellParams::create(store, "cell", 3, 4, 5, 9, init);
    for (auto& param : store) param.value.fill(0.0);
    for (int rep = 0; rep < 50; ++rep) {
        Tensor x({3, 9}), h({4, 9}), c({4, 9});
        for (auto* t : {&x, &h, &c})
            for (auto& v : t->values()) v = 4.0 * d(rng);
        const auto next = cells::convlstm_step(x, {h, c}, store, p);
        for (std::size_t k = 0; k < c.size(); ++k) {
            zero_ok &= next.cell[k] == 0.5 * c[k];
            zero_ok &= next.hidden[k] == 0.5 * std::tanh(0.5 * c[k]);
        }
    }
    return {worst < 1e-12 && zero_ok,
            "max abs err " + sci(worst) + " over 1000 draws; zero-parameter halving " + (zero_ok ? "exact" : "violated")};
}

// ---------------------------------------------------------------------------
// 3. Chord-offset algebra at sigma = 0, exact on dyadic inputs.

Outcome chord_algebra() {
    std::mt19937_64 rng(3003);
    std::uniform_int_distribution<int> len(24, 200), small(-512, 512), scalar(-16, 16);
    std::size_t affine_bad = 0, linear_bad = 0, impulse_bad = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t L = static_cast<std::size_t>(len(rng));
        const double a = small(rng) / 256.0, b = small(rng) / 1024.0;
        std::vector<double> line(L), u(L), w(L), mix(L);
        for (std::size_t l = 0; l < L; ++l) line[l] = a + b * static_cast<double>(l);
        for (double v : trackgen::chord_offset(line)) affine_bad += v != 0.0;

        const double alpha = scalar(rng) / 8.0, beta = scalar(rng) / 8.0;
        for (std::size_t l = 0; l < L; ++l) {
            u[l] = small(rng) / 256.0;
            w[l] = small(rng) / 256.0;
            mix[l] = alpha * u[l] + beta * w[l];
        }
        const auto vu = trackgen::chord_offset(u), vw = trackgen::chord_offset(w), vm = trackgen::chord_offset(mix);
        for (std::size_t l = 0; l < L; ++l) linear_bad += vm[l] != alpha * vu[l] + beta * vw[l];

        // Impulse away from the extended ends.
        std::uniform_int_distribution<std::size_t> where(11, L - 12);
        const std::size_t l0 = where(rng);
        std::vector<double> delta(L, 0.0);
        delta[l0] = 1.0;
        const auto vi = trackgen::chord_offset(delta);
        for (std::size_t l = 0; l < L; ++l) {
            const double want = l == l0 ? 1.0 : (l + 5 == l0 || l == l0 + 5) ? -0.5 : 0.0;
            impulse_bad += vi[l] != want;
        }
    }
    return {affine_bad + linear_bad + impulse_bad == 0,
            "100 cases; mismatches affine " + std::to_string(affine_bad) + ", linearity " +
                std::to_string(linear_bad) + ", impulse " + std::to_string(impulse_bad)};
}

// ---------------------------------------------------------------------------
// 4. Metrics against scalar loops.

Outcome metric_oracles() {
    std::mt19937_64 rng(4004);
    std::uniform_int_distribution<std::size_t> size(2, 400);
    std::normal_distribution<double> y(-2.0, 3.0), e(0.0, 0.8);
    double worst = 0.0;
    std::size_t accuracy_bad = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = size(rng);
        std::vector<double> obs(n), pred(n);
        evalkit::PairSet set;
        for (std::size_t i = 0; i < n; ++i) {
            obs[i] = y(rng);
            pred[i] = obs[i] + e(rng);
            set.add(obs[i], pred[i], {i, 0, 0});
        }
        long double sq = 0, mean = 0, tot = 0;
        for (std::size_t i = 0; i < n; ++i) sq += (static_cast<long double>(obs[i]) - pred[i]) * (obs[i] - static_cast<long double>(pred[i]));
        for (std::size_t i = 0; i < n; ++i) mean += obs[i];
        mean /= n;
        for (std::size_t i = 0; i < n; ++i) tot += (obs[i] - mean) * (obs[i] - mean);
        const double rmse = static_cast<double>(std::sqrt(sq / n));
        const double r2 = static_cast<double>(1 - sq / tot);
        worst = std::max({worst, std::abs(evalkit::rmse(set) - rmse), std::abs(evalkit::r_squared(set) - r2)});
        for (double eps : {0.3, 0.5, 1.0}) {
            std::size_t inside = 0;
            for (std::size_t i = 0; i < n; ++i) inside += std::abs(obs[i] - pred[i]) < eps;
            accuracy_bad += std::abs(evalkit::accuracy(set, eps) - 100.0 * static_cast<double>(inside) / n) > 1e-12;
        }
    }
    // |y - yhat| == epsilon is outside.
    evalkit::PairSet edge;
    edge.add(0.5, 0.0, {0, 0, 0});
    edge.add(-1.0, 0.0, {1, 0, 0});
    edge.add(0.3, 0.0, {2, 0, 0});
    edge.add(2.0, 2.0, {3, 0, 0});
    const bool boundary = evalkit::accuracy(edge, 0.5) == 50.0 && evalkit::accuracy(edge, 1.0) == 75.0 &&
                          evalkit::accuracy(edge, 0.3) == 25.0;
    return {worst <= 1e-12 && accuracy_bad == 0 && boundary,
            "max rmse/r2 deviation " + sci(worst) + ", accuracy mismatches " + std::to_string(accuracy_bad) +
                " over 1000 sets; boundary " + (boundary ? "excluded" : "included")};
}

// ---------------------------------------------------------------------------
// 5-7. Directional reproduction at desk scale.

struct TrainedModel {
    forecaster::ForecastModel model;
    evalkit::EvalReport report;
};

struct DeskRun {
    trackgen::TrackDataset data;
    trackgen::Splits splits;
    std::map<cells::CellKind, TrainedModel> models;
    evalkit::EvalReport linear;
};

std::map<std::uint64_t, DeskRun>& desk_cache() {
    static std::map<std::uint64_t, DeskRun> cache;
    return cache;
}

DeskRun& desk_run(std::uint64_t seed, const std::vector<cells::CellKind>& kinds) {
    auto& cache = desk_cache();
    auto it = cache.find(seed);
    if (it == cache.end()) {
        trackgen::TrackScenario sc;
        sc.seed = seed;
        auto data = trackgen::simulate(sc);
        auto splits = trackgen::split_by_ratio(data, 0.60, 0.15);
        const auto window = desk_model(cells::CellKind::convlstm, seed).window;
        auto linear = evalkit::evaluate_pairs("linear", evalkit::linear_pairs(splits.test, window), 512, {});
        it = cache.emplace(seed, DeskRun{std::move(data), std::move(splits), {}, std::move(linear)}).first;
    }
    auto& run = it->second;
    for (auto kind : kinds) {
        if (run.models.count(kind)) continue;
        forecaster::ForecastModel model(desk_model(kind, seed));
        forecaster::train(model, run.splits.train, run.splits.validation, desk_training(seed));
        auto report = evalkit::evaluate_pairs(std::string(cells::to_string(kind)),
                                              evalkit::model_pairs(model, run.splits.test), 512, {});
        run.models.emplace(kind, TrainedModel{std::move(model), std::move(report)});
    }
    return run;
}

Outcome directional_comparison() {
    const auto t0 = std::chrono::steady_clock::now();
    int wins = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto& run = desk_run(seed, {cells::CellKind::convlstm, cells::CellKind::gru, cells::CellKind::lstm});
        const double conv = *run.models.at(cells::CellKind::convlstm).report.entire.rmse;
        const double gru = *run.models.at(cells::CellKind::gru).report.entire.rmse;
        const double lstm = *run.models.at(cells::CellKind::lstm).report.entire.rmse;
        const double lin = *run.linear.entire.rmse;
        const bool win = conv < gru && conv < lstm && conv < lin;
        wins += win;
        detail += "seed " + std::to_string(seed) + " convlstm " + fmt(conv) + " gru " + fmt(gru) + " lstm " +
                  fmt(lstm) + " linear " + fmt(lin) + (win ? " win; " : " loss; ");
    }
    const double secs = seconds_since(t0);
    return {wins >= 2 && secs < 7200.0, detail + std::to_string(wins) + "/3 seeds, " + fmt(secs, 0) + " s"};
}

Outcome ablation_gap() {
    const auto t0 = std::chrono::steady_clock::now();
    int hits = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto data = trackgen::simulate(maintenance_heavy(seed));
        const auto splits = trackgen::split_by_ratio(data, 0.60, 0.15);
        const auto rows = evalkit::run_ablation(desk_model(cells::CellKind::convlstm, seed), desk_training(seed), splits,
                                                evalkit::parse_cases("with-all,without-maintenance"), {});
        if (!rows[0].ok() || !rows[1].ok()) {
            detail += "seed " + std::to_string(seed) + " failed: " + rows[0].error + rows[1].error + "; ";
            continue;
        }
        const auto& with = rows[0].report->subset(-4.0);
        const auto& without = rows[1].report->subset(-4.0);
        if (!with.rmse || !without.rmse) {
            detail += "seed " + std::to_string(seed) + " empty alpha=-4 subset; ";
            continue;
        }
        const double gap = *without.rmse / *with.rmse - 1.0;
        hits += gap >= 0.10;
        detail += "seed " + std::to_string(seed) + " with-all " + fmt(*with.rmse) + " without-maintenance " +
                  fmt(*without.rmse) + " (n=" + std::to_string(with.count) + ", gap " + fmt(100.0 * gap, 1) + "%); ";
    }
    return {hits >= 2, detail + std::to_string(hits) + "/3 seeds >= 10%, " + fmt(seconds_since(t0), 0) + " s"};
}

Outcome frequency_correlation() {
    auto& run = desk_run(1, {cells::CellKind::convlstm});
    const auto& conv = run.models.at(cells::CellKind::convlstm).report;
    const auto rows = evalkit::maintenance_frequency_report(run.data, run.linear.position_rmse, conv.position_rmse);
    std::vector<double> freq, gain;
    for (const auto& r : rows) {
        freq.push_back(r.frequency);
        gain.push_back(r.rmse_a - r.rmse_b);
    }
    const double rho = evalkit::spearman(freq, gain);
    std::size_t maintained = 0;
    for (double f : freq) maintained += f > 0.0;
    return {rho > 0.0, "spearman " + fmt(rho) + " over 512 positions (" + std::to_string(maintained) +
                           " with maintenance), default scenario seed 1"};
}

// ---------------------------------------------------------------------------
// 8. CLI determinism.

int run_tool(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + std::string(TRACKCAST_TOOL) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().filename() == "run.log") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[fs::relative(e.path(), dir).string()] = ss.str();
    }
    return out;
}

Outcome cli_determinism() {
    const auto root = fs::temp_directory_path() / "trackcast_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);
    std::ofstream(root / "config.json") << R"({
  "seed": 11,
  "scenario": {"positions": 96, "inspections": 48, "weak_spot_density": 0.06},
  "model": {"window": 4, "layers": 1, "hidden": 4, "kernel_width": 5, "output_width": 5},
  "training": {"epochs": 40, "batch_size": 4, "learning_rate": 0.003}
})";
    const std::string cfg = (root / "config.json").string();
    int failures = 0;
    for (const char* run : {"a", "b"}) {
        const auto dir = root / run;
        const std::string env = std::string(run) == "a" ? "TRACKCAST_THREADS=1" : "TRACKCAST_THREADS=3";
        failures += run_tool("simulate --config " + cfg + " --out " + (dir / "sim").string(), env) != 0;
        failures += run_tool("train --config " + cfg + " --dataset " + (dir / "sim" / "dataset").string() + " --out " +
                                 (dir / "train").string(),
                             env) != 0;
        failures += run_tool("evaluate --config " + cfg + " --dataset " + (dir / "sim" / "dataset").string() +
                                 " --checkpoint " + (dir / "train" / "model.ckpt").string() + " --out " +
                                 (dir / "eval").string(),
                             env) != 0;
    }
    if (failures) return {false, std::to_string(failures) + " commands exited non-zero"};
    const auto a = tree(root / "a"), b = tree(root / "b");
    std::size_t differing = 0;
    for (const auto& [name, bytes] : a) differing += !b.count(name) || b.at(name) != bytes;
    differing += a.size() != b.size();
    const bool key_files = a.count("train/model.ckpt") && a.count("eval/comparison.csv") &&
                           a.count("eval/frequency_scatter.csv") && a.count("train/loss.csv");
    fs::remove_all(root);
    return {differing == 0 && key_files, std::to_string(a.size()) + " files compared (checkpoint, loss, reports, dataset), " +
                                             std::to_string(differing) + " differ; thread counts 1 vs 3"};
}

// ---------------------------------------------------------------------------
// 9. Embedding contract on randomized bundles.

Outcome embedding_contract() {
    std::mt19937_64 rng(9009);
    std::uniform_int_distribution<std::size_t> tau_d(1, 8), len_d(1, 40), extra(0, 5);
    std::bernoulli_distribution flag(0.3);
    std::uniform_int_distribution<int> cat(0, 4);
    std::uniform_real_distribution<double> pos(0.0, 40.0);
    std::size_t shape_bad = 0, zero_inputs = 0, drift = 0, bundles = 0;
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t tau = tau_d(rng), L = len_d(rng), T = tau + extra(rng);
        auto b = exo::ExogenousBundle::empty(T, L);
        for (auto& v : b.maintenance.values()) v = flag(rng) ? 1.0 : 0.0;
        for (auto& v : b.rail_joint.values()) v = flag(rng) ? 1.0 : 0.0;
        for (auto& s : b.under_structure) s = static_cast<std::uint8_t>(cat(rng));
        for (auto& v : b.tonnage.values()) v = pos(rng);
        for (auto& v : b.rainfall.values()) v = pos(rng);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t l = 0; l < L; ++l) b.ballast_age(t, l) = b.under_structure[l] == 0 ? 0.0 : pos(rng);
        // Some bundles are entirely quiet: no work, no joints.
        if (rep % 5 == 0) {
            b.maintenance.fill(0.0);
            b.rail_joint.fill(0.0);
        }
        ++bundles;
        const std::size_t first = T - tau;
        nn::ParameterStore store;
        auto init = nn::Rng::stream(static_cast<std::uint64_t>(rep), "init");
        const auto params = exo::EmbeddingParams::create(store, "embed", init, rep % 2 == 1);
        const auto z = exo::embed_bundle(store, params, exo::PassthroughScaling::identity(), b, {first, tau});
        shape_bad += z.shape() != nn::Shape{tau, 62, L};
        if (z.shape() != nn::Shape{tau, 62, L}) continue;
        // Structure (4) and joint (16) channels are 36..55.
        for (std::size_t s = 1; s < tau; ++s)
            for (std::size_t c = 36; c < 56; ++c)
                for (std::size_t l = 0; l < L; ++l) drift += z(s, c, l) != z(0, c, l);

        const auto in = exo::embedding_inputs(b, {first, tau}, exo::ExogenousFlags::all());
        auto zero_columns = [](const Tensor& x) {
            std::size_t n = 0;
            for (std::size_t l = 0; l < x.dim(1); ++l) {
                double norm = 0.0;
                for (std::size_t c = 0; c < x.dim(0); ++c) norm += std::abs(x(c, l));
                n += norm == 0.0;
            }
            return n;
        };
        for (const auto& step : in.maintenance)
            for (const auto& x : step) zero_inputs += zero_columns(x);
        zero_inputs += zero_columns(in.structure);
        for (const auto& x : in.joints) zero_inputs += zero_columns(x);
    }
    return {shape_bad + zero_inputs + drift == 0,
            std::to_string(bundles) + " bundles; shape errors " + std::to_string(shape_bad) + ", zero input columns " +
                std::to_string(zero_inputs) + ", spatial channels varying over tau " + std::to_string(drift)};
}

// ---------------------------------------------------------------------------
// 10. Spatial-influence locality.

Outcome locality() {
    const std::size_t L = 48;
    std::size_t outside_changes = 0, unchanged = 0, cases = 0;
    std::size_t conv_reach_hits = 0, conv_reach_checks = 0;
    std::mt19937_64 rng(10010);
    std::normal_distribution<double> bump(0.0, 1.0);
    for (auto kind : {cells::CellKind::convlstm, cells::CellKind::lstm, cells::CellKind::gru}) {
        forecaster::ModelConfig cfg;
        cfg.variant = kind;
        cfg.window = 3;
        cfg.layers = 2;
        cfg.hidden = 2;
        cfg.kernel_width = 3;
        cfg.output_width = 3;
        cfg.positions = L;
        cfg.seed = 5;
        forecaster::ForecastModel model(cfg);
        const auto ds = toy_dataset(L, 8, 12);
        // Raw millimetre inputs saturate the gates to exact 0/1 in double.
        model.fit_scaling(ds);
        const exo::Window win{2, 3};
        const Tensor x0 = forecaster::input_window(ds, 2, 3);
        const Tensor y0 = model.forecast(x0, ds.exogenous, win);
        for (std::size_t step = 0; step < 3; ++step) {
            const std::size_t radius = cfg.influence_radius(step);
            for (std::size_t l0 = 0; l0 < L; ++l0) {
                for (int source = 0; source < 2; ++source) {
                    Tensor x = x0;
                    auto bundle = ds.exogenous;
                    if (source == 0) {
                        x(step, static_cast<std::size_t>(rng() % 10), l0) += bump(rng);
                    } else {
                        auto& m = bundle.maintenance(2 + step, rng() % 9, l0);
                        m = 1.0 - m;
                    }
                    const Tensor y = model.forecast(x, bundle, win);
                    ++cases;
                    bool any = false;
                    std::size_t reach = 0;
                    for (std::size_t c = 0; c < 2; ++c)
                        for (std::size_t l = 0; l < L; ++l) {
                            if (y(c, l) == y0(c, l)) continue;
                            any = true;
                            const std::size_t d = l > l0 ? l - l0 : l0 - l;
                            reach = std::max(reach, d);
                            outside_changes += d > radius;
                        }
                    unchanged += !any;
                    if (kind == cells::CellKind::convlstm && l0 >= radius && l0 + radius < L) {
                        ++conv_reach_checks;
                        conv_reach_hits += reach == radius;
                    }
                }
            }
        }
    }
    return {outside_changes == 0 && unchanged == 0,
            std::to_string(cases) + " perturbations (irregularity and maintenance inputs, 3 variants); changes outside "
                "the radius " + std::to_string(outside_changes) + ", no-effect cases " + std::to_string(unchanged) +
                "; convlstm radius attained in " + std::to_string(conv_reach_hits) + "/" +
                std::to_string(conv_reach_checks) + " interior cases"};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"gradient correctness", gradient_correctness},
        {"cell fidelity", cell_fidelity},
        {"chord-offset algebra", chord_algebra},
        {"metric oracles", metric_oracles},
        {"directional model comparison", directional_comparison},
        {"maintenance ablation gap", ablation_gap},
        {"maintenance frequency correlation", frequency_correlation},
        {"cli determinism", cli_determinism},
        {"embedding contract", embedding_contract},
        {"spatial-influence locality", locality},
    };
    std::set<std::size_t> selected;
    for (int i = 1; i < argc; ++i) selected.insert(static_cast<std::size_t>(std::atoi(argv[i])));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        if (!selected.empty() && !selected.count(k + 1)) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << (k + 1) << "] " << criteria[k].first << ": " << o.detail
                  << " [" << fmt(seconds_since(t0), 1) << " s]" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
