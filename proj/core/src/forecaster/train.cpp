#include "trackcast/forecaster/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "trackcast/errors.hpp"
#include "trackcast/nn/ops.hpp"

namespace trackcast::forecaster {

using nn::Tensor;

void TrainConfig::validate() const {
    if (epochs == 0) throw ConfigurationError("training.epochs must be at least 1");
    adam.validate();
}

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("TRACKCAST_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<std::size_t>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
// thrown by any call is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct WindowGrad {
    double loss = 0.0;
    nn::Gradients grads;
};

WindowGrad window_gradient(const ForecastModel& model, const trackgen::TrackDataset& data,
                           trackgen::WindowIndex w) {
    nn::Tape tape;
    nn::Var pred = model.forward(tape, data, w);
    nn::Var loss = nn::ops::mse_loss(pred, tape.constant(target_at(data, w.target)));
    return {loss.value()[0], tape.backward(loss)};
}

void check_positions(const ForecastModel& model, const trackgen::TrackDataset& data, const char* what) {
    if (data.positions() != model.config().positions) {
        throw DimensionError(std::string(what) + " has " + std::to_string(data.positions()) +
                             " positions, model expects " + std::to_string(model.config().positions));
    }
}

} // namespace

std::vector<Tensor> predict_windows(const ForecastModel& model, const trackgen::TrackDataset& data,
                                    std::size_t threads) {
    check_positions(model, data, "dataset");
    const auto windows = trackgen::make_windows(data, model.config().window);
    std::vector<Tensor> out(windows.size());
    parallel_for(windows.size(), resolve_threads(threads),
                 [&](std::size_t i) { out[i] = model.forecast(data, windows[i]); });
    return out;
}

double evaluate_loss(const ForecastModel& model, const trackgen::TrackDataset& data, std::size_t threads) {
    const auto windows = trackgen::make_windows(data, model.config().window);
    const auto preds = predict_windows(model, data, threads);
    double total = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const Tensor y = target_at(data, windows[i].target);
        double sq = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double d = preds[i][k] - y[k];
            sq += d * d;
        }
        total += sq / static_cast<double>(y.size());
    }
    return total / static_cast<double>(windows.size());
}

TrainResult train(ForecastModel& model, const trackgen::TrackDataset& train_set,
                  const trackgen::TrackDataset& validation, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    config.validate();
    check_positions(model, train_set, "training split");
    check_positions(model, validation, "validation split");
    const std::size_t tau = model.config().window;
    const auto windows = trackgen::make_windows(train_set, tau);
    trackgen::make_windows(validation, tau);
    const std::size_t threads = resolve_threads(config.threads);

    model.fit_scaling(train_set);
    auto& store = model.parameters();
    nn::AdamState adam(store, config.adam);
    auto shuffle_rng = nn::Rng::stream(config.seed, "shuffle");

    const std::size_t batch = config.batch_size == 0 ? windows.size() : std::min(config.batch_size, windows.size());
    std::vector<std::size_t> order(windows.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    std::vector<Tensor> best;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.batch_size != 0) std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += batch) {
            const std::size_t count = std::min(batch, order.size() - begin);
            std::vector<Tensor> grads(store.size());
            for (std::size_t id = 0; id < store.size(); ++id) grads[id] = Tensor::zeros_like(store[id].value);
            // Work in groups of `threads` windows and reduce each group in
            // window order, so the sum is independent of the thread count.
            for (std::size_t g = 0; g < count; g += threads) {
                const std::size_t n = std::min(threads, count - g);
                std::vector<WindowGrad> parts(n);
                parallel_for(n, threads, [&](std::size_t i) {
                    parts[i] = window_gradient(model, train_set, windows[order[begin + g + i]]);
                });
                for (auto& part : parts) {
                    if (!std::isfinite(part.loss)) {
                        throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch), epoch);
                    }
                    loss_sum += part.loss;
                    for (std::size_t id = 0; id < store.size(); ++id)
                        if (part.grads.has(id)) grads[id] += part.grads[id];
                }
            }
            for (auto& g : grads) g *= 1.0 / static_cast<double>(count);
            try {
                nn::adam_step(store, grads, adam);
            } catch (const NumericError& e) {
                throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch), epoch);
            }
        }
        EpochLoss rec{epoch, loss_sum / static_cast<double>(windows.size()), evaluate_loss(model, validation, threads)};
        if (!std::isfinite(rec.val_loss)) {
            throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch), epoch);
        }
        result.history.push_back(rec);
        if (best.empty() || rec.val_loss < result.best_val_loss) {
            result.best_val_loss = rec.val_loss;
            result.best_epoch = epoch;
            best.clear();
            for (const auto& p : store) best.push_back(p.value);
        }
        if (on_epoch) on_epoch(rec);
    }
    for (std::size_t id = 0; id < store.size(); ++id) store[id].value = best[id];
    return result;
}

void write_loss_csv(const std::vector<EpochLoss>& history, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << "epoch,train_loss,val_loss\n";
    for (const auto& r : history) {
        out << r.epoch << ',' << trackgen::format_real(r.train_loss) << ',' << trackgen::format_real(r.val_loss) << '\n';
    }
}

} // namespace trackcast::forecaster
