#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "trackcast/forecaster/model.hpp"
#include "trackcast/nn/adam.hpp"

namespace trackcast::forecaster {

struct TrainConfig {
    std::size_t epochs = 2000;
    nn::AdamConfig adam;
    // 0 trains full batch: one Adam step per epoch over every training window.
    std::size_t batch_size = 0;
    std::uint64_t seed = 1;
    // Worker threads for per-window gradients; 0 reads TRACKCAST_THREADS and
    // falls back to the hardware concurrency. Results do not depend on it.
    std::size_t threads = 0;

    void validate() const;
};

struct EpochLoss {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    std::vector<EpochLoss> history;
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
};

using EpochCallback = std::function<void(const EpochLoss&)>;

// Minimises the mean squared error of the one-step forecast over every
// sliding window of `train` with Adam, evaluates `validation` after each
// epoch and leaves the model holding the parameters with the lowest
// validation loss. Scalings are fitted on `train` first. A non-finite loss
// or gradient throws TrainingError naming the epoch.
TrainResult train(ForecastModel& model, const trackgen::TrackDataset& train,
                  const trackgen::TrackDataset& validation, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Mean over windows of the per-window MSE.
double evaluate_loss(const ForecastModel& model, const trackgen::TrackDataset& data, std::size_t threads = 0);

// Forecasts for every window of `data`, in window order.
std::vector<nn::Tensor> predict_windows(const ForecastModel& model, const trackgen::TrackDataset& data,
                                        std::size_t threads = 0);

// "epoch,train_loss,val_loss" with shortest round-trip reals.
void write_loss_csv(const std::vector<EpochLoss>& history, const std::filesystem::path& path);

std::size_t resolve_threads(std::size_t requested);

} // namespace trackcast::forecaster
