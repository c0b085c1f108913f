#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "trackcast/cells/cells.hpp"
#include "trackcast/exo/embedding.hpp"
#include "trackcast/nn/parameters.hpp"
#include "trackcast/nn/tape.hpp"
#include "trackcast/trackgen/dataset.hpp"

namespace trackcast::forecaster {

struct ModelConfig {
    cells::CellKind variant = cells::CellKind::convlstm;
    std::size_t window = 6;         // tau, inspections of history
    std::size_t layers = 2;
    std::size_t hidden = 16;
    std::size_t kernel_width = 11;  // ConvLSTM kernels
    std::size_t output_width = 11;  // final convolution; the pointwise variants always use 1
    std::size_t positions = 512;
    exo::ExogenousFlags flags;
    bool per_category_embedding = false;
    std::uint64_t seed = 1;

    // Throws ConfigurationError naming the field.
    void validate() const;

    std::size_t input_channels() const;
    std::size_t effective_output_width() const;
    // Furthest distance (m) a change at window step s can move the forecast.
    std::size_t influence_radius(std::size_t step) const;
    // Largest such distance over the window (step 0).
    std::size_t receptive_radius() const { return influence_radius(0); }

    bool operator==(const ModelConfig&) const = default;
};

// Per-channel standardisation of the irregularity inputs.
struct InputScaling {
    std::array<double, trackgen::kIrregularityChannels> mean{};
    std::array<double, trackgen::kIrregularityChannels> scale{1.0, 1.0, 1.0, 1.0, 1.0,
                                                                1.0, 1.0, 1.0, 1.0, 1.0};

    static InputScaling identity() { return {}; }
    // Mean and population standard deviation over all inspections of `data`.
    static InputScaling fit(const nn::Tensor& irregularities);

    bool operator==(const InputScaling&) const = default;
};

// Embedding, recurrent stack and output convolution. The forecast for
// inspection t + 1 is produced from inspections t - tau + 1 .. t:
//   input_s = [standardised x_s ; embedded z_s]       (10 + C_e, L)
//   H_s     = stacked recurrent cells over s = 0 .. tau - 1
//   y_hat   = conv1d([H_0 ; ... ; H_{tau-1}], W_out) + b_out   (2, L), in mm
class ForecastModel {
public:
    explicit ForecastModel(const ModelConfig& config);

    const ModelConfig& config() const { return config_; }
    nn::ParameterStore& parameters() { return store_; }
    const nn::ParameterStore& parameters() const { return store_; }
    const exo::EmbeddingParams& embedding() const { return embedding_; }
    const std::vector<cells::RecurrentLayer>& layers() const { return layers_; }
    std::size_t output_weights() const { return output_weights_; }
    std::size_t output_bias() const { return output_bias_; }

    InputScaling input_scaling;
    exo::PassthroughScaling passthrough_scaling;

    // Fits both scalings on a training split.
    void fit_scaling(const trackgen::TrackDataset& train);

    // x_window is (tau, 10, L); `window` selects the matching inspections of
    // the bundle. Shape mismatches throw DimensionError.
    nn::Var forward(nn::Tape& tape, const nn::Tensor& x_window, const exo::ExogenousBundle& bundle,
                    exo::Window window) const;
    nn::Tensor forecast(const nn::Tensor& x_window, const exo::ExogenousBundle& bundle,
                        exo::Window window) const;

    // Same, reading the window from a dataset; returns (2, L).
    nn::Var forward(nn::Tape& tape, const trackgen::TrackDataset& data, trackgen::WindowIndex w) const;
    nn::Tensor forecast(const trackgen::TrackDataset& data, trackgen::WindowIndex w) const;

private:
    ModelConfig config_;
    nn::ParameterStore store_;
    exo::EmbeddingParams embedding_;
    std::vector<cells::RecurrentLayer> layers_;
    std::size_t output_weights_ = 0;
    std::size_t output_bias_ = 0;
};

// (tau, 10, L) slice of the irregularity panel starting at `first`.
nn::Tensor input_window(const trackgen::TrackDataset& data, std::size_t first, std::size_t tau);
// Observed vertical alignments (2, L) at inspection t.
nn::Tensor target_at(const trackgen::TrackDataset& data, std::size_t t);

} // namespace trackcast::forecaster
