#include "trackcast/forecaster/model.hpp"

#include <cmath>

#include "trackcast/errors.hpp"
#include "trackcast/nn/ops.hpp"

namespace trackcast::forecaster {

namespace ops = nn::ops;
using nn::Tensor;
using nn::Var;

void ModelConfig::validate() const {
    auto require = [](bool ok, const std::string& field, const std::string& rule) {
        if (!ok) throw ConfigurationError("model." + field + " " + rule);
    };
    require(window >= 1, "window", "must be at least 1");
    require(layers >= 1, "layers", "must be at least 1");
    require(hidden >= 1, "hidden", "must be at least 1");
    require(kernel_width % 2 == 1, "kernel_width", "must be odd");
    require(output_width % 2 == 1, "output_width", "must be odd");
    require(positions >= 1, "positions", "must be at least 1");
}

std::size_t ModelConfig::input_channels() const {
    return trackgen::kIrregularityChannels + exo::embedded_channels(flags);
}

std::size_t ModelConfig::effective_output_width() const {
    return variant == cells::CellKind::convlstm ? output_width : 1;
}

std::size_t ModelConfig::influence_radius(std::size_t step) const {
    if (step >= window) throw UsageError("window step " + std::to_string(step) + " outside window");
    const std::size_t out = (effective_output_width() - 1) / 2;
    if (variant != cells::CellKind::convlstm) return out;
    // Each recurrent hop through a convolution widens the footprint by the
    // kernel radius: once per layer at the perturbed step, then once per
    // remaining step of the last layer.
    const std::size_t p = (kernel_width - 1) / 2;
    return (layers + window - 1 - step) * p + out;
}

InputScaling InputScaling::fit(const Tensor& x) {
    if (x.rank() != 3 || x.dim(1) != trackgen::kIrregularityChannels) {
        throw DimensionError("input scaling expects (T, 10, L), got " + nn::shape_string(x.shape()));
    }
    InputScaling s;
    const std::size_t T = x.dim(0), L = x.dim(2);
    const double n = static_cast<double>(T * L);
    for (std::size_t c = 0; c < trackgen::kIrregularityChannels; ++c) {
        double sum = 0.0;
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t l = 0; l < L; ++l) sum += x(t, c, l);
        const double mean = sum / n;
        double sq = 0.0;
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t l = 0; l < L; ++l) {
                const double d = x(t, c, l) - mean;
                sq += d * d;
            }
        const double sd = std::sqrt(sq / n);
        s.mean[c] = mean;
        s.scale[c] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

ForecastModel::ForecastModel(const ModelConfig& config) : config_(config) {
    config_.validate();
    auto rng = nn::Rng::stream(config_.seed, "init");
    embedding_ = exo::EmbeddingParams::create(store_, "embed", rng, config_.per_category_embedding);
    std::size_t in = config_.input_channels();
    for (std::size_t k = 0; k < config_.layers; ++k) {
        const std::string prefix = "layer" + std::to_string(k);
        cells::RecurrentLayer layer;
        if (config_.variant == cells::CellKind::convlstm) {
            layer.params = cells::ConvLSTMCellParams::create(store_, prefix, in, config_.hidden,
                                                             config_.kernel_width, config_.positions, rng);
        } else {
            layer.params = cells::PointwiseRNNParams::create(store_, prefix, config_.variant, in,
                                                             config_.hidden, rng);
        }
        layers_.push_back(std::move(layer));
        in = config_.hidden;
    }
    const std::size_t concat = config_.hidden * config_.window;
    const std::size_t width = config_.effective_output_width();
    Tensor w({trackgen::kTargetChannels, concat, width});
    Tensor b({trackgen::kTargetChannels});
    nn::init_uniform(w, concat * width, rng);
    nn::init_uniform(b, concat * width, rng);
    output_weights_ = store_.add("output.w", std::move(w));
    output_bias_ = store_.add("output.b", std::move(b));
}

void ForecastModel::fit_scaling(const trackgen::TrackDataset& train) {
    input_scaling = InputScaling::fit(train.irregularities);
    passthrough_scaling = exo::PassthroughScaling::fit(train.exogenous, 0, train.inspections());
}

Var ForecastModel::forward(nn::Tape& tape, const Tensor& x_window, const exo::ExogenousBundle& bundle,
                           exo::Window window) const {
    const std::size_t tau = config_.window, L = config_.positions;
    if (x_window.rank() != 3 || x_window.dim(0) != tau || x_window.dim(1) != trackgen::kIrregularityChannels ||
        x_window.dim(2) != L) {
        throw DimensionError("forecast input must be (" + std::to_string(tau) + ", 10, " + std::to_string(L) +
                             "), got " + nn::shape_string(x_window.shape()));
    }
    if (window.length != tau) {
        throw DimensionError("exogenous window of " + std::to_string(window.length) + " steps, model expects " +
                             std::to_string(tau));
    }
    if (bundle.positions != L) {
        throw DimensionError("exogenous bundle has " + std::to_string(bundle.positions) + " positions, model expects " +
                             std::to_string(L));
    }

    auto z = exo::embed_bundle(tape, store_, embedding_, passthrough_scaling, bundle, window, config_.flags);
    std::vector<Var> inputs;
    inputs.reserve(tau);
    for (std::size_t s = 0; s < tau; ++s) {
        Tensor x({trackgen::kIrregularityChannels, L});
        for (std::size_t c = 0; c < trackgen::kIrregularityChannels; ++c)
            for (std::size_t l = 0; l < L; ++l)
                x(c, l) = (x_window(s, c, l) - input_scaling.mean[c]) / input_scaling.scale[c];
        Var xs = tape.constant(std::move(x));
        inputs.push_back(z.empty() ? xs : ops::concat_channels({xs, z[s]}));
    }
    for (const auto& layer : layers_) inputs = cells::unroll(tape, store_, layer, inputs);
    Var features = ops::concat_channels(inputs);
    return ops::conv1d(features, tape.parameter(store_[output_weights_]), tape.parameter(store_[output_bias_]));
}

Tensor ForecastModel::forecast(const Tensor& x_window, const exo::ExogenousBundle& bundle,
                               exo::Window window) const {
    nn::Tape tape;
    return forward(tape, x_window, bundle, window).value();
}

Var ForecastModel::forward(nn::Tape& tape, const trackgen::TrackDataset& data, trackgen::WindowIndex w) const {
    if (w.target != w.first + config_.window || w.target >= data.inspections()) {
        throw DimensionError("window [" + std::to_string(w.first) + ", " + std::to_string(w.target) +
                             "] does not fit the model window or the dataset");
    }
    return forward(tape, input_window(data, w.first, config_.window), data.exogenous, {w.first, config_.window});
}

Tensor ForecastModel::forecast(const trackgen::TrackDataset& data, trackgen::WindowIndex w) const {
    nn::Tape tape;
    return forward(tape, data, w).value();
}

Tensor input_window(const trackgen::TrackDataset& data, std::size_t first, std::size_t tau) {
    if (first + tau > data.inspections()) throw RangeError("input window runs past the dataset");
    const std::size_t stride = trackgen::kIrregularityChannels * data.positions();
    const auto begin = data.irregularities.storage().begin() + static_cast<std::ptrdiff_t>(first * stride);
    return Tensor({tau, trackgen::kIrregularityChannels, data.positions()},
                  std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(tau * stride)));
}

Tensor target_at(const trackgen::TrackDataset& data, std::size_t t) {
    if (t >= data.inspections()) throw RangeError("target inspection outside the dataset");
    const std::size_t L = data.positions();
    Tensor y({trackgen::kTargetChannels, L});
    for (std::size_t c = 0; c < trackgen::kTargetChannels; ++c)
        for (std::size_t l = 0; l < L; ++l) y(c, l) = data.irregularities(t, c, l);
    return y;
}

} // namespace trackcast::forecaster
