#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trackcast/evalkit/metrics.hpp"
#include "trackcast/forecaster/model.hpp"
#include "trackcast/trackgen/dataset.hpp"

namespace trackcast::evalkit {

struct EvalConfig {
    std::vector<double> alphas = {-4.0, -6.0};
    std::vector<double> epsilons = {0.3, 0.5, 1.0};

    void validate() const;
};

// Metrics of one subset. Empty subsets keep count 0 and leave the metrics
// absent rather than zero.
struct SubsetMetrics {
    std::string name;
    std::optional<double> alpha;
    std::size_t count = 0;
    std::optional<double> rmse;
    std::vector<std::optional<double>> accuracy;  // one per EvalConfig epsilon
};

struct EvalReport {
    std::string model;
    EvalConfig config;
    SubsetMetrics entire;
    // Entire set only; absent when observations are constant.
    std::optional<double> r_squared;
    std::vector<SubsetMetrics> thresholds;  // one per EvalConfig alpha
    // Both rails pooled per position; NaN where a position has no pairs.
    std::vector<double> position_rmse;

    const SubsetMetrics& subset(std::optional<double> alpha) const;
};

std::string subset_name(std::optional<double> alpha);
SubsetMetrics subset_metrics(const PairSet& pairs, std::optional<double> alpha, const std::vector<double>& epsilons);
std::vector<double> position_rmse(const PairSet& pairs, std::size_t positions);
EvalReport evaluate_pairs(std::string model, const PairSet& pairs, std::size_t positions, const EvalConfig& config);

// Pairs over the vertical channels at each window target of `data`.
PairSet forecast_pairs(const trackgen::TrackDataset& data, std::span<const trackgen::WindowIndex> windows,
                       std::span<const nn::Tensor> predictions);
PairSet model_pairs(const forecaster::ForecastModel& model, const trackgen::TrackDataset& data,
                    std::size_t threads = 0);
// Linear baseline on the same targets a model with this window would see.
PairSet linear_pairs(const trackgen::TrackDataset& data, std::size_t window);
// Predictions equal to the observations; exercises the reporting path.
PairSet oracle_pairs(const trackgen::TrackDataset& data, std::size_t window);

std::vector<std::string> comparison_header(const EvalConfig& config);
// One row per model and subset: model,subset,n,rmse,r_squared,accuracy_eps...
void write_comparison_csv(const std::vector<EvalReport>& reports, const std::filesystem::path& path);

struct FrequencyRow {
    std::size_t position = 0;
    double frequency = 0.0;
    double rmse_a = 0.0;
    double rmse_b = 0.0;
};

// Maintenance flags of every category per position divided by the years
// spanned by the inspection dates.
std::vector<double> annual_maintenance_frequency(const trackgen::TrackDataset& data);
std::vector<FrequencyRow> maintenance_frequency_report(const trackgen::TrackDataset& data,
                                                       std::span<const double> rmse_a,
                                                       std::span<const double> rmse_b);
void write_frequency_csv(const std::vector<FrequencyRow>& rows, const std::string& model_a,
                         const std::string& model_b, const std::filesystem::path& path);

} // namespace trackcast::evalkit
