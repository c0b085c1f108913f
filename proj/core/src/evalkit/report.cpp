#include "trackcast/evalkit/report.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "trackcast/errors.hpp"
#include "trackcast/forecaster/linear.hpp"
#include "trackcast/forecaster/train.hpp"

namespace trackcast::evalkit {

using trackgen::format_real;

void EvalConfig::validate() const {
    for (double a : alphas)
        if (!std::isfinite(a)) throw ConfigurationError("evaluation.alphas must be finite");
    for (double e : epsilons)
        if (!(e > 0.0) || !std::isfinite(e)) throw ConfigurationError("evaluation.epsilons must be positive");
}

const SubsetMetrics& EvalReport::subset(std::optional<double> alpha) const {
    if (!alpha) return entire;
    for (const auto& s : thresholds)
        if (s.alpha == alpha) return s;
    throw UsageError("report has no subset " + subset_name(alpha));
}

std::string subset_name(std::optional<double> alpha) {
    return alpha ? "alpha=" + format_real(*alpha) : "entire";
}

SubsetMetrics subset_metrics(const PairSet& pairs, std::optional<double> alpha, const std::vector<double>& epsilons) {
    SubsetMetrics m;
    m.name = subset_name(alpha);
    m.alpha = alpha;
    m.count = pairs.size();
    m.accuracy.assign(epsilons.size(), std::nullopt);
    if (pairs.empty()) return m;
    m.rmse = rmse(pairs);
    for (std::size_t i = 0; i < epsilons.size(); ++i) m.accuracy[i] = accuracy(pairs, epsilons[i]);
    return m;
}

std::vector<double> position_rmse(const PairSet& pairs, std::size_t positions) {
    std::vector<double> sq(positions, 0.0);
    std::vector<std::size_t> n(positions, 0);
    for (const auto& p : pairs) {
        if (p.index.l >= positions) {
            throw DimensionError("pair at position " + std::to_string(p.index.l) + " outside " +
                                 std::to_string(positions) + " positions");
        }
        sq[p.index.l] += (p.observed - p.predicted) * (p.observed - p.predicted);
        ++n[p.index.l];
    }
    std::vector<double> out(positions, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t l = 0; l < positions; ++l)
        if (n[l] > 0) out[l] = std::sqrt(sq[l] / static_cast<double>(n[l]));
    return out;
}

EvalReport evaluate_pairs(std::string model, const PairSet& pairs, std::size_t positions, const EvalConfig& config) {
    config.validate();
    EvalReport r;
    r.model = std::move(model);
    r.config = config;
    r.entire = subset_metrics(pairs, std::nullopt, config.epsilons);
    try {
        r.r_squared = r_squared(pairs);
    } catch (const DegenerateFitError&) {
    } catch (const UsageError&) {
    }
    for (double a : config.alphas) r.thresholds.push_back(subset_metrics(threshold_subset(pairs, a), a, config.epsilons));
    r.position_rmse = position_rmse(pairs, positions);
    return r;
}

PairSet forecast_pairs(const trackgen::TrackDataset& data, std::span<const trackgen::WindowIndex> windows,
                       std::span<const nn::Tensor> predictions) {
    if (windows.size() != predictions.size()) {
        throw DimensionError(std::to_string(predictions.size()) + " predictions for " +
                             std::to_string(windows.size()) + " windows");
    }
    const std::size_t L = data.positions();
    PairSet out;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& pred = predictions[i];
        if (pred.shape() != nn::Shape{trackgen::kTargetChannels, L}) {
            throw DimensionError("prediction " + std::to_string(i) + " has shape " + nn::shape_string(pred.shape()));
        }
        const std::size_t t = windows[i].target;
        for (std::size_t s = 0; s < trackgen::kTargetChannels; ++s)
            for (std::size_t l = 0; l < L; ++l) out.add(data.irregularities(t, s, l), pred(s, l), {t, l, s});
    }
    return out;
}

PairSet model_pairs(const forecaster::ForecastModel& model, const trackgen::TrackDataset& data, std::size_t threads) {
    const auto windows = trackgen::make_windows(data, model.config().window);
    const auto preds = forecaster::predict_windows(model, data, threads);
    return forecast_pairs(data, windows, preds);
}

PairSet linear_pairs(const trackgen::TrackDataset& data, std::size_t window) {
    if (window < forecaster::kLinearHistory) {
        throw UsageError("linear baseline needs a window of at least 3 to share the model's targets");
    }
    const auto windows = trackgen::make_windows(data, window);
    std::vector<nn::Tensor> preds;
    preds.reserve(windows.size());
    for (const auto& w : windows) preds.push_back(forecaster::linear_forecast(data, w.target));
    return forecast_pairs(data, windows, preds);
}

PairSet oracle_pairs(const trackgen::TrackDataset& data, std::size_t window) {
    const auto windows = trackgen::make_windows(data, window);
    std::vector<nn::Tensor> preds;
    for (const auto& w : windows) preds.push_back(forecaster::target_at(data, w.target));
    return forecast_pairs(data, windows, preds);
}

namespace {

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

} // namespace

std::vector<std::string> comparison_header(const EvalConfig& config) {
    std::vector<std::string> h = {"model", "subset", "n", "rmse", "r_squared"};
    for (double e : config.epsilons) h.push_back("accuracy_eps" + format_real(e));
    return h;
}

void write_comparison_csv(const std::vector<EvalReport>& reports, const std::filesystem::path& path) {
    if (reports.empty()) throw UsageError("comparison needs at least one report");
    const auto& config = reports.front().config;
    for (const auto& r : reports) {
        if (r.config.epsilons != config.epsilons || r.config.alphas != config.alphas) {
            throw UsageError("reports in one comparison must share alphas and epsilons");
        }
    }
    auto out = open_csv(path);
    const auto header = comparison_header(config);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    auto row = [&](const EvalReport& r, const SubsetMetrics& s, const std::optional<double>& r2) {
        out << r.model << ',' << s.name << ',' << s.count << ',' << optional_real(s.rmse) << ',' << optional_real(r2);
        for (const auto& a : s.accuracy) out << ',' << optional_real(a);
        out << '\n';
    };
    for (const auto& r : reports) {
        row(r, r.entire, r.r_squared);
        for (const auto& s : r.thresholds) row(r, s, std::nullopt);
    }
}

std::vector<double> annual_maintenance_frequency(const trackgen::TrackDataset& data) {
    const std::size_t T = data.inspections(), L = data.positions();
    if (T < 2 || data.dates.back() <= data.dates.front()) {
        throw RangeError("maintenance frequency needs inspections spanning a positive time");
    }
    const double years = (data.dates.back() - data.dates.front()) / 365.0;
    const auto& m = data.exogenous.maintenance;
    std::vector<double> freq(L, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < m.dim(1); ++k)
            for (std::size_t l = 0; l < L; ++l) freq[l] += m(t, k, l);
    for (auto& f : freq) f /= years;
    return freq;
}

std::vector<FrequencyRow> maintenance_frequency_report(const trackgen::TrackDataset& data,
                                                       std::span<const double> rmse_a,
                                                       std::span<const double> rmse_b) {
    const std::size_t L = data.positions();
    if (rmse_a.size() != L || rmse_b.size() != L) {
        throw DimensionError("per-position rmse lengths " + std::to_string(rmse_a.size()) + " and " +
                             std::to_string(rmse_b.size()) + " do not match " + std::to_string(L) + " positions");
    }
    const auto freq = annual_maintenance_frequency(data);
    std::vector<FrequencyRow> rows(L);
    for (std::size_t l = 0; l < L; ++l) rows[l] = {l, freq[l], rmse_a[l], rmse_b[l]};
    return rows;
}

void write_frequency_csv(const std::vector<FrequencyRow>& rows, const std::string& model_a,
                         const std::string& model_b, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "position,annual_maintenance,rmse_" << model_a << ",rmse_" << model_b << '\n';
    for (const auto& r : rows) {
        out << r.position << ',' << format_real(r.frequency) << ',' << format_real(r.rmse_a) << ','
            << format_real(r.rmse_b) << '\n';
    }
}

} // namespace trackcast::evalkit
