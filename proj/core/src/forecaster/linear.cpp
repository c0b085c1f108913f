#include "trackcast/forecaster/linear.hpp"

#include "trackcast/errors.hpp"

namespace trackcast::forecaster {

LinearFit fit_line(const std::array<double, kLinearHistory>& x, const std::array<double, kLinearHistory>& y) {
    for (std::size_t i = 0; i < kLinearHistory; ++i)
        for (std::size_t j = i + 1; j < kLinearHistory; ++j)
            if (x[i] == x[j]) throw DegenerateFitError("duplicate date " + std::to_string(x[i]) + " in linear fit");
    // Centred normal equations; values are taken relative to the first one so
    // a constant series gives a slope of exactly zero.
    const double mx = (x[0] + x[1] + x[2]) / 3.0;
    const double my = y[0] + ((y[1] - y[0]) + (y[2] - y[0])) / 3.0;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < kLinearHistory; ++i) {
        sxy += (x[i] - mx) * (y[i] - y[0]);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

double linear_forecast(const std::array<double, kLinearHistory>& dates,
                       const std::array<double, kLinearHistory>& values, double next_date) {
    const auto fit = fit_line(dates, values);
    // Evaluated around the centroid, which keeps the constant case exact.
    const double mx = (dates[0] + dates[1] + dates[2]) / 3.0;
    const double my = values[0] + ((values[1] - values[0]) + (values[2] - values[0])) / 3.0;
    return my + fit.slope * (next_date - mx);
}

nn::Tensor linear_forecast(const trackgen::TrackDataset& data, std::size_t target) {
    if (target < kLinearHistory || target >= data.inspections()) {
        throw RangeError("linear baseline needs three inspections before target " + std::to_string(target));
    }
    const std::size_t L = data.positions();
    const std::array<double, 3> dates = {data.dates[target - 3], data.dates[target - 2], data.dates[target - 1]};
    nn::Tensor out({trackgen::kTargetChannels, L});
    for (std::size_t c = 0; c < trackgen::kTargetChannels; ++c)
        for (std::size_t l = 0; l < L; ++l) {
            const std::array<double, 3> values = {data.irregularities(target - 3, c, l),
                                                  data.irregularities(target - 2, c, l),
                                                  data.irregularities(target - 1, c, l)};
            out(c, l) = linear_forecast(dates, values, data.dates[target]);
        }
    return out;
}

} // namespace trackcast::forecaster
