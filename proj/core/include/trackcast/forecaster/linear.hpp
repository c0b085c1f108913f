#pragma once

#include <array>

#include "trackcast/nn/tensor.hpp"
#include "trackcast/trackgen/dataset.hpp"

namespace trackcast::forecaster {

inline constexpr std::size_t kLinearHistory = 3;

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double operator()(double date) const { return slope * date + intercept; }
};

// Least-squares line through three (date, value) points. Any repeated date
// throws DegenerateFitError.
LinearFit fit_line(const std::array<double, kLinearHistory>& dates,
                   const std::array<double, kLinearHistory>& values);

double linear_forecast(const std::array<double, kLinearHistory>& dates,
                       const std::array<double, kLinearHistory>& values, double next_date);

// Baseline forecast (2, L) of inspection `target` from inspections
// target - 3 .. target - 1, fitted independently per position and rail.
nn::Tensor linear_forecast(const trackgen::TrackDataset& data, std::size_t target);

} // namespace trackcast::forecaster
