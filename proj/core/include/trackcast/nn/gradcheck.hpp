#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "trackcast/nn/parameters.hpp"
#include "trackcast/nn/tape.hpp"

namespace trackcast::nn {

struct GradCheckOptions {
    double step = 1e-5;
    // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
    double floor = 1e-6;
    // At most this many entries per parameter tensor are probed (0 = all).
    std::size_t max_entries_per_parameter = 0;
    std::uint64_t seed = 0;
};

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t entries_checked = 0;
};

// Builds the loss on a fresh tape via `loss_fn`, differentiates it with
// Tape::backward, and compares every probed entry against a central
// difference (L(theta + h) - L(theta - h)) / 2h. Parameters are restored.
GradCheckResult check_gradients(ParameterStore& params,
                                const std::function<Var(Tape&)>& loss_fn,
                                const GradCheckOptions& options = {});

} // namespace trackcast::nn
