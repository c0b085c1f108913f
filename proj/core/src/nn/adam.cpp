#include "trackcast/nn/adam.hpp"

#include <cmath>

#include "trackcast/errors.hpp"

namespace trackcast::nn {

void AdamConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigurationError("adam: learning_rate must be > 0");
    if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigurationError("adam: beta1 must be in (0,1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigurationError("adam: beta2 must be in (0,1)");
    if (!(epsilon > 0.0)) throw ConfigurationError("adam: epsilon must be > 0");
}

AdamState::AdamState(const ParameterStore& params, AdamConfig config) : config_(config) {
    config_.validate();
    for (const auto& p : params) {
        first_.push_back(Tensor::zeros_like(p.value));
        second_.push_back(Tensor::zeros_like(p.value));
    }
}

void adam_step(ParameterStore& params, const std::vector<Tensor>& grads, AdamState& state) {
    if (grads.size() != params.size() || state.first_.size() != params.size()) {
        throw DimensionError("adam_step: " + std::to_string(grads.size()) + " gradients, " +
                             std::to_string(state.first_.size()) + " moment slots for " +
                             std::to_string(params.size()) + " parameters");
    }
    for (const auto& p : params) {
        require_same_shape(p.value, grads[p.id], "adam_step gradient");
        if (!grads[p.id].all_finite()) {
            throw NumericError("adam_step: non-finite gradient for parameter '" + p.name + "'");
        }
    }

    const auto& cfg = state.config_;
    ++state.step_;
    const double t = static_cast<double>(state.step_);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    for (auto& p : params) {
        auto& m = state.first_[p.id];
        auto& v = state.second_[p.id];
        const auto& g = grads[p.id];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            p.value[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
}

} // namespace trackcast::nn
