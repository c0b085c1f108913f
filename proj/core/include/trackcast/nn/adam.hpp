#pragma once

#include <vector>

#include "trackcast/nn/parameters.hpp"

namespace trackcast::nn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

// Moments are congruent to the parameter store they were created from.
class AdamState {
public:
    AdamState(const ParameterStore& params, AdamConfig config);

    const AdamConfig& config() const { return config_; }
    std::size_t step() const { return step_; }
    const std::vector<Tensor>& first_moment() const { return first_; }
    const std::vector<Tensor>& second_moment() const { return second_; }

private:
    friend void adam_step(ParameterStore&, const std::vector<Tensor>&, AdamState&);

    AdamConfig config_;
    std::size_t step_ = 0;
    std::vector<Tensor> first_;
    std::vector<Tensor> second_;
};

// Bias-corrected Adam update of every parameter. `grads` is indexed by
// parameter id. A non-finite gradient throws NumericError naming the
// parameter, before anything is modified.
void adam_step(ParameterStore& params, const std::vector<Tensor>& grads, AdamState& state);

} // namespace trackcast::nn
