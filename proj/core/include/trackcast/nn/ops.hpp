#pragma once

#include <optional>
#include <span>
#include <vector>

#include "trackcast/nn/tape.hpp"

// Differentiable operations recorded on a Tape. Each op validates shapes,
// computes its forward value eagerly and registers the matching backprop.
namespace trackcast::nn::ops {

// input (C, L), weights (O, C, W), optional bias (O) -> (O, L); zero "same" padding.
Var conv1d(Var input, Var weights, std::optional<Var> bias = std::nullopt);
// input (n), weights (m, n), bias (m) -> (m)
Var dense(Var input, Var weights, Var bias);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var sigmoid(Var a);
Var tanh(Var a);

// Concatenate rank-2 tensors along the channel axis (all share L).
Var concat_channels(const std::vector<Var>& parts);
// Rows [begin, begin + count) of a rank-2 tensor.
Var slice_channels(Var a, std::size_t begin, std::size_t count);

// Mean of squared element-wise differences; returns a (1)-shaped node.
Var mse_loss(Var prediction, Var target);
// Sum of scalar nodes.
Var sum(const std::vector<Var>& scalars);

double sigmoid(double x);

} // namespace trackcast::nn::ops
