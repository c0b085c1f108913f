#pragma once

#include "trackcast/nn/tensor.hpp"

namespace trackcast::nn {

// Weights (out_channels, in_channels, width) and bias (out_channels).
// Width must be odd so the receptive field is symmetric about each position.
struct ConvKernel1D {
    Tensor weights;
    Tensor bias;

    static ConvKernel1D zeros(std::size_t out_channels, std::size_t in_channels, std::size_t width);

    std::size_t out_channels() const { return weights.dim(0); }
    std::size_t in_channels() const { return weights.dim(1); }
    std::size_t width() const { return weights.dim(2); }

    // Throws ConfigurationError for an even width, DimensionError for a bias mismatch.
    void validate() const;
};

// Zero-padded "same" convolution along the position axis:
//   out[c, l] = bias[c] + sum_{c', k} w[c, c', k] * in[c', l + k - (width - 1) / 2]
// input is (in_channels, positions); the result is (out_channels, positions).
Tensor conv1d(const Tensor& input, const ConvKernel1D& kernel);

// out = weights * input + bias for a vector input.
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias);

namespace kernels {

// Raw forward: out (O, L) is overwritten. bias may be null.
void conv1d_forward(const Tensor& input, const Tensor& weights, const Tensor* bias, Tensor& out);

// Accumulates into any non-null gradient buffer (shapes must already match).
void conv1d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                     Tensor* grad_input, Tensor* grad_weights, Tensor* grad_bias);

// Shape checks shared by the plain and taped entry points.
void check_conv_shapes(const Tensor& input, const Tensor& weights, const Tensor* bias);

} // namespace kernels

} // namespace trackcast::nn
