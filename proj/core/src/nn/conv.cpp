#include "trackcast/nn/conv.hpp"

#include <Eigen/Core>
#include <algorithm>

#include "trackcast/errors.hpp"

namespace trackcast::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using Strided = Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>;
using TapMap = Eigen::Map<RowMatrix, 0, Strided>;
using ConstTapMap = Eigen::Map<const RowMatrix, 0, Strided>;

// Column range [lo, hi) of the output that reads input columns shifted by `offset`.
struct Overlap {
    Eigen::Index lo;
    Eigen::Index count;
};

Overlap overlap(std::ptrdiff_t positions, std::ptrdiff_t offset) {
    const auto lo = std::max<std::ptrdiff_t>(0, -offset);
    const auto hi = std::min<std::ptrdiff_t>(positions, positions - offset);
    return {lo, std::max<std::ptrdiff_t>(0, hi - lo)};
}

} // namespace

ConvKernel1D ConvKernel1D::zeros(std::size_t out_channels, std::size_t in_channels,
                                 std::size_t width) {
    ConvKernel1D k{Tensor({out_channels, in_channels, width}), Tensor({out_channels})};
    k.validate();
    return k;
}

void ConvKernel1D::validate() const {
    require_rank(weights, 3, "conv kernel weights");
    if (width() % 2 == 0) {
        throw ConfigurationError("conv kernel width must be odd, got " + std::to_string(width()));
    }
    require_rank(bias, 1, "conv kernel bias");
    if (bias.dim(0) != out_channels()) {
        throw DimensionError("conv bias length " + std::to_string(bias.dim(0)) +
                             " does not match out_channels " + std::to_string(out_channels()));
    }
}

Tensor conv1d(const Tensor& input, const ConvKernel1D& kernel) {
    kernel.validate();
    kernels::check_conv_shapes(input, kernel.weights, &kernel.bias);
    Tensor out({kernel.out_channels(), input.dim(1)});
    kernels::conv1d_forward(input, kernel.weights, &kernel.bias, out);
    return out;
}

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    require_rank(input, 1, "dense input");
    require_rank(weights, 2, "dense weights");
    require_rank(bias, 1, "dense bias");
    if (weights.dim(1) != input.dim(0) || weights.dim(0) != bias.dim(0)) {
        throw DimensionError("dense: weights " + shape_string(weights.shape()) + ", input " +
                             shape_string(input.shape()) + ", bias " +
                             shape_string(bias.shape()));
    }
    Tensor out = bias;
    for (std::size_t r = 0; r < weights.dim(0); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < weights.dim(1); ++c) acc += weights(r, c) * input[c];
        out[r] += acc;
    }
    return out;
}

namespace kernels {

void check_conv_shapes(const Tensor& input, const Tensor& weights, const Tensor* bias) {
    require_rank(input, 2, "conv1d input");
    require_rank(weights, 3, "conv1d weights");
    if (weights.dim(2) % 2 == 0) {
        throw ConfigurationError("conv kernel width must be odd, got " +
                                 std::to_string(weights.dim(2)));
    }
    if (input.dim(0) != weights.dim(1)) {
        throw DimensionError("conv1d: input has " + std::to_string(input.dim(0)) +
                             " channels, kernel expects " + std::to_string(weights.dim(1)));
    }
    if (bias && (bias->rank() != 1 || bias->dim(0) != weights.dim(0))) {
        throw DimensionError("conv1d: bias " + shape_string(bias->shape()) +
                             " does not match out_channels " + std::to_string(weights.dim(0)));
    }
}

void conv1d_forward(const Tensor& input, const Tensor& weights, const Tensor* bias, Tensor& out) {
    const auto in_ch = static_cast<Eigen::Index>(weights.dim(1));
    const auto out_ch = static_cast<Eigen::Index>(weights.dim(0));
    const auto width = static_cast<Eigen::Index>(weights.dim(2));
    const auto positions = static_cast<Eigen::Index>(input.dim(1));
    const auto half = (width - 1) / 2;

    ConstMatrixMap in(input.data(), in_ch, positions);
    MatrixMap result(out.data(), out_ch, positions);
    if (bias) {
        for (Eigen::Index c = 0; c < out_ch; ++c) result.row(c).setConstant((*bias)[c]);
    } else {
        result.setZero();
    }
    for (Eigen::Index k = 0; k < width; ++k) {
        const auto ov = overlap(positions, k - half);
        if (ov.count == 0) continue;
        ConstTapMap tap(weights.data() + k, out_ch, in_ch, Strided(in_ch * width, width));
        result.middleCols(ov.lo, ov.count).noalias() +=
            tap * in.middleCols(ov.lo + k - half, ov.count);
    }
}

void conv1d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                     Tensor* grad_input, Tensor* grad_weights, Tensor* grad_bias) {
    const auto in_ch = static_cast<Eigen::Index>(weights.dim(1));
    const auto out_ch = static_cast<Eigen::Index>(weights.dim(0));
    const auto width = static_cast<Eigen::Index>(weights.dim(2));
    const auto positions = static_cast<Eigen::Index>(input.dim(1));
    const auto half = (width - 1) / 2;

    ConstMatrixMap in(input.data(), in_ch, positions);
    ConstMatrixMap gout(grad_out.data(), out_ch, positions);
    if (grad_bias) {
        for (Eigen::Index c = 0; c < out_ch; ++c) (*grad_bias)[c] += gout.row(c).sum();
    }
    for (Eigen::Index k = 0; k < width; ++k) {
        const auto ov = overlap(positions, k - half);
        if (ov.count == 0) continue;
        const auto src = ov.lo + k - half;
        if (grad_input) {
            ConstTapMap tap(weights.data() + k, out_ch, in_ch, Strided(in_ch * width, width));
            MatrixMap gin(grad_input->data(), in_ch, positions);
            gin.middleCols(src, ov.count).noalias() +=
                tap.transpose() * gout.middleCols(ov.lo, ov.count);
        }
        if (grad_weights) {
            TapMap gtap(grad_weights->data() + k, out_ch, in_ch, Strided(in_ch * width, width));
            gtap.noalias() += gout.middleCols(ov.lo, ov.count) *
                              in.middleCols(src, ov.count).transpose();
        }
    }
}

} // namespace kernels

} // namespace trackcast::nn
