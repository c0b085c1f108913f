#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "trackcast/nn/parameters.hpp"
#include "trackcast/nn/tape.hpp"

namespace trackcast::cells {

enum class CellKind { convlstm, lstm, gru };

std::string_view to_string(CellKind kind);
CellKind parse_cell_kind(std::string_view text);

// 1D ConvLSTM cell with Hadamard peepholes:
//   i = sigma(Wxi * X + Whi * H + Wci . C_prev + bi)
//   f = sigma(Wxf * X + Whf * H + Wcf . C_prev + bf)
//   C = f . C_prev + i . tanh(Wxc * X + Whc * H + bc)
//   o = sigma(Wxo * X + Who * H + Wco . C + bo)
//   H = o . tanh(C)
// The four input kernels are stored fused in one (4H, C, W) tensor with gate
// blocks in the order i, f, c, o; likewise the hidden kernels (4H, H, W) and
// the bias (4H). Peepholes are (H, L) each, so a cell is bound to one L.
struct ConvLSTMCellParams {
    std::size_t input_channels = 0;
    std::size_t hidden_channels = 0;
    std::size_t width = 0;
    std::size_t positions = 0;

    std::size_t input_kernel = 0;
    std::size_t hidden_kernel = 0;
    std::size_t bias = 0;
    std::size_t peephole_i = 0;
    std::size_t peephole_f = 0;
    std::size_t peephole_o = 0;

    static ConvLSTMCellParams create(nn::ParameterStore& store, const std::string& prefix,
                                     std::size_t input_channels, std::size_t hidden_channels,
                                     std::size_t width, std::size_t positions, nn::Rng& rng);
};

// Shared-weight LSTM or GRU applied independently at every position. Weights
// are width-1 kernels: (G*H, C, 1) and (G*H, H, 1) with G = 4 (i, f, g, o) for
// the LSTM and G = 3 (r, z, n) for the GRU, plus input and hidden biases.
struct PointwiseRNNParams {
    CellKind kind = CellKind::lstm;
    std::size_t input_channels = 0;
    std::size_t hidden_channels = 0;

    std::size_t input_weights = 0;
    std::size_t hidden_weights = 0;
    std::size_t input_bias = 0;
    std::size_t hidden_bias = 0;

    static PointwiseRNNParams create(nn::ParameterStore& store, const std::string& prefix,
                                     CellKind kind, std::size_t input_channels,
                                     std::size_t hidden_channels, nn::Rng& rng);
};

// Plain-tensor state: hidden and cell are (channels, positions). The GRU
// leaves `cell` empty.
struct CellState {
    nn::Tensor hidden;
    nn::Tensor cell;
};

struct StateVars {
    nn::Var hidden;
    nn::Var cell;
};

StateVars convlstm_step(nn::Tape& tape, const nn::ParameterStore& store,
                        const ConvLSTMCellParams& params, nn::Var x, const StateVars& prev);
StateVars lstm_step(nn::Tape& tape, const nn::ParameterStore& store,
                    const PointwiseRNNParams& params, nn::Var x, const StateVars& prev);
nn::Var gru_step(nn::Tape& tape, const nn::ParameterStore& store,
                 const PointwiseRNNParams& params, nn::Var x, nn::Var prev_hidden);

// Untaped conveniences. Pointwise cells also accept rank-1 channel vectors.
CellState convlstm_step(const nn::Tensor& x, const CellState& prev,
                        const nn::ParameterStore& store, const ConvLSTMCellParams& params);
CellState lstm_step(const nn::Tensor& x, const CellState& prev, const nn::ParameterStore& store,
                    const PointwiseRNNParams& params);
nn::Tensor gru_step(const nn::Tensor& x, const nn::Tensor& prev_hidden,
                    const nn::ParameterStore& store, const PointwiseRNNParams& params);

// One layer of a recurrent stack.
struct RecurrentLayer {
    std::variant<ConvLSTMCellParams, PointwiseRNNParams> params;

    CellKind kind() const;
    std::size_t input_channels() const;
    std::size_t hidden_channels() const;
};

StateVars zero_state(nn::Tape& tape, const RecurrentLayer& layer, std::size_t positions);
StateVars step(nn::Tape& tape, const nn::ParameterStore& store, const RecurrentLayer& layer,
               nn::Var x, const StateVars& prev);

// Runs the layer over the inputs from a zero state; returns every hidden state.
std::vector<nn::Var> unroll(nn::Tape& tape, const nn::ParameterStore& store,
                            const RecurrentLayer& layer, std::span<const nn::Var> inputs);
std::vector<nn::Tensor> unroll(const nn::ParameterStore& store, const RecurrentLayer& layer,
                               std::span<const nn::Tensor> inputs);

} // namespace trackcast::cells
